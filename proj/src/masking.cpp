#include "vbsynth/masking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vbsynth/error.hpp"

namespace vbsynth {

double clip(double x, double lo, double hi)
{
    if (lo > hi) {
        throw Error(ErrorCode::InvalidArgument, "clip: lo must not exceed hi");
    }
    return std::min(std::max(x, lo), hi);
}

namespace {

double cross(Point o, Point a, Point b)
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double segment_distance(Point p, Point a, Point b)
{
    const Point ab = b - a;
    const Point ap = p - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = len2 > 0.0 ? (ap.x * ab.x + ap.y * ab.y) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(ap - t * ab); // relative form keeps the result translation-invariant
}

} // namespace

// Andrew's monotone chain; collinear points are dropped.
ConvexHull::ConvexHull(std::span<const Point> points)
{
    std::vector<Point> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) {
        throw Error(ErrorCode::DegenerateRegion, "region needs at least 3 distinct points");
    }

    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Point& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) {
            --k;
        }
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) {
            --k;
        }
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) {
        throw Error(ErrorCode::DegenerateRegion, "region points are collinear");
    }
    vertices_ = std::move(hull);
}

bool ConvexHull::contains(Point p) const
{
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (cross(vertices_[i], vertices_[(i + 1) % n], p) < 0.0) {
            return false;
        }
    }
    return true;
}

double ConvexHull::signed_distance(Point p) const
{
    const std::size_t n = vertices_.size();
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        d = std::min(d, segment_distance(p, vertices_[i], vertices_[(i + 1) % n]));
    }
    return contains(p) ? -d : d;
}

double signed_distance(Point p, std::span<const Point> region_points)
{
    return ConvexHull(region_points).signed_distance(p);
}

FalloffConfig FalloffConfig::uniform(double fdist, DistanceMode mode)
{
    FalloffConfig cfg;
    cfg.fdist.fill(fdist);
    cfg.mode = mode;
    return cfg;
}

double FalloffConfig::max() const
{
    return *std::max_element(fdist.begin(), fdist.end());
}

void FalloffConfig::validate() const
{
    for (double f : fdist) {
        if (!std::isfinite(f) || f <= 0.0) {
            throw Error(ErrorCode::InvalidArgument, "fall-off distances must be positive and finite");
        }
    }
}

Raster<double> point_set_mask(int width, int height, std::span<const Point> points, double fdist,
                              DistanceMode mode)
{
    if (!std::isfinite(fdist) || fdist <= 0.0) {
        throw Error(ErrorCode::InvalidArgument, "fall-off distance must be positive and finite");
    }
    Raster<double> mask(width, height, 1);
    if (mode == DistanceMode::Hull) {
        const ConvexHull hull(points);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                mask.at(x, y) = falloff_weight(hull.signed_distance({x + 0.5, y + 0.5}), fdist);
            }
        }
        return mask;
    }

    if (points.empty()) {
        throw Error(ErrorCode::DegenerateRegion, "region has no points");
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Point c{x + 0.5, y + 0.5};
            double d = std::numeric_limits<double>::infinity();
            for (const Point& p : points) {
                d = std::min(d, norm(c - p));
            }
            mask.at(x, y) = falloff_weight(d, fdist);
        }
    }
    return mask;
}

RegionMask region_mask(int width, int height, const LandmarkSet& lm, Region r, const FalloffConfig& cfg)
{
    return {point_set_mask(width, height, lm.region(r), cfg.of(r), cfg.mode), r};
}

Raster<std::uint8_t> mask_to_gray(const Raster<double>& weights)
{
    Raster<std::uint8_t> out(weights.width(), weights.height(), 1);
    std::transform(weights.data().begin(), weights.data().end(), out.data().begin(),
                   [](double w) { return quantize(255.0 * w); });
    return out;
}

} // namespace vbsynth
