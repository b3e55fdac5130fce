#include "vbsynth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vbsynth/error.hpp"

namespace vbsynth {

double norm(Point p)
{
    return std::hypot(p.x, p.y);
}

std::string_view region_name(Region r)
{
    switch (r) {
    case Region::Eyes: return "eyes";
    case Region::Eyebrows: return "eyebrows";
    case Region::Nose: return "nose";
    case Region::Mouth: return "mouth";
    }
    return "unknown";
}

Region region_from_name(std::string_view name)
{
    for (Region r : kRegions) {
        if (region_name(r) == name) {
            return r;
        }
    }
    throw Error(ErrorCode::BadConfig, "unknown region '" + std::string(name) + "'");
}

LandmarkSet::LandmarkSet(std::vector<Point> points) : points_(std::move(points))
{
    if (points_.size() != kPointCount) {
        throw Error(ErrorCode::BadLandmarks,
                    "expected 68 landmarks, got " + std::to_string(points_.size()));
    }
    for (const Point& p : points_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw Error(ErrorCode::BadLandmarks, "landmark coordinates must be finite");
        }
    }
}

IndexRange LandmarkSet::region_range(Region r)
{
    switch (r) {
    case Region::Eyebrows: return {17, 27};
    case Region::Nose: return {27, 36};
    case Region::Eyes: return {36, 48};
    case Region::Mouth: return {48, 68};
    }
    return {0, 0};
}

std::span<const Point> LandmarkSet::region(Region r) const
{
    const IndexRange range = region_range(r);
    return std::span<const Point>(points_).subspan(range.first, range.size());
}

std::span<const Point> LandmarkSet::organs() const
{
    return std::span<const Point>(points_).subspan(17, 51);
}

Point centroid(std::span<const Point> points)
{
    Point sum{};
    for (const Point& p : points) {
        sum = sum + p;
    }
    const double n = static_cast<double>(points.size());
    return {sum.x / n, sum.y / n};
}

Point LandmarkSet::centroid(Region r) const
{
    return vbsynth::centroid(region(r));
}

Point LandmarkSet::organs_centroid() const
{
    return vbsynth::centroid(organs());
}

double LandmarkSet::bbox_diagonal() const
{
    auto [minx, maxx] = std::minmax_element(points_.begin(), points_.end(),
                                            [](Point a, Point b) { return a.x < b.x; });
    auto [miny, maxy] = std::minmax_element(points_.begin(), points_.end(),
                                            [](Point a, Point b) { return a.y < b.y; });
    return std::hypot(maxx->x - minx->x, maxy->y - miny->y);
}

double LandmarkSet::fraction_inside(int width, int height) const
{
    const auto inside = std::count_if(points_.begin(), points_.end(), [&](Point p) {
        return p.x >= 0.0 && p.y >= 0.0 && p.x < width && p.y < height;
    });
    return static_cast<double>(inside) / static_cast<double>(points_.size());
}

void PerturbationBounds::validate() const
{
    const auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(rotation) || !ok(scale) || !ok(translation)) {
        throw Error(ErrorCode::InvalidArgument, "perturbation bounds must be finite and non-negative");
    }
    if (scale >= 1.0) {
        throw Error(ErrorCode::InvalidArgument, "scale bound must be < 1");
    }
}

bool PerturbationParams::within(const PerturbationBounds& b) const
{
    return std::abs(rotation) <= b.rotation && std::abs(scale - 1.0) <= b.scale &&
           norm(translation) <= b.translation && std::isfinite(pivot.x) && std::isfinite(pivot.y);
}

AffineTransform AffineTransform::inverse() const
{
    const double det = determinant();
    if (det == 0.0 || !std::isfinite(det)) {
        throw Error(ErrorCode::DegenerateTransform, "affine transform is not invertible");
    }
    const double a = m[1][1] / det;
    const double b = -m[0][1] / det;
    const double c = -m[1][0] / det;
    const double d = m[0][0] / det;
    AffineTransform inv;
    inv.m = {{{a, b, -(a * m[0][2] + b * m[1][2])}, {c, d, -(c * m[0][2] + d * m[1][2])}}};
    return inv;
}

PerturbationParams sample_perturbation(const PerturbationBounds& bounds, Point pivot, Rng& rng)
{
    PerturbationParams p;
    p.pivot = pivot;

    const double rot_mag = bounds.rotation * rng.uniform01();
    p.rotation = rng.sign() * rot_mag;

    const double scale_mag = bounds.scale * rng.uniform01();
    p.scale = 1.0 + rng.sign() * scale_mag;

    const double t_mag = bounds.translation * rng.uniform01();
    const double angle = 2.0 * std::numbers::pi * rng.uniform01();
    p.translation = {t_mag * std::cos(angle), t_mag * std::sin(angle)};
    // cos/sin can push |t| one ulp past the bound.
    if (norm(p.translation) > bounds.translation) {
        const double shrink = bounds.translation / norm(p.translation);
        p.translation = shrink * p.translation;
    }
    return p;
}

AffineTransform build_affine(const PerturbationParams& params)
{
    if (params.is_identity()) {
        return AffineTransform::identity();
    }
    const double c = params.scale * std::cos(params.rotation);
    const double s = params.scale * std::sin(params.rotation);
    const Point q = params.pivot;
    AffineTransform a;
    a.m = {{{c, -s, q.x - (c * q.x - s * q.y) + params.translation.x},
            {s, c, q.y - (s * q.x + c * q.y) + params.translation.y}}};
    return a;
}

std::vector<Point> transform_landmarks(std::span<const Point> points, const AffineTransform& a)
{
    std::vector<Point> out;
    out.reserve(points.size());
    for (const Point& p : points) {
        out.push_back(a.apply(p));
    }
    return out;
}

double sample_bilinear(const FrameF& img, double x, double y, int channel)
{
    const double fx0 = std::floor(x);
    const double fy0 = std::floor(y);
    const double fx = x - fx0;
    const double fy = y - fy0;
    const int w = img.width();
    const int h = img.height();
    // Clamp in floating point first so far-away samples cannot overflow int.
    const int x0 = static_cast<int>(std::clamp(fx0, 0.0, double(w - 1)));
    const int y0 = static_cast<int>(std::clamp(fy0, 0.0, double(h - 1)));
    const int x1 = static_cast<int>(std::clamp(fx0 + 1.0, 0.0, double(w - 1)));
    const int y1 = static_cast<int>(std::clamp(fy0 + 1.0, 0.0, double(h - 1)));

    if (fx == 0.0 && fy == 0.0) {
        return img.at(x0, y0, channel);
    }
    const double top = (1.0 - fx) * img.at(x0, y0, channel) + fx * img.at(x1, y0, channel);
    const double bottom = (1.0 - fx) * img.at(x0, y1, channel) + fx * img.at(x1, y1, channel);
    return (1.0 - fy) * top + fy * bottom;
}

FrameF warp_image_continuous(const FrameF& img, const AffineTransform& a)
{
    if (img.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot warp an empty frame");
    }
    const AffineTransform inv = a.inverse();
    FrameF out(img.width(), img.height(), img.channels());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const Point src = inv.apply({x + 0.5, y + 0.5});
            for (int c = 0; c < img.channels(); ++c) {
                out.at(x, y, c) = sample_bilinear(img, src.x - 0.5, src.y - 0.5, c);
            }
        }
    }
    return out;
}

Frame warp_image(const Frame& img, const AffineTransform& a)
{
    return quantize(warp_image_continuous(to_continuous(img), a));
}

} // namespace vbsynth
