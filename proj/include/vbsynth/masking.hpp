#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "vbsynth/geometry.hpp"
#include "vbsynth/image.hpp"

namespace vbsynth {

/// min(max(x, lo), hi). Throws InvalidArgument when lo > hi.
double clip(double x, double lo, double hi);

/// Convex hull of a point cloud, counter-clockwise in a y-up frame.
class ConvexHull {
public:
    /// Throws DegenerateRegion unless the points span a non-zero area.
    explicit ConvexHull(std::span<const Point> points);

    std::span<const Point> vertices() const noexcept { return vertices_; }
    bool contains(Point p) const;
    /// Distance to the hull boundary: negative inside, positive outside, 0 on it.
    double signed_distance(Point p) const;

private:
    std::vector<Point> vertices_;
};

double signed_distance(Point p, std::span<const Point> region_points);

enum class DistanceMode {
    Hull,     ///< signed distance to the convex hull boundary
    PointSet, ///< unsigned distance to the nearest landmark
};

/// Per-region fall-off distances in pixels.
struct FalloffConfig {
    std::array<double, kRegionCount> fdist{};
    DistanceMode mode = DistanceMode::Hull;

    static FalloffConfig uniform(double fdist, DistanceMode mode = DistanceMode::Hull);
    double of(Region r) const { return fdist[region_slot(r)]; }
    double max() const;
    /// Throws InvalidArgument unless every fdist is positive and finite.
    void validate() const;
};

struct RegionMask {
    Raster<double> weights; ///< single channel, values in [0, 1]
    Region region = Region::Eyes;
};

/// Linear falloff: 1 inside the hull, 0 beyond fdist.
inline double falloff_weight(double distance, double fdist)
{
    return 1.0 - clip(distance / fdist, 0.0, 1.0);
}

/// Mask of an arbitrary point set (used for the whole-face hull as well).
Raster<double> point_set_mask(int width, int height, std::span<const Point> points, double fdist,
                              DistanceMode mode);

RegionMask region_mask(int width, int height, const LandmarkSet& lm, Region r, const FalloffConfig& cfg);

/// 8-bit grayscale rendering, value = round(255 * weight).
Raster<std::uint8_t> mask_to_gray(const Raster<double>& weights);

} // namespace vbsynth
