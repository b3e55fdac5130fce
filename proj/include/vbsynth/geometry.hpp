#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "vbsynth/image.hpp"
#include "vbsynth/rng.hpp"

namespace vbsynth {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
double norm(Point p);

enum class Region { Eyes, Eyebrows, Nose, Mouth };

inline constexpr std::size_t kRegionCount = 4;
inline constexpr std::array<Region, kRegionCount> kRegions = {
    Region::Eyes, Region::Eyebrows, Region::Nose, Region::Mouth};

std::string_view region_name(Region r);
/// Inverse of region_name; throws BadConfig on an unknown name.
Region region_from_name(std::string_view name);
constexpr std::size_t region_slot(Region r) { return static_cast<std::size_t>(r); }

/// Half-open index range [first, last) into a landmark set.
struct IndexRange {
    std::size_t first;
    std::size_t last;
    std::size_t size() const { return last - first; }
};

/// 68-point landmark set in the iBUG layout. Points may lie outside the frame.
class LandmarkSet {
public:
    static constexpr std::size_t kPointCount = 68;

    LandmarkSet() = default;
    /// Throws BadLandmarks unless exactly 68 finite points are given.
    explicit LandmarkSet(std::vector<Point> points);

    static IndexRange region_range(Region r);

    std::span<const Point> points() const noexcept { return points_; }
    std::span<const Point> region(Region r) const;
    /// Union of the four organ regions (indices 17..67), the set the shared warp moves.
    std::span<const Point> organs() const;

    Point centroid(Region r) const;
    Point organs_centroid() const;
    /// Diagonal length of the axis-aligned bounding box of all 68 points.
    double bbox_diagonal() const;
    /// Fraction of points inside [0, width) x [0, height).
    double fraction_inside(int width, int height) const;

    friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

private:
    std::vector<Point> points_;
};

Point centroid(std::span<const Point> points);

/// Upper bounds for the perturbation magnitudes.
struct PerturbationBounds {
    double rotation = 0.0;    ///< radians
    double scale = 0.0;       ///< |scale - 1| bound, must stay < 1
    double translation = 0.0; ///< pixels

    /// Throws InvalidArgument if any bound is negative, non-finite, or scale >= 1.
    void validate() const;
    bool is_zero() const { return rotation == 0.0 && scale == 0.0 && translation == 0.0; }
};

struct PerturbationParams {
    double rotation = 0.0;
    double scale = 1.0;
    Point translation{};
    Point pivot{};

    bool is_identity() const
    {
        return rotation == 0.0 && scale == 1.0 && translation.x == 0.0 && translation.y == 0.0;
    }
    bool within(const PerturbationBounds& b) const;

    friend bool operator==(const PerturbationParams&, const PerturbationParams&) = default;
};

/// 2x3 affine map: p' = L p + t with L = m[.][0..1], t = m[.][2].
struct AffineTransform {
    std::array<std::array<double, 3>, 2> m{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};

    static AffineTransform identity() { return {}; }

    Point apply(Point p) const
    {
        return {m[0][0] * p.x + m[0][1] * p.y + m[0][2], m[1][0] * p.x + m[1][1] * p.y + m[1][2]};
    }
    double determinant() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
    /// Throws DegenerateTransform when the linear part is singular.
    AffineTransform inverse() const;

    friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

/// Magnitudes ~ U[0, bound]; rotation and scale signs uniform in {-1, +1};
/// translation direction ~ U[0, 2pi). Draw order: rotation magnitude,
/// rotation sign, scale magnitude, scale sign, translation magnitude,
/// translation angle.
PerturbationParams sample_perturbation(const PerturbationBounds& bounds, Point pivot, Rng& rng);

/// Rotate by `rotation` and scale by `scale` about `pivot`, then translate.
AffineTransform build_affine(const PerturbationParams& params);

std::vector<Point> transform_landmarks(std::span<const Point> points, const AffineTransform& a);

/// Backward-mapped bilinear warp with clamp-to-edge sampling. Pixel (x, y)
/// has its center at (x + 0.5, y + 0.5) in landmark coordinates.
FrameF warp_image_continuous(const FrameF& img, const AffineTransform& a);
Frame warp_image(const Frame& img, const AffineTransform& a);

/// Bilinear sample at continuous raster coordinates (pixel centers on integers), clamped to edge.
double sample_bilinear(const FrameF& img, double x, double y, int channel);

} // namespace vbsynth
