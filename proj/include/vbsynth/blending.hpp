#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "vbsynth/geometry.hpp"
#include "vbsynth/image.hpp"
#include "vbsynth/masking.hpp"
#include "vbsynth/rng.hpp"

namespace vbsynth {

enum class Strategy { VB, CBI, PFIG };
enum class WarpMode { Shared, PerRegion };

std::string_view strategy_name(Strategy s);
std::string_view warp_mode_name(WarpMode m);

struct BlendWeights {
    std::array<double, kRegionCount> alpha{0.25, 0.25, 0.25, 0.25};

    double of(Region r) const { return alpha[region_slot(r)]; }
    /// Throws InvalidWeights unless all alpha >= 0 and they sum to 1 within 1e-9.
    void validate() const;
};

/// Clip-level synthesis settings. Unset translation bound and fall-off
/// distances resolve against each frame's face size.
struct SynthesisConfig {
    Strategy strategy = Strategy::VB;
    WarpMode warp_mode = WarpMode::PerRegion;

    double max_rotation = 0.035;
    double max_scale = 0.03;
    std::optional<double> max_translation; ///< default 0.02 x face bbox diagonal

    std::array<std::optional<double>, kRegionCount> fdist{}; ///< default 0.1 x face bbox diagonal
    DistanceMode distance_mode = DistanceMode::Hull;

    BlendWeights weights;
    /// Centered moving-average window over per-frame VB parameters; 1 disables.
    int smoothing_window = 1;

    static constexpr double kTranslationPerDiagonal = 0.02;
    static constexpr double kFalloffPerDiagonal = 0.1;

    PerturbationBounds bounds_for(const LandmarkSet& lm) const;
    FalloffConfig falloff_for(const LandmarkSet& lm) const;
    /// Throws BadConfig on any invalid field.
    void validate() const;
};

/// Sampled warp parameters for one frame. In shared mode all four entries
/// are the same transform about the organ centroid.
struct VbParams {
    WarpMode mode = WarpMode::PerRegion;
    std::array<PerturbationParams, kRegionCount> region{};

    const PerturbationParams& of(Region r) const { return region[region_slot(r)]; }
    bool is_identity() const;
};

struct FrameProvenance {
    Strategy strategy = Strategy::VB;
    std::optional<VbParams> vb;
    std::optional<std::size_t> donor;  ///< clip position of the donor frame
    std::optional<Region> region;      ///< PFIG's chosen region
};

struct SynthesizedFrame {
    Frame frame;
    FrameProvenance provenance;
};

/// I' = M * I_warp + (1 - M) * I, in continuous intensity.
FrameF blend_region(const FrameF& base, const FrameF& warped, const Raster<double>& mask);
FrameF blend_region(const Frame& base, const Frame& warped, const RegionMask& mask);

using RegionFrames = std::array<FrameF, kRegionCount>;

/// Sum_r alpha_r * I'_r. Evaluated as I'_0 + sum_r alpha_r (I'_r - I'_0), so
/// pixels where every I'_r agrees come through unchanged.
FrameF composite(const RegionFrames& blended, const BlendWeights& weights);

VbParams sample_vb_params(const LandmarkSet& lm, const PerturbationBounds& bounds, WarpMode mode, Rng& rng);

/// Warp, mask, blend and composite with fixed parameters; no quantization.
FrameF render_vb(const FrameF& img, const LandmarkSet& lm, const FalloffConfig& falloff,
                 const BlendWeights& weights, const VbParams& params);

/// Throws InvalidArgument when fewer than half the landmarks fall inside the frame.
void check_landmarks_cover(const Frame& img, const LandmarkSet& lm);

SynthesizedFrame synthesize_frame_vb(const Frame& img, const LandmarkSet& lm, const SynthesisConfig& cfg, Rng& rng);

/// Blend the donor's whole-face hull into img; no warping.
Frame synthesize_frame_cbi(const Frame& img, const Frame& donor, const LandmarkSet& lm, const SynthesisConfig& cfg);

/// Blend the donor's region `r` into img through that region's mask.
Frame blend_donor_region(const Frame& img, const Frame& donor, const LandmarkSet& lm, const SynthesisConfig& cfg,
                         Region r);

/// Blend one uniformly chosen (or forced) region of the donor into img.
SynthesizedFrame synthesize_frame_pfig(const Frame& img, const Frame& donor, const LandmarkSet& lm,
                                       const SynthesisConfig& cfg, Rng& rng,
                                       std::optional<Region> forced = std::nullopt);

} // namespace vbsynth
