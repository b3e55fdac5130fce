#include "vbsynth/blending.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vbsynth/error.hpp"

namespace vbsynth {

std::string_view strategy_name(Strategy s)
{
    switch (s) {
    case Strategy::VB: return "vb";
    case Strategy::CBI: return "cbi";
    case Strategy::PFIG: return "pfig";
    }
    return "unknown";
}

std::string_view warp_mode_name(WarpMode m)
{
    return m == WarpMode::Shared ? "shared" : "per-region";
}

void BlendWeights::validate() const
{
    double sum = 0.0;
    for (double a : alpha) {
        if (!std::isfinite(a) || a < 0.0) {
            throw Error(ErrorCode::InvalidWeights, "blend weights must be non-negative");
        }
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidWeights, "blend weights must sum to 1");
    }
}

PerturbationBounds SynthesisConfig::bounds_for(const LandmarkSet& lm) const
{
    PerturbationBounds b;
    b.rotation = max_rotation;
    b.scale = max_scale;
    b.translation = max_translation.value_or(kTranslationPerDiagonal * lm.bbox_diagonal());
    return b;
}

FalloffConfig SynthesisConfig::falloff_for(const LandmarkSet& lm) const
{
    FalloffConfig f;
    f.mode = distance_mode;
    const double fallback = kFalloffPerDiagonal * lm.bbox_diagonal();
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        f.fdist[i] = fdist[i].value_or(fallback);
    }
    return f;
}

void SynthesisConfig::validate() const
{
    try {
        PerturbationBounds b{max_rotation, max_scale, max_translation.value_or(0.0)};
        b.validate();
        weights.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::BadConfig, e.what());
    }
    for (const auto& f : fdist) {
        if (f && (!std::isfinite(*f) || *f <= 0.0)) {
            throw Error(ErrorCode::BadConfig, "fall-off distances must be positive and finite");
        }
    }
    if (smoothing_window < 1) {
        throw Error(ErrorCode::BadConfig, "smoothing_window must be >= 1");
    }
}

bool VbParams::is_identity() const
{
    return std::all_of(region.begin(), region.end(), [](const PerturbationParams& p) { return p.is_identity(); });
}

FrameF blend_region(const FrameF& base, const FrameF& warped, const Raster<double>& mask)
{
    if (!base.same_dims(warped) || base.channels() != warped.channels() || !base.same_dims(mask)) {
        throw Error(ErrorCode::DimensionMismatch, "blend_region: frame and mask dimensions differ");
    }
    FrameF out = base;
    const int ch = base.channels();
    for (int y = 0; y < base.height(); ++y) {
        for (int x = 0; x < base.width(); ++x) {
            const double m = mask.at(x, y);
            if (m == 0.0) {
                continue;
            }
            for (int c = 0; c < ch; ++c) {
                out.at(x, y, c) = m * warped.at(x, y, c) + (1.0 - m) * base.at(x, y, c);
            }
        }
    }
    return out;
}

FrameF blend_region(const Frame& base, const Frame& warped, const RegionMask& mask)
{
    return blend_region(to_continuous(base), to_continuous(warped), mask.weights);
}

FrameF composite(const RegionFrames& blended, const BlendWeights& weights)
{
    weights.validate();
    const FrameF& anchor = blended[0];
    for (const FrameF& f : blended) {
        if (!f.same_dims(anchor) || f.channels() != anchor.channels()) {
            throw Error(ErrorCode::DimensionMismatch, "composite: region frames differ in size");
        }
    }
    FrameF out = anchor;
    auto dst = out.data();
    for (std::size_t r = 1; r < kRegionCount; ++r) {
        const double a = weights.alpha[r];
        const auto src = blended[r].data();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] += a * (src[i] - anchor.data()[i]);
        }
    }
    return out;
}

VbParams sample_vb_params(const LandmarkSet& lm, const PerturbationBounds& bounds, WarpMode mode, Rng& rng)
{
    bounds.validate();
    VbParams params;
    params.mode = mode;
    if (mode == WarpMode::Shared) {
        params.region.fill(sample_perturbation(bounds, lm.organs_centroid(), rng));
        return params;
    }
    for (Region r : kRegions) {
        params.region[region_slot(r)] = sample_perturbation(bounds, lm.centroid(r), rng);
    }
    return params;
}

FrameF render_vb(const FrameF& img, const LandmarkSet& lm, const FalloffConfig& falloff,
                 const BlendWeights& weights, const VbParams& params)
{
    falloff.validate();
    weights.validate();

    std::optional<FrameF> shared_warp;
    RegionFrames blended;
    for (Region r : kRegions) {
        const std::size_t slot = region_slot(r);
        const RegionMask mask = region_mask(img.width(), img.height(), lm, r, falloff);
        const PerturbationParams& p = params.region[slot];
        if (p.is_identity()) {
            blended[slot] = img;
            continue;
        }
        if (params.mode == WarpMode::Shared) {
            if (!shared_warp) {
                shared_warp = warp_image_continuous(img, build_affine(p));
            }
            blended[slot] = blend_region(img, *shared_warp, mask.weights);
        } else {
            blended[slot] = blend_region(img, warp_image_continuous(img, build_affine(p)), mask.weights);
        }
    }
    return composite(blended, weights);
}

void check_landmarks_cover(const Frame& img, const LandmarkSet& lm)
{
    if (lm.fraction_inside(img.width(), img.height()) < 0.5) {
        throw Error(ErrorCode::BadLandmarks, "fewer than half of the landmarks lie inside the frame");
    }
}

SynthesizedFrame synthesize_frame_vb(const Frame& img, const LandmarkSet& lm, const SynthesisConfig& cfg, Rng& rng)
{
    check_landmarks_cover(img, lm);
    const VbParams params = sample_vb_params(lm, cfg.bounds_for(lm), cfg.warp_mode, rng);
    SynthesizedFrame out;
    out.frame = quantize(render_vb(to_continuous(img), lm, cfg.falloff_for(lm), cfg.weights, params));
    out.provenance.strategy = Strategy::VB;
    out.provenance.vb = params;
    return out;
}

namespace {

void check_donor(const Frame& img, const Frame& donor)
{
    if (!img.same_dims(donor) || img.channels() != donor.channels()) {
        throw Error(ErrorCode::DimensionMismatch, "donor frame dimensions differ from the target frame");
    }
}

} // namespace

Frame synthesize_frame_cbi(const Frame& img, const Frame& donor, const LandmarkSet& lm, const SynthesisConfig& cfg)
{
    check_donor(img, donor);
    check_landmarks_cover(img, lm);
    const FalloffConfig falloff = cfg.falloff_for(lm);
    falloff.validate();
    const Raster<double> mask =
        point_set_mask(img.width(), img.height(), lm.points(), falloff.max(), falloff.mode);
    return quantize(blend_region(to_continuous(img), to_continuous(donor), mask));
}

Frame blend_donor_region(const Frame& img, const Frame& donor, const LandmarkSet& lm, const SynthesisConfig& cfg,
                         Region r)
{
    check_donor(img, donor);
    check_landmarks_cover(img, lm);
    const FalloffConfig falloff = cfg.falloff_for(lm);
    falloff.validate();
    const RegionMask mask = region_mask(img.width(), img.height(), lm, r, falloff);
    return quantize(blend_region(to_continuous(img), to_continuous(donor), mask.weights));
}

SynthesizedFrame synthesize_frame_pfig(const Frame& img, const Frame& donor, const LandmarkSet& lm,
                                       const SynthesisConfig& cfg, Rng& rng, std::optional<Region> forced)
{
    const Region r = forced.value_or(kRegions[rng.uniform_int(kRegionCount)]);
    SynthesizedFrame out;
    out.frame = blend_donor_region(img, donor, lm, cfg, r);
    out.provenance.strategy = Strategy::PFIG;
    out.provenance.region = r;
    return out;
}

} // namespace vbsynth
