#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vbsynth/blending.hpp"
#include "vbsynth/geometry.hpp"
#include "vbsynth/image.hpp"
#include "vbsynth/rng.hpp"

namespace vbsynth {

struct Clip {
    std::vector<Frame> frames;
    std::vector<LandmarkSet> landmarks;
    std::vector<std::size_t> source_indices;

    std::size_t size() const { return frames.size(); }
    /// Throws InvalidArgument on length mismatch, empty clip, unequal frame
    /// sizes or non-increasing source indices.
    void validate() const;
};

struct ClipSamplingPolicy {
    std::size_t uniform_count = 32;
    std::size_t clip_len = 8;

    void validate() const;
};

/// Evenly subsample `uniform_count` indices (index k -> floor(k * total / uniform_count)),
/// then pick a random window of `clip_len` consecutive members.
std::vector<std::size_t> sample_clip(std::size_t total_frames, const ClipSamplingPolicy& policy, Rng& rng);

/// splitmix64(splitmix64(master) ^ index * golden_gamma). Injective in the
/// index for a fixed master seed and in the master seed for a fixed index.
std::uint64_t derive_frame_seed(std::uint64_t master_seed, std::uint64_t frame_index);

struct PairDrift {
    std::size_t from = 0; ///< displacement between frame `from` and `from + 1`
    double mean = 0.0;
    std::array<double, kRegionCount> region_mean{};
};

struct DriftReport {
    std::vector<PairDrift> pairs;
    std::array<double, kRegionCount> region_mean{}; ///< averaged over pairs
    double mean = 0.0;                               ///< mean of pair means
    double max = 0.0;                                ///< largest single-landmark displacement

    bool is_zero() const;
};

struct FrameRecord {
    std::size_t index = 0;
    std::size_t source_index = 0;
    FrameProvenance provenance;
    std::string digest; ///< SHA-256 of raw RGB bytes, lowercase hex
    LandmarkSet landmarks;
};

struct SynthesisManifest {
    std::uint64_t seed = 0;
    SynthesisConfig config;
    std::vector<FrameRecord> frames;
    DriftReport drift;
};

struct ClipResult {
    Clip clip;
    SynthesisManifest manifest;
};

struct ExecutionOptions {
    unsigned threads = 1;
};

/// Run the configured strategy over every frame. Per-frame randomness comes
/// only from derive_frame_seed(master_seed, position), so the output does
/// not depend on the thread count. Failures abort the clip with a
/// SynthesisError naming the lowest failing frame.
ClipResult synthesize_clip(const Clip& clip, const SynthesisConfig& cfg, std::uint64_t master_seed,
                           ExecutionOptions exec = {});

/// Mean displacement between consecutive perturbed landmark sets. Both
/// frames' transforms are applied to the earlier frame's landmarks.
DriftReport drift_statistic(const SynthesisManifest& manifest, std::span<const LandmarkSet> landmarks);
DriftReport drift_statistic(const SynthesisManifest& manifest);

/// Centered moving average of rotation, scale and translation; pivots are kept.
std::vector<VbParams> smooth_params(std::span<const VbParams> raw, int window);

} // namespace vbsynth
