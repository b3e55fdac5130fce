#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbsynth/rng.hpp"
#include "vbsynth/sta/attention.hpp"
#include "vbsynth/sta/tensor.hpp"

namespace vbsynth::sta {

struct StAConfig {
    int channels = 64;
    int down_ratio = 4;
    std::vector<int> scales{3, 5, 7};
    int heads = 8;
    bool zero_init_up = true;
    bool zero_sum_temporal = false;
    bool residual = true;
    Padding padding = Padding::Replicate;

    int reduced() const { return channels / down_ratio; }
    /// Throws InvalidArgument: down_ratio must divide channels, heads must
    /// divide the reduced width, scales must be odd and non-empty.
    void validate() const;
};

struct StAWeights {
    Matrix down; ///< C x C'
    Matrix up;   ///< C' x C
    std::vector<DepthwiseKernel3D> spatial;  ///< (1, N, N) per scale
    std::vector<DepthwiseKernel3D> temporal; ///< (N, 1, 1) per scale
    AttentionParams attention;               ///< shared by both directions

    /// Counts every stored coefficient.
    std::size_t enumerate_parameters() const;
};

struct StATaps {
    FeatureTensor e_s;
    FeatureTensor e_t;
    FeatureTensor s2t;
    FeatureTensor t2s;
};

struct StAOutputBundle {
    FeatureTensor x_out;
    std::optional<StATaps> taps;
};

/// Projections and kernels ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)). fan_in is
/// the row count for projections and the tap count for kernels. Draw order:
/// down, up, spatial kernels (then biases) per scale, temporal likewise,
/// then attention query, key, value, output.
StAWeights init_weights(const StAConfig& cfg, Rng& rng);

/// Subtract each channel's mean from the temporal coefficients and zero the biases.
void make_temporal_zero_sum(StAWeights& w);

/// Sum over scales of the (1, N, N) depthwise convolutions.
FeatureTensor spatial_branch(const FeatureTensor& x_down, const StAWeights& w, Padding padding = Padding::Replicate);
/// Sum over scales of the (N, 1, 1) depthwise convolutions.
FeatureTensor temporal_branch(const FeatureTensor& x_down, const StAWeights& w, Padding padding = Padding::Replicate);

/// S2T = MHA(p_t, p_s, p_s), T2S = MHA(p_s, p_t, p_t), reshaped back to tensor dims.
std::pair<FeatureTensor, FeatureTensor> cross_fuse(const FeatureTensor& e_s, const FeatureTensor& e_t,
                                                   const AttentionParams& attention);

/// x_out = [x_in +] 0.5 * (S2T + T2S) * W_up.
StAOutputBundle adapter_forward(const FeatureTensor& x_in, const StAWeights& w, const StAConfig& cfg,
                                bool keep_taps = false);

/// Closed form: 2 C C' + sum_N C' (N^2 + N + 2) + 4 C'^2.
std::size_t param_count(const StAConfig& cfg);

/// Repeat a single (1, H, W, C) slice `frames` times along T.
FeatureTensor repeat_frame(const FeatureTensor& slice, int frames);

/// Largest |x[t] - x[0]| over all t, positions and channels.
double max_time_variation(const FeatureTensor& x);
double max_abs(const FeatureTensor& x);

struct ProbeReport {
    double e_s_time_variation = 0.0;
    double e_t_max_abs = 0.0;
    double e_t_time_variation = 0.0;
    bool zero_sum_temporal = false;
    bool spatial_constant = false; ///< e_s_time_variation <= tolerance
    bool temporal_zero = false;    ///< e_t_max_abs <= tolerance
    std::string note;

    static constexpr double kTolerance = 1e-9;
};

/// Feed a clip made by repeating `base_slice` and measure the two branches.
ProbeReport probe_constant_video(const StAWeights& w, const StAConfig& cfg, const FeatureTensor& base_slice,
                                 int frames);

/// Straight-line loop implementation of adapter_forward that shares no
/// helpers with it, used for runtime cross-checks.
FeatureTensor reference_forward(const FeatureTensor& x_in, const StAWeights& w, const StAConfig& cfg);

} // namespace vbsynth::sta
