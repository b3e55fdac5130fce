#include "vbsynth/sta/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vbsynth/error.hpp"

namespace vbsynth::sta {

void StAConfig::validate() const
{
    if (channels < 1 || down_ratio < 1 || channels % down_ratio != 0) {
        throw Error(ErrorCode::InvalidArgument, "down_ratio must divide the channel count");
    }
    if (heads < 1 || reduced() % heads != 0) {
        throw Error(ErrorCode::InvalidArgument, "heads must divide the reduced channel count");
    }
    if (scales.empty()) {
        throw Error(ErrorCode::InvalidArgument, "at least one kernel scale is required");
    }
    for (int n : scales) {
        if (n < 1 || n % 2 == 0) {
            throw Error(ErrorCode::InvalidArgument, "kernel scales must be odd and positive");
        }
    }
}

std::size_t StAWeights::enumerate_parameters() const
{
    std::size_t n = down.data().size() + up.data().size();
    for (const auto& k : spatial) {
        n += k.parameter_count();
    }
    for (const auto& k : temporal) {
        n += k.parameter_count();
    }
    n += attention.query.data().size() + attention.key.data().size() + attention.value.data().size() +
         attention.output.data().size();
    return n;
}

namespace {

void fill_uniform(std::span<double> values, double bound, Rng& rng)
{
    for (double& v : values) {
        v = rng.uniform(-bound, bound);
    }
}

void init_kernel(DepthwiseKernel3D& k, Rng& rng)
{
    const double bound = 1.0 / std::sqrt(static_cast<double>(k.taps()));
    fill_uniform(k.coeff, bound, rng);
    fill_uniform(k.bias, bound, rng);
}

FeatureTensor sum_of_convs(const FeatureTensor& x, const std::vector<DepthwiseKernel3D>& kernels, Padding padding)
{
    if (kernels.empty()) {
        throw Error(ErrorCode::InvalidArgument, "branch has no kernels");
    }
    FeatureTensor acc = depthwise_conv3d(x, kernels.front(), padding);
    for (std::size_t i = 1; i < kernels.size(); ++i) {
        acc = add(acc, depthwise_conv3d(x, kernels[i], padding));
    }
    return acc;
}

} // namespace

StAWeights init_weights(const StAConfig& cfg, Rng& rng)
{
    cfg.validate();
    const int c = cfg.channels;
    const int r = cfg.reduced();
    StAWeights w;
    w.down = Matrix(c, r);
    w.up = Matrix(r, c);
    fill_uniform(w.down.data(), 1.0 / std::sqrt(double(c)), rng);
    fill_uniform(w.up.data(), 1.0 / std::sqrt(double(r)), rng);

    for (int n : cfg.scales) {
        DepthwiseKernel3D k(r, 1, n, n, true);
        init_kernel(k, rng);
        w.spatial.push_back(std::move(k));
    }
    for (int n : cfg.scales) {
        DepthwiseKernel3D k(r, n, 1, 1, true);
        init_kernel(k, rng);
        w.temporal.push_back(std::move(k));
    }

    w.attention = AttentionParams(cfg.heads, r);
    for (Matrix* m : {&w.attention.query, &w.attention.key, &w.attention.value, &w.attention.output}) {
        fill_uniform(m->data(), 1.0 / std::sqrt(double(r)), rng);
    }

    if (cfg.zero_init_up) {
        std::fill(w.up.data().begin(), w.up.data().end(), 0.0);
    }
    if (cfg.zero_sum_temporal) {
        make_temporal_zero_sum(w);
    }
    return w;
}

void make_temporal_zero_sum(StAWeights& w)
{
    for (DepthwiseKernel3D& k : w.temporal) {
        const std::size_t taps = k.taps();
        for (int c = 0; c < k.channels; ++c) {
            const auto first = k.coeff.begin() + static_cast<std::ptrdiff_t>(c * taps);
            double mean = 0.0;
            for (auto it = first; it != first + static_cast<std::ptrdiff_t>(taps); ++it) {
                mean += *it;
            }
            mean /= static_cast<double>(taps);
            for (auto it = first; it != first + static_cast<std::ptrdiff_t>(taps); ++it) {
                *it -= mean;
            }
        }
        std::fill(k.bias.begin(), k.bias.end(), 0.0);
    }
}

FeatureTensor spatial_branch(const FeatureTensor& x_down, const StAWeights& w, Padding padding)
{
    return sum_of_convs(x_down, w.spatial, padding);
}

FeatureTensor temporal_branch(const FeatureTensor& x_down, const StAWeights& w, Padding padding)
{
    return sum_of_convs(x_down, w.temporal, padding);
}

std::pair<FeatureTensor, FeatureTensor> cross_fuse(const FeatureTensor& e_s, const FeatureTensor& e_t,
                                                   const AttentionParams& attention)
{
    if (!(e_s.dims() == e_t.dims())) {
        throw Error(ErrorCode::DimensionMismatch, "cross_fuse: branch outputs differ in shape");
    }
    const Matrix p_s = flatten_positions(e_s);
    const Matrix p_t = flatten_positions(e_t);
    FeatureTensor s2t = unflatten_positions(multi_head_attention(p_t, p_s, p_s, attention), e_s.dims());
    FeatureTensor t2s = unflatten_positions(multi_head_attention(p_s, p_t, p_t, attention), e_s.dims());
    return {std::move(s2t), std::move(t2s)};
}

StAOutputBundle adapter_forward(const FeatureTensor& x_in, const StAWeights& w, const StAConfig& cfg, bool keep_taps)
{
    cfg.validate();
    if (x_in.dims().c != cfg.channels) {
        throw Error(ErrorCode::DimensionMismatch, "adapter input channels differ from the configured width");
    }
    const FeatureTensor x_down = pointwise_project(x_in, w.down);
    FeatureTensor e_s = spatial_branch(x_down, w, cfg.padding);
    FeatureTensor e_t = temporal_branch(x_down, w, cfg.padding);
    auto [s2t, t2s] = cross_fuse(e_s, e_t, w.attention);

    const FeatureTensor fused = scale(add(s2t, t2s), 0.5);
    FeatureTensor update = pointwise_project(fused, w.up);

    StAOutputBundle out;
    out.x_out = cfg.residual ? add(x_in, update) : std::move(update);
    if (keep_taps) {
        out.taps = StATaps{std::move(e_s), std::move(e_t), std::move(s2t), std::move(t2s)};
    }
    return out;
}

std::size_t param_count(const StAConfig& cfg)
{
    cfg.validate();
    const std::size_t c = static_cast<std::size_t>(cfg.channels);
    const std::size_t r = static_cast<std::size_t>(cfg.reduced());
    std::size_t n = 2 * c * r;
    for (int k : cfg.scales) {
        const std::size_t s = static_cast<std::size_t>(k);
        n += r * (s * s + s + 2);
    }
    return n + 4 * r * r;
}

FeatureTensor repeat_frame(const FeatureTensor& slice, int frames)
{
    const Dims d = slice.dims();
    if (d.t != 1 || frames < 1) {
        throw Error(ErrorCode::InvalidArgument, "repeat_frame expects a single-frame slice and frames >= 1");
    }
    FeatureTensor out({frames, d.h, d.w, d.c});
    for (int c = 0; c < d.c; ++c) {
        for (int t = 0; t < frames; ++t) {
            for (int h = 0; h < d.h; ++h) {
                for (int w = 0; w < d.w; ++w) {
                    out.at(t, h, w, c) = slice.at(0, h, w, c);
                }
            }
        }
    }
    return out;
}

double max_time_variation(const FeatureTensor& x)
{
    const Dims d = x.dims();
    double m = 0.0;
    for (int c = 0; c < d.c; ++c) {
        for (int t = 1; t < d.t; ++t) {
            for (int h = 0; h < d.h; ++h) {
                for (int w = 0; w < d.w; ++w) {
                    m = std::max(m, std::abs(x.at(t, h, w, c) - x.at(0, h, w, c)));
                }
            }
        }
    }
    return m;
}

double max_abs(const FeatureTensor& x)
{
    double m = 0.0;
    for (double v : x.data()) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

ProbeReport probe_constant_video(const StAWeights& w, const StAConfig& cfg, const FeatureTensor& base_slice, int frames)
{
    const FeatureTensor clip = repeat_frame(base_slice, frames);
    const StAOutputBundle out = adapter_forward(clip, w, cfg, true);
    ProbeReport r;
    r.e_s_time_variation = max_time_variation(out.taps->e_s);
    r.e_t_max_abs = max_abs(out.taps->e_t);
    r.e_t_time_variation = max_time_variation(out.taps->e_t);
    r.zero_sum_temporal = cfg.zero_sum_temporal;
    r.spatial_constant = r.e_s_time_variation <= ProbeReport::kTolerance;
    r.temporal_zero = r.e_t_max_abs <= ProbeReport::kTolerance;
    if (r.temporal_zero) {
        r.note = "temporal branch output vanishes on the constant clip";
    } else if (cfg.zero_sum_temporal) {
        r.note = cfg.padding == Padding::Zero
                     ? "temporal branch output is nonzero at the clip ends: zero padding breaks the zero-sum cancellation"
                     : "temporal branch output is nonzero despite zero-sum temporal kernels";
    } else if (r.e_t_time_variation > ProbeReport::kTolerance) {
        r.note = "temporal branch output is nonzero and varies in time near the clip ends";
    } else {
        r.note = "temporal branch output is constant in time but nonzero: it vanishes on constant "
                 "clips only when temporal kernels are zero-sum and bias-free";
    }
    return r;
}

FeatureTensor reference_forward(const FeatureTensor& x_in, const StAWeights& w, const StAConfig& cfg)
{
    cfg.validate();
    const Dims d = x_in.dims();
    const int T = d.t, H = d.h, W = d.w, C = d.c, R = cfg.reduced();
    const int L = T * H * W;
    const bool rep = cfg.padding == Padding::Replicate;
    auto pos = [&](int t, int h, int x) { return (t * H + h) * W + x; };

    // [position][channel] arrays throughout.
    std::vector<double> down(static_cast<std::size_t>(L) * R, 0.0);
    for (int t = 0; t < T; ++t)
        for (int h = 0; h < H; ++h)
            for (int x = 0; x < W; ++x)
                for (int r = 0; r < R; ++r) {
                    double acc = 0.0;
                    for (int c = 0; c < C; ++c) {
                        acc += x_in.at(t, h, x, c) * w.down(c, r);
                    }
                    down[static_cast<std::size_t>(pos(t, h, x)) * R + r] = acc;
                }

    auto tap = [&](int t, int h, int x, int r) -> double {
        if (t < 0 || t >= T || h < 0 || h >= H || x < 0 || x >= W) {
            if (!rep) {
                return 0.0;
            }
            t = std::clamp(t, 0, T - 1);
            h = std::clamp(h, 0, H - 1);
            x = std::clamp(x, 0, W - 1);
        }
        return down[static_cast<std::size_t>(pos(t, h, x)) * R + r];
    };
    auto branch = [&](const std::vector<DepthwiseKernel3D>& kernels) {
        std::vector<double> e(static_cast<std::size_t>(L) * R, 0.0);
        for (const DepthwiseKernel3D& k : kernels)
            for (int t = 0; t < T; ++t)
                for (int h = 0; h < H; ++h)
                    for (int x = 0; x < W; ++x)
                        for (int r = 0; r < R; ++r) {
                            double acc = 0.0;
                            for (int a = 0; a < k.kt; ++a)
                                for (int b = 0; b < k.kh; ++b)
                                    for (int g = 0; g < k.kw; ++g) {
                                        acc += k.at(r, a, b, g) *
                                               tap(t + a - k.kt / 2, h + b - k.kh / 2, x + g - k.kw / 2, r);
                                    }
                            if (!k.bias.empty()) {
                                acc += k.bias[r];
                            }
                            e[static_cast<std::size_t>(pos(t, h, x)) * R + r] += acc;
                        }
        return e;
    };
    const std::vector<double> es = branch(w.spatial);
    const std::vector<double> et = branch(w.temporal);

    const AttentionParams& A = w.attention;
    const int hd = R / A.heads;
    auto project = [&](const std::vector<double>& in, const Matrix& m) {
        std::vector<double> out(static_cast<std::size_t>(L) * R, 0.0);
        for (int i = 0; i < L; ++i)
            for (int o = 0; o < R; ++o) {
                double acc = 0.0;
                for (int c = 0; c < R; ++c) {
                    acc += in[static_cast<std::size_t>(i) * R + c] * m(c, o);
                }
                out[static_cast<std::size_t>(i) * R + o] = acc;
            }
        return out;
    };
    auto attend = [&](const std::vector<double>& qs, const std::vector<double>& kvs) {
        const std::vector<double> q = project(qs, A.query);
        const std::vector<double> k = project(kvs, A.key);
        const std::vector<double> v = project(kvs, A.value);
        std::vector<double> heads(static_cast<std::size_t>(L) * R, 0.0);
        std::vector<double> p(L);
        for (int h = 0; h < A.heads; ++h)
            for (int i = 0; i < L; ++i) {
                double top = -INFINITY;
                for (int j = 0; j < L; ++j) {
                    double s = 0.0;
                    for (int e = 0; e < hd; ++e) {
                        s += q[static_cast<std::size_t>(i) * R + h * hd + e] * k[static_cast<std::size_t>(j) * R + h * hd + e];
                    }
                    p[j] = s / std::sqrt(double(hd));
                    top = std::max(top, p[j]);
                }
                double z = 0.0;
                for (int j = 0; j < L; ++j) {
                    p[j] = std::exp(p[j] - top);
                    z += p[j];
                }
                for (int e = 0; e < hd; ++e) {
                    double acc = 0.0;
                    for (int j = 0; j < L; ++j) {
                        acc += p[j] / z * v[static_cast<std::size_t>(j) * R + h * hd + e];
                    }
                    heads[static_cast<std::size_t>(i) * R + h * hd + e] = acc;
                }
            }
        return project(heads, A.output);
    };
    const std::vector<double> s2t = attend(et, es);
    const std::vector<double> t2s = attend(es, et);

    FeatureTensor out(d);
    for (int t = 0; t < T; ++t)
        for (int h = 0; h < H; ++h)
            for (int x = 0; x < W; ++x)
                for (int c = 0; c < C; ++c) {
                    const std::size_t row = static_cast<std::size_t>(pos(t, h, x)) * R;
                    double acc = 0.0;
                    for (int r = 0; r < R; ++r) {
                        acc += 0.5 * (s2t[row + r] + t2s[row + r]) * w.up(r, c);
                    }
                    out.at(t, h, x, c) = (cfg.residual ? x_in.at(t, h, x, c) : 0.0) + acc;
                }
    return out;
}

} // namespace vbsynth::sta
