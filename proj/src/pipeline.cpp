#include "vbsynth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>

#include "vbsynth/digest.hpp"
#include "vbsynth/error.hpp"

namespace vbsynth {

void Clip::validate() const
{
    if (frames.empty()) {
        throw Error(ErrorCode::InvalidArgument, "clip has no frames");
    }
    if (landmarks.size() != frames.size() || source_indices.size() != frames.size()) {
        throw Error(ErrorCode::CountMismatch, "clip frames, landmarks and source indices differ in length");
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].empty() || frames[i].channels() != 3 || !frames[i].same_dims(frames[0])) {
            throw Error(ErrorCode::DimensionMismatch, "clip frames must be non-empty RGB of equal size");
        }
        if (i > 0 && source_indices[i] <= source_indices[i - 1]) {
            throw Error(ErrorCode::InvalidArgument, "clip source indices must be strictly increasing");
        }
    }
}

void ClipSamplingPolicy::validate() const
{
    if (clip_len < 1 || clip_len > uniform_count) {
        throw Error(ErrorCode::InvalidArgument, "clip sampling requires 1 <= clip_len <= uniform_count");
    }
}

std::vector<std::size_t> sample_clip(std::size_t total_frames, const ClipSamplingPolicy& policy, Rng& rng)
{
    policy.validate();
    if (total_frames < policy.uniform_count) {
        throw Error(ErrorCode::InvalidArgument, "video has " + std::to_string(total_frames) +
                                                    " frames, fewer than the " +
                                                    std::to_string(policy.uniform_count) + " to sample");
    }
    const std::size_t start = rng.uniform_int(policy.uniform_count - policy.clip_len + 1);
    std::vector<std::size_t> out;
    out.reserve(policy.clip_len);
    for (std::size_t k = start; k < start + policy.clip_len; ++k) {
        out.push_back(k * total_frames / policy.uniform_count);
    }
    return out;
}

std::uint64_t derive_frame_seed(std::uint64_t master_seed, std::uint64_t frame_index)
{
    return splitmix64(splitmix64(master_seed) ^ (frame_index * 0x9E3779B97F4A7C15ull));
}

bool DriftReport::is_zero() const
{
    return mean == 0.0 && max == 0.0 &&
           std::all_of(pairs.begin(), pairs.end(), [](const PairDrift& p) { return p.mean == 0.0; });
}

std::vector<VbParams> smooth_params(std::span<const VbParams> raw, int window)
{
    std::vector<VbParams> out(raw.begin(), raw.end());
    if (window <= 1 || raw.size() < 2) {
        return out;
    }
    const std::ptrdiff_t half = window / 2;
    const auto n = static_cast<std::ptrdiff_t>(raw.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
        const double count = static_cast<double>(hi - lo + 1);
        for (std::size_t r = 0; r < kRegionCount; ++r) {
            double rot = 0.0;
            double scale = 0.0;
            Point t{};
            for (std::ptrdiff_t j = lo; j <= hi; ++j) {
                const PerturbationParams& p = raw[j].region[r];
                rot += p.rotation;
                scale += p.scale;
                t = t + p.translation;
            }
            PerturbationParams& dst = out[i].region[r];
            dst.rotation = rot / count;
            dst.scale = scale / count;
            dst.translation = (1.0 / count) * t;
        }
    }
    return out;
}

namespace {

struct FramePlan {
    std::optional<VbParams> vb;
    std::size_t donor = 0;
    std::optional<Region> region;
};

std::size_t pick_donor(std::size_t self, std::size_t n, Rng& rng)
{
    const std::size_t j = rng.uniform_int(n - 1);
    return j >= self ? j + 1 : j;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                fn(i);
            }
        });
    }
}

} // namespace

ClipResult synthesize_clip(const Clip& clip, const SynthesisConfig& cfg, std::uint64_t master_seed,
                           ExecutionOptions exec)
{
    clip.validate();
    cfg.validate();
    const std::size_t n = clip.size();
    if (cfg.strategy != Strategy::VB && n < 2) {
        throw Error(ErrorCode::NoDonor, std::string(strategy_name(cfg.strategy)) +
                                            " needs at least two frames to pick a donor");
    }

    // Sampling is cheap and serial; rendering below is the parallel part.
    std::vector<FramePlan> plan(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_frame_seed(master_seed, i));
        const LandmarkSet& lm = clip.landmarks[i];
        try {
            switch (cfg.strategy) {
            case Strategy::VB:
                plan[i].vb = sample_vb_params(lm, cfg.bounds_for(lm), cfg.warp_mode, rng);
                break;
            case Strategy::CBI:
                plan[i].donor = pick_donor(i, n, rng);
                break;
            case Strategy::PFIG:
                plan[i].donor = pick_donor(i, n, rng);
                plan[i].region = kRegions[rng.uniform_int(kRegionCount)];
                break;
            }
        } catch (const Error& e) {
            throw SynthesisError(i, e.code(), e.what());
        }
    }
    if (cfg.strategy == Strategy::VB && cfg.smoothing_window > 1) {
        std::vector<VbParams> raw;
        raw.reserve(n);
        for (const FramePlan& p : plan) {
            raw.push_back(*p.vb);
        }
        const std::vector<VbParams> smoothed = smooth_params(raw, cfg.smoothing_window);
        for (std::size_t i = 0; i < n; ++i) {
            plan[i].vb = smoothed[i];
        }
    }

    ClipResult result;
    result.clip.frames.resize(n);
    result.clip.landmarks = clip.landmarks;
    result.clip.source_indices = clip.source_indices;
    result.manifest.seed = master_seed;
    result.manifest.config = cfg;
    result.manifest.frames.resize(n);
    std::vector<std::exception_ptr> failures(n);

    parallel_for(n, exec.threads, [&](std::size_t i) {
        try {
            const Frame& img = clip.frames[i];
            const LandmarkSet& lm = clip.landmarks[i];
            FrameRecord& rec = result.manifest.frames[i];
            rec.index = i;
            rec.source_index = clip.source_indices[i];
            rec.landmarks = lm;
            rec.provenance.strategy = cfg.strategy;
            Frame& out = result.clip.frames[i];
            switch (cfg.strategy) {
            case Strategy::VB:
                check_landmarks_cover(img, lm);
                out = quantize(render_vb(to_continuous(img), lm, cfg.falloff_for(lm), cfg.weights, *plan[i].vb));
                rec.provenance.vb = plan[i].vb;
                break;
            case Strategy::CBI:
                out = synthesize_frame_cbi(img, clip.frames[plan[i].donor], lm, cfg);
                rec.provenance.donor = plan[i].donor;
                break;
            case Strategy::PFIG:
                out = blend_donor_region(img, clip.frames[plan[i].donor], lm, cfg, *plan[i].region);
                rec.provenance.donor = plan[i].donor;
                rec.provenance.region = plan[i].region;
                break;
            }
            rec.digest = sha256_hex(out.data());
        } catch (...) {
            failures[i] = std::current_exception();
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (!failures[i]) {
            continue;
        }
        try {
            std::rethrow_exception(failures[i]);
        } catch (const Error& e) {
            throw SynthesisError(i, e.code(), e.what());
        } catch (const std::exception& e) {
            throw SynthesisError(i, ErrorCode::InvalidArgument, e.what());
        }
    }

    result.manifest.drift = drift_statistic(result.manifest);
    return result;
}

DriftReport drift_statistic(const SynthesisManifest& manifest, std::span<const LandmarkSet> landmarks)
{
    if (landmarks.size() != manifest.frames.size()) {
        throw Error(ErrorCode::CountMismatch, "drift: manifest and landmark frame counts differ");
    }
    const std::size_t n = manifest.frames.size();
    std::vector<VbParams> params(n);
    for (std::size_t i = 0; i < n; ++i) {
        const FrameProvenance& prov = manifest.frames[i].provenance;
        if (prov.vb) {
            params[i] = *prov.vb;
        } else if (prov.strategy == Strategy::VB) {
            throw Error(ErrorCode::InvalidArgument,
                        "drift: frame " + std::to_string(i) + " has no recorded warp parameters");
        }
    }

    DriftReport report;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const LandmarkSet& src = landmarks[t];
        PairDrift pair;
        pair.from = t;
        double total = 0.0;
        std::size_t count = 0;
        for (Region r : kRegions) {
            const AffineTransform a = build_affine(params[t].of(r));
            const AffineTransform b = build_affine(params[t + 1].of(r));
            double region_total = 0.0;
            for (const Point& p : src.region(r)) {
                const double d = norm(a.apply(p) - b.apply(p));
                region_total += d;
                report.max = std::max(report.max, d);
            }
            const std::size_t size = src.region(r).size();
            pair.region_mean[region_slot(r)] = region_total / static_cast<double>(size);
            total += region_total;
            count += size;
        }
        pair.mean = total / static_cast<double>(count);
        report.pairs.push_back(pair);
    }
    if (!report.pairs.empty()) {
        const double pairs = static_cast<double>(report.pairs.size());
        for (const PairDrift& p : report.pairs) {
            report.mean += p.mean;
            for (std::size_t r = 0; r < kRegionCount; ++r) {
                report.region_mean[r] += p.region_mean[r];
            }
        }
        report.mean /= pairs;
        for (double& m : report.region_mean) {
            m /= pairs;
        }
    }
    return report;
}

DriftReport drift_statistic(const SynthesisManifest& manifest)
{
    std::vector<LandmarkSet> landmarks;
    landmarks.reserve(manifest.frames.size());
    for (const FrameRecord& rec : manifest.frames) {
        landmarks.push_back(rec.landmarks);
    }
    return drift_statistic(manifest, landmarks);
}

} // namespace vbsynth
