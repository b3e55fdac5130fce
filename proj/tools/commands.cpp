#include "commands.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vbsynth/error.hpp"
#include "vbsynth/io.hpp"
#include "vbsynth/masking.hpp"
#include "vbsynth/pipeline.hpp"
#include "vbsynth/sta/adapter.hpp"

namespace vbsynth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log_event(const json& event)
{
    std::cerr << event.dump() << "\n";
}

int fail(int code, const std::string& message)
{
    log_event({{"level", "error"}, {"message", message}});
    return code;
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
    std::string input;
    std::string landmarks;
    std::string out;
    std::uint64_t seed = 0;
    std::string config;
    std::string strategy;
    std::string warp_mode;
    unsigned threads = 1;
    bool dump_masks = false;
};

void dump_masks(const Clip& clip, const SynthesisConfig& cfg, const fs::path& dir)
{
    fs::create_directories(dir);
    for (std::size_t i = 0; i < clip.size(); ++i) {
        const LandmarkSet& lm = clip.landmarks[i];
        const FalloffConfig falloff = cfg.falloff_for(lm);
        for (Region r : kRegions) {
            const RegionMask m = region_mask(clip.frames[i].width(), clip.frames[i].height(), lm, r, falloff);
            char name[64];
            std::snprintf(name, sizeof name, "frame_%06zu_%s.png", i, std::string(region_name(r)).c_str());
            write_gray_png(dir / name, mask_to_gray(m.weights));
        }
    }
}

int cmd_synth(const SynthArgs& a)
{
    SynthesisConfig cfg;
    Clip clip;
    try {
        if (!a.config.empty()) {
            if (!fs::exists(a.config)) {
                return fail(kInputError, "config file not found: " + a.config);
            }
            cfg = read_config(a.config);
        }
        if (!a.strategy.empty()) {
            cfg.strategy = a.strategy == "vb" ? Strategy::VB : a.strategy == "cbi" ? Strategy::CBI : Strategy::PFIG;
        }
        if (!a.warp_mode.empty()) {
            cfg.warp_mode = a.warp_mode == "shared" ? WarpMode::Shared : WarpMode::PerRegion;
        }
        cfg.validate();
        if (!fs::exists(a.landmarks)) {
            return fail(kInputError, "landmarks file not found: " + a.landmarks);
        }
        if (fs::exists(a.out) && fs::equivalent(a.out, a.input)) {
            return fail(kInputError, "output directory must differ from the input directory");
        }
        clip = load_clip(a.input, a.landmarks);
        if (cfg.strategy != Strategy::VB && clip.size() < 2) {
            return fail(kInputError, std::string(strategy_name(cfg.strategy)) +
                                         " needs at least two frames to pick a donor frame");
        }
    } catch (const Error& e) {
        return fail(kInputError, e.what());
    } catch (const std::exception& e) {
        return fail(kInputError, e.what());
    }
    log_event({{"event", "loaded"}, {"frames", clip.size()}, {"strategy", strategy_name(cfg.strategy)}});

    ClipResult result;
    try {
        result = synthesize_clip(clip, cfg, a.seed, {a.threads});
    } catch (const SynthesisError& e) {
        log_event({{"level", "error"}, {"frame", e.frame()}, {"kind", to_string(e.code())}, {"message", e.what()}});
        return kSynthesisError;
    } catch (const std::exception& e) {
        return fail(kSynthesisError, e.what());
    }
    log_event({{"event", "synthesized"}, {"frames", result.clip.size()}});

    try {
        store_clip(result.clip, result.manifest, a.out);
        if (a.dump_masks) {
            dump_masks(clip, cfg, fs::path(a.out) / "masks");
        }
    } catch (const std::exception& e) {
        return fail(kSynthesisError, e.what());
    }
    log_event({{"event", "written"}, {"out", a.out}});

    json digests = json::array();
    for (const FrameRecord& rec : result.manifest.frames) {
        digests.push_back(rec.digest);
    }
    std::cout << json{{"out", a.out},
                      {"frames", result.clip.size()},
                      {"strategy", strategy_name(cfg.strategy)},
                      {"seed", a.seed},
                      {"digests", digests},
                      {"drift_mean", result.manifest.drift.mean}}
                     .dump()
              << "\n";
    return kOk;
}

// ------------------------------------------------------------------ masks

struct MaskArgs {
    std::string input;
    std::string landmarks;
    std::string out;
    std::size_t index = 0;
    std::optional<double> fdist;
    std::array<std::optional<double>, kRegionCount> region_fdist{};
    std::string distance_mode = "hull";
};

int cmd_masks(const MaskArgs& a)
{
    try {
        const Frame frame = read_png(a.input);
        if (!fs::exists(a.landmarks)) {
            return fail(kInputError, "landmarks file not found: " + a.landmarks);
        }
        const std::vector<LandmarkSet> all = read_landmarks(a.landmarks);
        if (a.index >= all.size()) {
            return fail(kInputError, "landmarks file has no frame " + std::to_string(a.index));
        }
        const LandmarkSet& lm = all[a.index];

        SynthesisConfig cfg;
        cfg.distance_mode = a.distance_mode == "point-set" ? DistanceMode::PointSet : DistanceMode::Hull;
        for (std::size_t r = 0; r < kRegionCount; ++r) {
            cfg.fdist[r] = a.region_fdist[r] ? a.region_fdist[r] : a.fdist;
        }
        cfg.validate();
        const FalloffConfig falloff = cfg.falloff_for(lm);

        fs::create_directories(a.out);
        json files = json::array();
        for (Region r : kRegions) {
            const RegionMask m = region_mask(frame.width(), frame.height(), lm, r, falloff);
            const fs::path path = fs::path(a.out) / ("mask_" + std::string(region_name(r)) + ".png");
            write_gray_png(path, mask_to_gray(m.weights));
            files.push_back(path.string());
        }
        std::cout << json{{"files", files}, {"fdist", falloff.fdist}}.dump() << "\n";
    } catch (const std::exception& e) {
        return fail(kInputError, e.what());
    }
    return kOk;
}

// ------------------------------------------------------------ drift-stats

int cmd_drift_stats(const std::string& manifest_path)
{
    try {
        const fs::path path(manifest_path);
        if (!fs::exists(path)) {
            return fail(kInputError, "manifest not found: " + manifest_path);
        }
        const SynthesisManifest m = verify_output(path.parent_path());
        std::cout << drift_to_json(m.drift).dump() << "\n";
    } catch (const std::exception& e) {
        return fail(kInputError, e.what());
    }
    return kOk;
}

// -------------------------------------------------------------- sta-check

struct StaArgs {
    int t = 8;
    int h = 14;
    int w = 14;
    sta::StAConfig cfg;
    std::vector<int> scales{3, 5, 7};
    std::uint64_t seed = 0;
    bool zero_sum_temporal = false;
    bool zero_init_up = false;
    bool no_residual = false;
    std::string padding = "replicate";
};

int cmd_sta_check(StaArgs a)
{
    using namespace vbsynth::sta;
    StAConfig cfg = a.cfg;
    cfg.scales = a.scales;
    cfg.zero_init_up = a.zero_init_up;
    cfg.zero_sum_temporal = a.zero_sum_temporal;
    cfg.residual = !a.no_residual;
    cfg.padding = a.padding == "zero" ? Padding::Zero : Padding::Replicate;
    try {
        cfg.validate();
        if (a.t < 1 || a.h < 1 || a.w < 1) {
            throw Error(ErrorCode::InvalidArgument, "t, h and w must be >= 1");
        }
    } catch (const std::exception& e) {
        return fail(kInputError, e.what());
    }

    Rng rng(a.seed);
    const StAWeights weights = init_weights(cfg, rng);

    FeatureTensor slice({1, a.h, a.w, cfg.channels});
    for (double& v : slice.data()) {
        v = rng.uniform(-1.0, 1.0);
    }
    const ProbeReport probe = probe_constant_video(weights, cfg, slice, a.t);

    FeatureTensor input({a.t, a.h, a.w, cfg.channels});
    for (double& v : input.data()) {
        v = rng.uniform(-1.0, 1.0);
    }
    const StAOutputBundle out = adapter_forward(input, weights, cfg);
    const FeatureTensor ref = reference_forward(input, weights, cfg);
    const double oracle_diff = max_abs_diff(out.x_out.data(), ref.data());

    const std::size_t closed = param_count(cfg);
    const std::size_t enumerated = weights.enumerate_parameters();

    constexpr double kOracleTolerance = 1e-6;
    const bool params_ok = closed == enumerated;
    const bool oracle_ok = oracle_diff <= kOracleTolerance && out.x_out.dims() == input.dims();
    const bool temporal_ok = !cfg.zero_sum_temporal || probe.temporal_zero;
    const bool ok = params_ok && oracle_ok && probe.spatial_constant && temporal_ok;

    const json config = {{"t", a.t},
                         {"h", a.h},
                         {"w", a.w},
                         {"c", cfg.channels},
                         {"down_ratio", cfg.down_ratio},
                         {"reduced", cfg.reduced()},
                         {"heads", cfg.heads},
                         {"scales", cfg.scales},
                         {"zero_init_up", cfg.zero_init_up},
                         {"zero_sum_temporal", cfg.zero_sum_temporal},
                         {"residual", cfg.residual},
                         {"padding", a.padding},
                         {"seed", a.seed}};
    const json report = {{"e_s_time_variation", probe.e_s_time_variation},
                         {"e_t_max_abs", probe.e_t_max_abs},
                         {"e_t_time_variation", probe.e_t_time_variation},
                         {"param_count", closed},
                         {"param_count_enumerated", enumerated},
                         {"oracle_max_abs_diff", oracle_diff},
                         {"config", config},
                         {"checks",
                          {{"param_count", params_ok},
                           {"oracle", oracle_ok},
                           {"spatial_constant", probe.spatial_constant},
                           {"temporal_zero", cfg.zero_sum_temporal ? json(probe.temporal_zero) : json(nullptr)}}},
                         {"note", probe.note},
                         {"ok", ok}};
    std::cout << report.dump() << "\n";
    return ok ? kOk : kCheckFailed;
}

} // namespace

int run(int argc, char** argv)
{
    CLI::App app{"Video-level blending synthesis and spatiotemporal adapter checks", "vbsynth"};
    app.require_subcommand(1);

    SynthArgs synth;
    CLI::App* s = app.add_subcommand("synth", "Synthesize a blended clip from frames and landmarks");
    s->add_option("--input", synth.input, "Directory of frame_NNNNNN.png files")->required();
    s->add_option("--landmarks", synth.landmarks, "Landmarks JSON")->required();
    s->add_option("--out", synth.out, "Output directory")->required();
    s->add_option("--seed", synth.seed, "Master seed (u64)");
    s->add_option("--config", synth.config, "Synthesis config JSON");
    s->add_option("--strategy", synth.strategy, "vb | cbi | pfig")->check(CLI::IsMember({"vb", "cbi", "pfig"}));
    s->add_option("--warp-mode", synth.warp_mode, "shared | per-region")
        ->check(CLI::IsMember({"shared", "per-region"}));
    s->add_option("--threads", synth.threads, "Worker threads; does not affect outputs")->check(CLI::PositiveNumber);
    s->add_flag("--dump-masks", synth.dump_masks, "Also write per-frame region masks under <out>/masks");

    MaskArgs masks;
    double fdist_eyes = 0, fdist_brows = 0, fdist_nose = 0, fdist_mouth = 0, fdist_all = 0;
    CLI::App* m = app.add_subcommand("masks", "Write the four region masks of one frame as grayscale PNGs");
    m->add_option("--input", masks.input, "Frame PNG")->required();
    m->add_option("--landmarks", masks.landmarks, "Landmarks JSON")->required();
    m->add_option("--out", masks.out, "Output directory")->required();
    m->add_option("--index", masks.index, "Landmark frame index to use");
    auto* o_all = m->add_option("--fdist", fdist_all, "Fall-off distance for every region (pixels)");
    auto* o_eyes = m->add_option("--fdist-eyes", fdist_eyes);
    auto* o_brows = m->add_option("--fdist-eyebrows", fdist_brows);
    auto* o_nose = m->add_option("--fdist-nose", fdist_nose);
    auto* o_mouth = m->add_option("--fdist-mouth", fdist_mouth);
    m->add_option("--distance-mode", masks.distance_mode, "hull | point-set")
        ->check(CLI::IsMember({"hull", "point-set"}));

    std::string manifest;
    CLI::App* d = app.add_subcommand("drift-stats", "Verify an output directory and print its drift report");
    d->add_option("--manifest", manifest, "manifest.json of a synth output")->required();

    StaArgs sta;
    CLI::App* k = app.add_subcommand("sta-check", "Run adapter invariant checks on random weights");
    k->set_help_flag("--help", "Print this help message and exit");
    k->add_option("--t", sta.t);
    k->add_option("--h", sta.h);
    k->add_option("--w", sta.w);
    k->add_option("--c", sta.cfg.channels);
    k->add_option("--down-ratio", sta.cfg.down_ratio);
    k->add_option("--heads", sta.cfg.heads);
    k->add_option("--scales", sta.scales, "Odd kernel extents, e.g. 3,5,7")->delimiter(',');
    k->add_option("--seed", sta.seed);
    k->add_flag("--zero-sum-temporal", sta.zero_sum_temporal);
    k->add_flag("--zero-init-up", sta.zero_init_up);
    k->add_flag("--no-residual", sta.no_residual, "Return the bare adapter update");
    k->add_option("--padding", sta.padding, "Convolution border handling: replicate | zero")
        ->check(CLI::IsMember({"replicate", "zero"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    if (s->parsed()) {
        return cmd_synth(synth);
    }
    if (m->parsed()) {
        if (*o_all) masks.fdist = fdist_all;
        if (*o_eyes) masks.region_fdist[region_slot(Region::Eyes)] = fdist_eyes;
        if (*o_brows) masks.region_fdist[region_slot(Region::Eyebrows)] = fdist_brows;
        if (*o_nose) masks.region_fdist[region_slot(Region::Nose)] = fdist_nose;
        if (*o_mouth) masks.region_fdist[region_slot(Region::Mouth)] = fdist_mouth;
        return cmd_masks(masks);
    }
    if (d->parsed()) {
        return cmd_drift_stats(manifest);
    }
    return cmd_sta_check(sta);
}

} // namespace vbsynth::cli
