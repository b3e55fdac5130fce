#include "vbsynth/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <png.h>

#include "vbsynth/digest.hpp"
#include "vbsynth/error.hpp"

namespace vbsynth {

using nlohmann::json;

namespace {

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::MissingInput, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const fs::path& path, ErrorCode on_error)
{
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(on_error, path.string() + ": " + e.what());
    }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object()) {
        throw Error(ErrorCode::BadConfig, where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; })) {
            throw Error(ErrorCode::BadConfig, "unknown key '" + key + "' in " + where);
        }
    }
}

json point_json(Point p)
{
    return json::array({p.x, p.y});
}

Point point_from(const json& j)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw Error(ErrorCode::BadLandmarks, "a point must be [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Strategy strategy_from(const std::string& s)
{
    for (Strategy v : {Strategy::VB, Strategy::CBI, Strategy::PFIG}) {
        if (strategy_name(v) == s) {
            return v;
        }
    }
    throw Error(ErrorCode::BadConfig, "unknown strategy '" + s + "'");
}

WarpMode warp_mode_from(const std::string& s)
{
    if (s == "shared") {
        return WarpMode::Shared;
    }
    if (s == "per-region") {
        return WarpMode::PerRegion;
    }
    throw Error(ErrorCode::BadConfig, "unknown warp_mode '" + s + "'");
}

template <typename T>
T get_as(const json& j, const std::string& where)
{
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::BadConfig, "wrong type for " + where);
    }
}

json params_json(const PerturbationParams& p)
{
    return {{"rotation", p.rotation},
            {"scale", p.scale},
            {"translation", point_json(p.translation)},
            {"pivot", point_json(p.pivot)}};
}

PerturbationParams params_from(const json& j)
{
    PerturbationParams p;
    p.rotation = j.at("rotation").get<double>();
    p.scale = j.at("scale").get<double>();
    p.translation = point_from(j.at("translation"));
    p.pivot = point_from(j.at("pivot"));
    return p;
}

json region_map(const std::array<double, kRegionCount>& values)
{
    json out = json::object();
    for (Region r : kRegions) {
        out[std::string(region_name(r))] = values[region_slot(r)];
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------- PNG

Frame read_png(const fs::path& path)
{
    if (!fs::exists(path)) {
        throw Error(ErrorCode::MissingInput, "missing image " + path.string());
    }
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
        throw Error(ErrorCode::BadImage, "unreadable image " + path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        throw Error(ErrorCode::BadImage, "empty image " + path.string());
    }
    Frame frame(static_cast<int>(image.width), static_cast<int>(image.height), 3);
    if (png_image_finish_read(&image, nullptr, frame.data().data(), 0, nullptr) == 0) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::BadImage, "unreadable image " + path.string() + ": " + msg);
    }
    return frame;
}

namespace {

void write_png_raw(const fs::path& path, const std::uint8_t* data, int width, int height, png_uint_32 format)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr) == 0) {
        throw Error(ErrorCode::BadImage, "cannot write " + path.string() + ": " + image.message);
    }
}

} // namespace

void write_png(const fs::path& path, const Frame& frame)
{
    if (frame.channels() != 3) {
        throw Error(ErrorCode::InvalidArgument, "write_png expects an RGB frame");
    }
    write_png_raw(path, frame.data().data(), frame.width(), frame.height(), PNG_FORMAT_RGB);
}

void write_gray_png(const fs::path& path, const Raster<std::uint8_t>& gray)
{
    write_png_raw(path, gray.data().data(), gray.width(), gray.height(), PNG_FORMAT_GRAY);
}

std::string frame_filename(std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06zu.png", index);
    return buf;
}

// ---------------------------------------------------------- landmarks

std::vector<LandmarkSet> parse_landmarks(const json& doc)
{
    if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_array()) {
        throw Error(ErrorCode::BadLandmarks, "landmarks file must hold a \"frames\" array");
    }
    std::map<std::size_t, LandmarkSet> by_index;
    for (const json& entry : doc["frames"]) {
        if (!entry.is_object() || !entry.contains("index") || !entry["index"].is_number_integer() ||
            entry["index"].get<std::int64_t>() < 0 || !entry.contains("landmarks") || !entry["landmarks"].is_array()) {
            throw Error(ErrorCode::BadLandmarks, "each landmark frame needs \"index\" and \"landmarks\"");
        }
        const auto index = entry["index"].get<std::size_t>();
        std::vector<Point> pts;
        for (const json& p : entry["landmarks"]) {
            pts.push_back(point_from(p));
        }
        try {
            if (!by_index.emplace(index, LandmarkSet(std::move(pts))).second) {
                throw Error(ErrorCode::BadLandmarks, "duplicate landmark index");
            }
        } catch (const Error& e) {
            throw Error(ErrorCode::BadLandmarks, "landmark frame " + std::to_string(index) + ": " + e.what());
        }
    }
    std::vector<LandmarkSet> out;
    out.reserve(by_index.size());
    std::size_t expected = 0;
    for (auto& [index, lm] : by_index) {
        if (index != expected) {
            throw Error(ErrorCode::IndexGap, "landmark index " + std::to_string(expected) + " is missing");
        }
        out.push_back(std::move(lm));
        ++expected;
    }
    return out;
}

std::vector<LandmarkSet> read_landmarks(const fs::path& path)
{
    return parse_landmarks(parse_json_file(path, ErrorCode::BadLandmarks));
}

json landmarks_to_json(const std::vector<LandmarkSet>& frames)
{
    json arr = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        json pts = json::array();
        for (const Point& p : frames[i].points()) {
            pts.push_back(point_json(p));
        }
        arr.push_back({{"index", i}, {"landmarks", std::move(pts)}});
    }
    return {{"frames", std::move(arr)}};
}

void write_landmarks(const fs::path& path, const std::vector<LandmarkSet>& frames)
{
    write_file_atomic(path, landmarks_to_json(frames).dump(1));
}

// ------------------------------------------------------------- config

SynthesisConfig config_from_json(const json& j)
{
    reject_unknown_keys(j, {"strategy", "warp_mode", "bounds", "falloff", "distance_mode", "weights", "smoothing_window"},
                        "config");
    SynthesisConfig cfg;
    if (j.contains("strategy")) {
        cfg.strategy = strategy_from(get_as<std::string>(j["strategy"], "strategy"));
    }
    if (j.contains("warp_mode")) {
        cfg.warp_mode = warp_mode_from(get_as<std::string>(j["warp_mode"], "warp_mode"));
    }
    if (j.contains("bounds")) {
        const json& b = j["bounds"];
        reject_unknown_keys(b, {"rotation", "scale", "translation"}, "bounds");
        if (b.contains("rotation")) {
            cfg.max_rotation = get_as<double>(b["rotation"], "bounds.rotation");
        }
        if (b.contains("scale")) {
            cfg.max_scale = get_as<double>(b["scale"], "bounds.scale");
        }
        if (b.contains("translation") && !b["translation"].is_null()) {
            cfg.max_translation = get_as<double>(b["translation"], "bounds.translation");
        }
    }
    if (j.contains("falloff")) {
        const json& f = j["falloff"];
        if (f.is_number()) {
            cfg.fdist.fill(f.get<double>());
        } else {
            reject_unknown_keys(f, {"eyes", "eyebrows", "nose", "mouth"}, "falloff");
            for (Region r : kRegions) {
                const std::string key(region_name(r));
                if (f.contains(key) && !f[key].is_null()) {
                    cfg.fdist[region_slot(r)] = get_as<double>(f[key], "falloff." + key);
                }
            }
        }
    }
    if (j.contains("distance_mode")) {
        const auto mode = get_as<std::string>(j["distance_mode"], "distance_mode");
        if (mode == "hull") {
            cfg.distance_mode = DistanceMode::Hull;
        } else if (mode == "point-set") {
            cfg.distance_mode = DistanceMode::PointSet;
        } else {
            throw Error(ErrorCode::BadConfig, "unknown distance_mode '" + mode + "'");
        }
    }
    if (j.contains("weights")) {
        const json& w = j["weights"];
        reject_unknown_keys(w, {"eyes", "eyebrows", "nose", "mouth"}, "weights");
        for (Region r : kRegions) {
            const std::string key(region_name(r));
            if (!w.contains(key)) {
                throw Error(ErrorCode::BadConfig, "weights must name every region (missing " + key + ")");
            }
            cfg.weights.alpha[region_slot(r)] = get_as<double>(w[key], "weights." + key);
        }
    }
    if (j.contains("smoothing_window")) {
        cfg.smoothing_window = get_as<int>(j["smoothing_window"], "smoothing_window");
    }
    cfg.validate();
    return cfg;
}

json config_to_json(const SynthesisConfig& cfg)
{
    json falloff = json::object();
    for (Region r : kRegions) {
        const auto& f = cfg.fdist[region_slot(r)];
        falloff[std::string(region_name(r))] = f ? json(*f) : json(nullptr);
    }
    return {{"strategy", std::string(strategy_name(cfg.strategy))},
            {"warp_mode", std::string(warp_mode_name(cfg.warp_mode))},
            {"bounds",
             {{"rotation", cfg.max_rotation},
              {"scale", cfg.max_scale},
              {"translation", cfg.max_translation ? json(*cfg.max_translation) : json(nullptr)}}},
            {"falloff", falloff},
            {"distance_mode", cfg.distance_mode == DistanceMode::Hull ? "hull" : "point-set"},
            {"weights", region_map(cfg.weights.alpha)},
            {"smoothing_window", cfg.smoothing_window}};
}

SynthesisConfig read_config(const fs::path& path)
{
    return config_from_json(parse_json_file(path, ErrorCode::BadConfig));
}

// ----------------------------------------------------------- manifest

json drift_to_json(const DriftReport& d)
{
    json pairs = json::array();
    for (const PairDrift& p : d.pairs) {
        pairs.push_back({{"from", p.from}, {"mean", p.mean}, {"region_mean", region_map(p.region_mean)}});
    }
    return {{"mean", d.mean}, {"max", d.max}, {"region_mean", region_map(d.region_mean)}, {"pairs", pairs}};
}

namespace {

json provenance_json(const FrameProvenance& p)
{
    json params = json::object();
    if (p.vb) {
        params["warp_mode"] = std::string(warp_mode_name(p.vb->mode));
        if (p.vb->mode == WarpMode::Shared) {
            params["shared"] = params_json(p.vb->region[0]);
        } else {
            json regions = json::object();
            for (Region r : kRegions) {
                regions[std::string(region_name(r))] = params_json(p.vb->of(r));
            }
            params["regions"] = regions;
        }
    }
    if (p.donor) {
        params["donor"] = *p.donor;
    }
    if (p.region) {
        params["region"] = std::string(region_name(*p.region));
    }
    return params;
}

FrameProvenance provenance_from(const json& params, Strategy strategy)
{
    FrameProvenance p;
    p.strategy = strategy;
    if (params.contains("warp_mode")) {
        VbParams vb;
        vb.mode = warp_mode_from(params["warp_mode"].get<std::string>());
        if (vb.mode == WarpMode::Shared) {
            vb.region.fill(params_from(params.at("shared")));
        } else {
            for (Region r : kRegions) {
                vb.region[region_slot(r)] = params_from(params.at("regions").at(std::string(region_name(r))));
            }
        }
        p.vb = vb;
    }
    if (params.contains("donor")) {
        p.donor = params["donor"].get<std::size_t>();
    }
    if (params.contains("region")) {
        p.region = region_from_name(params["region"].get<std::string>());
    }
    return p;
}

} // namespace

json manifest_to_json(const SynthesisManifest& m)
{
    json frames = json::array();
    for (const FrameRecord& rec : m.frames) {
        json pts = json::array();
        for (const Point& p : rec.landmarks.points()) {
            pts.push_back(point_json(p));
        }
        frames.push_back({{"index", rec.index},
                          {"source_index", rec.source_index},
                          {"params", provenance_json(rec.provenance)},
                          {"digest", rec.digest},
                          {"source_landmarks", std::move(pts)}});
    }
    return {{"seed", m.seed}, {"config", config_to_json(m.config)}, {"frames", frames}, {"drift_report", drift_to_json(m.drift)}};
}

SynthesisManifest manifest_from_json(const json& j)
{
    SynthesisManifest m;
    try {
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config = config_from_json(j.at("config"));
        for (const json& f : j.at("frames")) {
            FrameRecord rec;
            rec.index = f.at("index").get<std::size_t>();
            rec.source_index = f.at("source_index").get<std::size_t>();
            rec.provenance = provenance_from(f.at("params"), m.config.strategy);
            rec.digest = f.at("digest").get<std::string>();
            std::vector<Point> pts;
            for (const json& p : f.at("source_landmarks")) {
                pts.push_back(point_from(p));
            }
            rec.landmarks = LandmarkSet(std::move(pts));
            m.frames.push_back(std::move(rec));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadConfig, std::string("malformed manifest: ") + e.what());
    }
    for (std::size_t i = 0; i < m.frames.size(); ++i) {
        if (m.frames[i].index != i) {
            throw Error(ErrorCode::IndexGap, "manifest frame " + std::to_string(i) + " is missing");
        }
    }
    m.drift = drift_statistic(m);
    return m;
}

SynthesisManifest read_manifest(const fs::path& path)
{
    return manifest_from_json(parse_json_file(path, ErrorCode::BadConfig));
}

// --------------------------------------------------------------- clips

Clip load_clip(const fs::path& frames_dir, const fs::path& landmarks_path)
{
    if (!fs::is_directory(frames_dir)) {
        throw Error(ErrorCode::MissingInput, "frames directory not found: " + frames_dir.string());
    }
    if (!fs::exists(landmarks_path)) {
        throw Error(ErrorCode::MissingInput, "landmarks file not found: " + landmarks_path.string());
    }
    static const std::regex kPattern(R"(frame_(\d{6})\.png)");
    std::set<std::size_t> indices;
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && std::regex_match(name, m, kPattern)) {
            indices.insert(std::stoul(m[1].str()));
        }
    }
    if (indices.empty()) {
        throw Error(ErrorCode::MissingInput, "no frame_NNNNNN.png files in " + frames_dir.string());
    }
    std::size_t expected = 0;
    for (std::size_t idx : indices) {
        if (idx != expected) {
            throw Error(ErrorCode::IndexGap, "frame index " + std::to_string(expected) + " is missing");
        }
        ++expected;
    }

    Clip clip;
    clip.landmarks = read_landmarks(landmarks_path);
    if (clip.landmarks.size() != indices.size()) {
        throw Error(ErrorCode::CountMismatch, "landmark frame count " + std::to_string(clip.landmarks.size()) +
                                                  " does not match frame count " + std::to_string(indices.size()));
    }
    for (std::size_t idx : indices) {
        clip.frames.push_back(read_png(frames_dir / frame_filename(idx)));
        clip.source_indices.push_back(idx);
    }
    clip.validate();
    return clip;
}

void write_file_atomic(const fs::path& path, const std::string& contents)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::MissingInput, "cannot write " + tmp.string());
        }
        out << contents;
        if (!out.flush()) {
            throw Error(ErrorCode::MissingInput, "cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

void store_clip(const Clip& clip, const SynthesisManifest& manifest, const fs::path& out_dir)
{
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < clip.frames.size(); ++i) {
        write_png(out_dir / frame_filename(i), clip.frames[i]);
    }
    write_landmarks(out_dir / "landmarks.json", clip.landmarks);
    write_file_atomic(out_dir / "manifest.json", manifest_to_json(manifest).dump(1) + "\n");
}

SynthesisManifest verify_output(const fs::path& dir)
{
    SynthesisManifest m = read_manifest(dir / "manifest.json");
    for (const FrameRecord& rec : m.frames) {
        const Frame f = read_png(dir / frame_filename(rec.index));
        if (sha256_hex(f.data()) != rec.digest) {
            throw Error(ErrorCode::DigestMismatch, "digest mismatch for frame " + std::to_string(rec.index));
        }
    }
    return m;
}

} // namespace vbsynth
