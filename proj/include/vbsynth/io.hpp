#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vbsynth/blending.hpp"
#include "vbsynth/geometry.hpp"
#include "vbsynth/image.hpp"
#include "vbsynth/pipeline.hpp"

namespace vbsynth {

namespace fs = std::filesystem;

/// Any PNG is converted to 8-bit RGB. Throws BadImage / MissingInput.
Frame read_png(const fs::path& path);
void write_png(const fs::path& path, const Frame& frame);
void write_gray_png(const fs::path& path, const Raster<std::uint8_t>& gray);

/// frame_%06d.png
std::string frame_filename(std::size_t index);

/// {"frames":[{"index": int, "landmarks": [[x,y] x 68]}]}; indices must be
/// contiguous from 0 (any order). Errors name the offending index.
std::vector<LandmarkSet> read_landmarks(const fs::path& path);
std::vector<LandmarkSet> parse_landmarks(const nlohmann::json& doc);
nlohmann::json landmarks_to_json(const std::vector<LandmarkSet>& frames);
void write_landmarks(const fs::path& path, const std::vector<LandmarkSet>& frames);

/// Config files mirror SynthesisConfig; unknown keys raise BadConfig.
SynthesisConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SynthesisConfig& cfg);
SynthesisConfig read_config(const fs::path& path);

nlohmann::json manifest_to_json(const SynthesisManifest& m);
SynthesisManifest manifest_from_json(const nlohmann::json& j);
SynthesisManifest read_manifest(const fs::path& path);
nlohmann::json drift_to_json(const DriftReport& d);

/// Load a zero-padded PNG sequence plus its landmarks.
Clip load_clip(const fs::path& frames_dir, const fs::path& landmarks_path);

/// Writes frames, landmarks.json and, last and atomically, manifest.json.
void store_clip(const Clip& clip, const SynthesisManifest& manifest, const fs::path& out_dir);

/// Recompute every frame digest in `dir` against its manifest.json.
/// Throws DigestMismatch naming the first bad frame.
SynthesisManifest verify_output(const fs::path& dir);

/// Write text to path via a temporary sibling and rename.
void write_file_atomic(const fs::path& path, const std::string& contents);

} // namespace vbsynth
