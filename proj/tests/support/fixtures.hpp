#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vbsynth/geometry.hpp"
#include "vbsynth/image.hpp"
#include "vbsynth/pipeline.hpp"

namespace vbsynth::testing {

/// iBUG-68 style face laid out in the square [x0, x0 + size] x [y0, y0 + size].
LandmarkSet template_landmarks(double x0, double y0, double size);

/// Axis-aligned box, [x0, x1] x [y0, y1].
struct Box {
    double x0, y0, x1, y1;
};

/// Landmarks whose regions (eyes, eyebrows, nose, mouth order) each trace
/// the perimeter of a box, so every region hull is exactly that box. The
/// jaw traces `outline`.
LandmarkSet box_landmarks(const std::array<Box, 4>& regions, Box outline);

/// Procedural face frame: gradient background, textured skin and dark organs.
Frame render_face(int width, int height, const LandmarkSet& lm, int frame_index);

/// n frames of a slowly moving face; frame size `dim` x `dim`.
Clip make_face_clip(std::size_t n, int dim = 128);

/// Fresh, empty scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string frame_hash(const Frame& f);

/// Writes `clip` as frames/ plus landmarks.json under `dir`.
void write_clip(const Clip& clip, const std::filesystem::path& dir);

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs `binary` with `args`, capturing stdout and stderr.
CommandResult run_command(const std::string& binary, const std::vector<std::string>& args);

} // namespace vbsynth::testing
