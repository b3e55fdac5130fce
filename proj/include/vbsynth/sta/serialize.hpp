#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vbsynth/sta/adapter.hpp"

namespace vbsynth::sta {

enum class Dtype { F32, F64 };

struct NamedArray {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;
};

/// Writes `<stem>.json` (shapes, offsets, dtype) and `<stem>.bin`
/// (concatenated little-endian values). F32 is the interchange default.
void save_arrays(const std::filesystem::path& stem, const std::vector<NamedArray>& arrays, Dtype dtype = Dtype::F32);
std::vector<NamedArray> load_arrays(const std::filesystem::path& stem);

/// Flatten weights into named arrays, and back given the matching config.
std::vector<NamedArray> weights_to_arrays(const StAWeights& w);
StAWeights weights_from_arrays(const std::vector<NamedArray>& arrays, const StAConfig& cfg);

} // namespace vbsynth::sta
