#include "vbsynth/sta/serialize.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "vbsynth/error.hpp"

namespace vbsynth::sta {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path with_ext(const fs::path& stem, const char* ext)
{
    fs::path p = stem;
    p += ext;
    return p;
}

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U bits)
{
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
}

template <typename U>
U get_le(const std::uint8_t* p)
{
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bits |= static_cast<U>(p[i]) << (8 * i);
    }
    return bits;
}

std::size_t element_count(const std::vector<int>& shape)
{
    std::size_t n = 1;
    for (int s : shape) {
        n *= static_cast<std::size_t>(s);
    }
    return n;
}

} // namespace

void save_arrays(const fs::path& stem, const std::vector<NamedArray>& arrays, Dtype dtype)
{
    std::vector<std::uint8_t> blob;
    json tensors = json::array();
    std::size_t offset = 0;
    for (const NamedArray& a : arrays) {
        if (element_count(a.shape) != a.values.size()) {
            throw Error(ErrorCode::DimensionMismatch, "array '" + a.name + "' shape does not match its length");
        }
        tensors.push_back({{"name", a.name}, {"shape", a.shape}, {"offset", offset}, {"count", a.values.size()}});
        for (double v : a.values) {
            if (dtype == Dtype::F32) {
                put_le(blob, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
            } else {
                put_le(blob, std::bit_cast<std::uint64_t>(v));
            }
        }
        offset += a.values.size();
    }
    const fs::path bin = with_ext(stem, ".bin");
    const json header = {{"dtype", dtype == Dtype::F32 ? "f32" : "f64"},
                         {"byte_order", "little"},
                         {"blob", bin.filename().string()},
                         {"tensors", tensors}};
    std::ofstream(bin, std::ios::binary).write(reinterpret_cast<const char*>(blob.data()),
                                               static_cast<std::streamsize>(blob.size()));
    std::ofstream(with_ext(stem, ".json")) << header.dump(1) << "\n";
}

std::vector<NamedArray> load_arrays(const fs::path& stem)
{
    std::ifstream hin(with_ext(stem, ".json"));
    if (!hin) {
        throw Error(ErrorCode::MissingInput, "missing parameter header " + with_ext(stem, ".json").string());
    }
    json header;
    try {
        header = json::parse(hin);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadConfig, std::string("bad parameter header: ") + e.what());
    }
    const std::string dtype = header.value("dtype", "f32");
    if (dtype != "f32" && dtype != "f64") {
        throw Error(ErrorCode::BadConfig, "unsupported dtype " + dtype);
    }
    const std::size_t width = dtype == "f32" ? 4 : 8;
    std::ifstream bin(stem.parent_path() / header.at("blob").get<std::string>(), std::ios::binary);
    const std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

    std::vector<NamedArray> out;
    for (const json& t : header.at("tensors")) {
        NamedArray a;
        a.name = t.at("name").get<std::string>();
        a.shape = t.at("shape").get<std::vector<int>>();
        const auto offset = t.at("offset").get<std::size_t>();
        const auto count = t.at("count").get<std::size_t>();
        if (count != element_count(a.shape) || (offset + count) * width > blob.size()) {
            throw Error(ErrorCode::BadConfig, "parameter blob too short for '" + a.name + "'");
        }
        a.values.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint8_t* p = blob.data() + (offset + i) * width;
            a.values.push_back(width == 4 ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)))
                                          : std::bit_cast<double>(get_le<std::uint64_t>(p)));
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<NamedArray> weights_to_arrays(const StAWeights& w)
{
    std::vector<NamedArray> out;
    const auto matrix = [&](const std::string& name, const Matrix& m) {
        out.push_back({name, {m.rows(), m.cols()}, {m.data().begin(), m.data().end()}});
    };
    const auto kernels = [&](const std::string& prefix, const std::vector<DepthwiseKernel3D>& ks) {
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const DepthwiseKernel3D& k = ks[i];
            const std::string name = prefix + "." + std::to_string(i);
            out.push_back({name + ".weight", {k.channels, k.kt, k.kh, k.kw}, k.coeff});
            if (!k.bias.empty()) {
                out.push_back({name + ".bias", {k.channels}, k.bias});
            }
        }
    };
    matrix("down", w.down);
    matrix("up", w.up);
    kernels("spatial", w.spatial);
    kernels("temporal", w.temporal);
    matrix("attention.query", w.attention.query);
    matrix("attention.key", w.attention.key);
    matrix("attention.value", w.attention.value);
    matrix("attention.output", w.attention.output);
    return out;
}

StAWeights weights_from_arrays(const std::vector<NamedArray>& arrays, const StAConfig& cfg)
{
    cfg.validate();
    const auto find = [&](const std::string& name) -> const NamedArray* {
        for (const NamedArray& a : arrays) {
            if (a.name == name) {
                return &a;
            }
        }
        return nullptr;
    };
    std::size_t used = 0;
    const auto require = [&](const std::string& name, const std::vector<int>& shape) -> const NamedArray& {
        const NamedArray* a = find(name);
        ++used;
        if (a == nullptr) {
            throw Error(ErrorCode::BadConfig, "parameter '" + name + "' missing");
        }
        if (a->shape != shape) {
            throw Error(ErrorCode::DimensionMismatch, "parameter '" + name + "' has the wrong shape");
        }
        return *a;
    };
    const auto matrix = [&](const std::string& name, int rows, int cols) {
        Matrix m(rows, cols);
        const NamedArray& a = require(name, {rows, cols});
        std::copy(a.values.begin(), a.values.end(), m.data().begin());
        return m;
    };
    const int c = cfg.channels;
    const int r = cfg.reduced();
    StAWeights w;
    w.down = matrix("down", c, r);
    w.up = matrix("up", r, c);
    for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
        const int n = cfg.scales[i];
        for (bool temporal : {false, true}) {
            const std::string name = std::string(temporal ? "temporal." : "spatial.") + std::to_string(i);
            DepthwiseKernel3D k(r, temporal ? n : 1, temporal ? 1 : n, temporal ? 1 : n);
            k.coeff = require(name + ".weight", {r, k.kt, k.kh, k.kw}).values;
            if (find(name + ".bias") != nullptr) {
                k.bias = require(name + ".bias", {r}).values;
            }
            (temporal ? w.temporal : w.spatial).push_back(std::move(k));
        }
    }
    w.attention = AttentionParams(cfg.heads, r);
    w.attention.query = matrix("attention.query", r, r);
    w.attention.key = matrix("attention.key", r, r);
    w.attention.value = matrix("attention.value", r, r);
    w.attention.output = matrix("attention.output", r, r);
    if (used != arrays.size()) {
        throw Error(ErrorCode::DimensionMismatch, "stored parameters do not match the configuration");
    }
    return w;
}

} // namespace vbsynth::sta
