#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vbsynth {

/// Row-major interleaved raster.
template <typename T>
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, T fill = T{});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    bool same_shape(int width, int height, int channels) const noexcept
    {
        return width_ == width && height_ == height && channels_ == channels;
    }
    template <typename U>
    bool same_dims(const Raster<U>& other) const noexcept
    {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept
    {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<T> data_;
};

/// 8-bit RGB frame, the unit of storage.
using Frame = Raster<std::uint8_t>;
/// Continuous-intensity RGB frame used between blending stages.
using FrameF = Raster<double>;

Frame make_frame(int width, int height, std::uint8_t fill = 0);
FrameF to_continuous(const Frame& frame);

/// Round-half-to-even and clamp into [0, 255].
std::uint8_t quantize(double value);
Frame quantize(const FrameF& frame);

} // namespace vbsynth
