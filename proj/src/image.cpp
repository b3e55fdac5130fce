#include "vbsynth/image.hpp"

#include <algorithm>
#include <cmath>

#include "vbsynth/error.hpp"

namespace vbsynth {

template <typename T>
Raster<T>::Raster(int width, int height, int channels, T fill)
    : width_(width), height_(height), channels_(channels)
{
    if (width < 1 || height < 1 || channels < 1) {
        throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

template class Raster<std::uint8_t>;
template class Raster<double>;

Frame make_frame(int width, int height, std::uint8_t fill)
{
    return Frame(width, height, 3, fill);
}

FrameF to_continuous(const Frame& frame)
{
    FrameF out(frame.width(), frame.height(), frame.channels());
    std::copy(frame.data().begin(), frame.data().end(), out.data().begin());
    return out;
}

std::uint8_t quantize(double value)
{
    // nearbyint follows the default FE_TONEAREST mode: ties go to even.
    const double r = std::nearbyint(value);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

Frame quantize(const FrameF& frame)
{
    Frame out(frame.width(), frame.height(), frame.channels());
    std::transform(frame.data().begin(), frame.data().end(), out.data().begin(),
                   [](double v) { return quantize(v); });
    return out;
}

} // namespace vbsynth
