#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vbsynth::sta {

/// Extents of a T x H x W x C activation block.
struct Dims {
    int t = 1;
    int h = 1;
    int w = 1;
    int c = 1;

    std::size_t positions() const { return static_cast<std::size_t>(t) * h * w; }
    std::size_t volume() const { return positions() * c; }
    bool valid() const { return t >= 1 && h >= 1 && w >= 1 && c >= 1; }

    friend bool operator==(const Dims&, const Dims&) = default;
};

/// Dense activations, stored channel-major then (t, h, w).
class FeatureTensor {
public:
    FeatureTensor() = default;
    explicit FeatureTensor(Dims dims, double fill = 0.0);

    const Dims& dims() const noexcept { return dims_; }

    double& at(int t, int h, int w, int c) { return data_[offset(t, h, w, c)]; }
    double at(int t, int h, int w, int c) const { return data_[offset(t, h, w, c)]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    /// Contiguous (T, H, W) plane of one channel.
    std::span<const double> channel(int c) const
    {
        return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * dims_.positions(), dims_.positions());
    }
    std::span<double> channel(int c)
    {
        return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * dims_.positions(), dims_.positions());
    }

    friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

private:
    std::size_t offset(int t, int h, int w, int c) const
    {
        return ((static_cast<std::size_t>(c) * dims_.t + t) * dims_.h + h) * dims_.w + w;
    }

    Dims dims_;
    std::vector<double> data_;
};

/// Row-major dense matrix; also used for (positions x channels) sequences.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0);

    static Matrix identity(int n);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// a (n x k) times b (k x m), accumulated in index order.
Matrix matmul(const Matrix& a, const Matrix& b);

enum class Padding {
    Zero,      ///< out-of-range taps read 0
    Replicate, ///< out-of-range taps read the nearest edge sample
};

/// Per-channel 3D kernel with odd extents; coefficients laid out [c][dt][dh][dw].
struct DepthwiseKernel3D {
    int channels = 0;
    int kt = 1;
    int kh = 1;
    int kw = 1;
    std::vector<double> coeff;
    std::vector<double> bias; ///< empty, or one per channel

    DepthwiseKernel3D() = default;
    DepthwiseKernel3D(int channels, int kt, int kh, int kw, bool with_bias = false);

    /// Centered unit impulse per channel.
    static DepthwiseKernel3D impulse(int channels, int kt, int kh, int kw);

    std::size_t taps() const { return static_cast<std::size_t>(kt) * kh * kw; }
    double& at(int c, int dt, int dh, int dw) { return coeff[((static_cast<std::size_t>(c) * kt + dt) * kh + dh) * kw + dw]; }
    double at(int c, int dt, int dh, int dw) const
    {
        return coeff[((static_cast<std::size_t>(c) * kt + dt) * kh + dh) * kw + dw];
    }
    std::size_t parameter_count() const { return coeff.size() + bias.size(); }
};

/// "Same"-size depthwise cross-correlation. Throws DimensionMismatch when
/// the kernel channel count differs from x.c.
FeatureTensor depthwise_conv3d(const FeatureTensor& x, const DepthwiseKernel3D& k, Padding padding = Padding::Zero);

/// out[t,h,w,:] = x[t,h,w,:] * W, with W of shape (C_in, C_out).
FeatureTensor pointwise_project(const FeatureTensor& x, const Matrix& w);

/// (T*H*W) x C sequence; row index = (t * H + h) * W + w.
Matrix flatten_positions(const FeatureTensor& x);
FeatureTensor unflatten_positions(const Matrix& seq, Dims dims);

FeatureTensor add(const FeatureTensor& a, const FeatureTensor& b);
FeatureTensor scale(const FeatureTensor& a, double s);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

} // namespace vbsynth::sta
