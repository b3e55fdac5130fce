#include "vbsynth/sta/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vbsynth/error.hpp"

namespace vbsynth::sta {

FeatureTensor::FeatureTensor(Dims dims, double fill) : dims_(dims)
{
    if (!dims.valid()) {
        throw Error(ErrorCode::InvalidArgument, "tensor dims must all be >= 1");
    }
    data_.assign(dims.volume(), fill);
}

Matrix::Matrix(int rows, int cols, double fill) : rows_(rows), cols_(cols)
{
    if (rows < 1 || cols < 1) {
        throw Error(ErrorCode::InvalidArgument, "matrix dims must be >= 1");
    }
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Matrix Matrix::identity(int n)
{
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "matmul: inner dimensions differ");
    }
    Matrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols(); ++k) {
                acc += a(i, k) * b(k, j);
            }
            out(i, j) = acc;
        }
    }
    return out;
}

DepthwiseKernel3D::DepthwiseKernel3D(int channels_, int kt_, int kh_, int kw_, bool with_bias)
    : channels(channels_), kt(kt_), kh(kh_), kw(kw_)
{
    const auto odd = [](int k) { return k >= 1 && k % 2 == 1; };
    if (channels < 1 || !odd(kt) || !odd(kh) || !odd(kw)) {
        throw Error(ErrorCode::InvalidArgument, "depthwise kernel extents must be odd and positive");
    }
    coeff.assign(static_cast<std::size_t>(channels) * taps(), 0.0);
    if (with_bias) {
        bias.assign(channels, 0.0);
    }
}

DepthwiseKernel3D DepthwiseKernel3D::impulse(int channels, int kt, int kh, int kw)
{
    DepthwiseKernel3D k(channels, kt, kh, kw);
    for (int c = 0; c < channels; ++c) {
        k.at(c, kt / 2, kh / 2, kw / 2) = 1.0;
    }
    return k;
}

FeatureTensor depthwise_conv3d(const FeatureTensor& x, const DepthwiseKernel3D& k, Padding padding)
{
    const Dims d = x.dims();
    if (k.channels != d.c) {
        throw Error(ErrorCode::DimensionMismatch, "kernel has " + std::to_string(k.channels) +
                                                      " channels, input has " + std::to_string(d.c));
    }
    if (!k.bias.empty() && k.bias.size() != static_cast<std::size_t>(k.channels)) {
        throw Error(ErrorCode::DimensionMismatch, "kernel bias length differs from channel count");
    }
    const int rt = k.kt / 2;
    const int rh = k.kh / 2;
    const int rw = k.kw / 2;
    const bool replicate = padding == Padding::Replicate;
    FeatureTensor out(d);
    for (int c = 0; c < d.c; ++c) {
        const double b = k.bias.empty() ? 0.0 : k.bias[c];
        for (int t = 0; t < d.t; ++t) {
            for (int h = 0; h < d.h; ++h) {
                for (int w = 0; w < d.w; ++w) {
                    double acc = 0.0;
                    for (int dt = 0; dt < k.kt; ++dt) {
                        int st = t + dt - rt;
                        if (st < 0 || st >= d.t) {
                            if (!replicate) {
                                continue;
                            }
                            st = std::clamp(st, 0, d.t - 1);
                        }
                        for (int dh = 0; dh < k.kh; ++dh) {
                            int sh = h + dh - rh;
                            if (sh < 0 || sh >= d.h) {
                                if (!replicate) {
                                    continue;
                                }
                                sh = std::clamp(sh, 0, d.h - 1);
                            }
                            for (int dw = 0; dw < k.kw; ++dw) {
                                int sw = w + dw - rw;
                                if (sw < 0 || sw >= d.w) {
                                    if (!replicate) {
                                        continue;
                                    }
                                    sw = std::clamp(sw, 0, d.w - 1);
                                }
                                acc += k.at(c, dt, dh, dw) * x.at(st, sh, sw, c);
                            }
                        }
                    }
                    out.at(t, h, w, c) = acc + b;
                }
            }
        }
    }
    return out;
}

FeatureTensor pointwise_project(const FeatureTensor& x, const Matrix& w)
{
    const Dims d = x.dims();
    if (w.rows() != d.c) {
        throw Error(ErrorCode::DimensionMismatch, "projection rows must equal input channels");
    }
    FeatureTensor out({d.t, d.h, d.w, w.cols()});
    for (int t = 0; t < d.t; ++t) {
        for (int h = 0; h < d.h; ++h) {
            for (int s = 0; s < d.w; ++s) {
                for (int o = 0; o < w.cols(); ++o) {
                    double acc = 0.0;
                    for (int c = 0; c < d.c; ++c) {
                        acc += x.at(t, h, s, c) * w(c, o);
                    }
                    out.at(t, h, s, o) = acc;
                }
            }
        }
    }
    return out;
}

Matrix flatten_positions(const FeatureTensor& x)
{
    const Dims d = x.dims();
    Matrix seq(static_cast<int>(d.positions()), d.c);
    int row = 0;
    for (int t = 0; t < d.t; ++t) {
        for (int h = 0; h < d.h; ++h) {
            for (int w = 0; w < d.w; ++w, ++row) {
                for (int c = 0; c < d.c; ++c) {
                    seq(row, c) = x.at(t, h, w, c);
                }
            }
        }
    }
    return seq;
}

FeatureTensor unflatten_positions(const Matrix& seq, Dims dims)
{
    if (!dims.valid() || static_cast<std::size_t>(seq.rows()) != dims.positions() || seq.cols() != dims.c) {
        throw Error(ErrorCode::DimensionMismatch, "unflatten: sequence shape does not match target dims");
    }
    FeatureTensor out(dims);
    int row = 0;
    for (int t = 0; t < dims.t; ++t) {
        for (int h = 0; h < dims.h; ++h) {
            for (int w = 0; w < dims.w; ++w, ++row) {
                for (int c = 0; c < dims.c; ++c) {
                    out.at(t, h, w, c) = seq(row, c);
                }
            }
        }
    }
    return out;
}

FeatureTensor add(const FeatureTensor& a, const FeatureTensor& b)
{
    if (!(a.dims() == b.dims())) {
        throw Error(ErrorCode::DimensionMismatch, "add: tensor dims differ");
    }
    FeatureTensor out = a;
    auto dst = out.data();
    auto src = b.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
    return out;
}

FeatureTensor scale(const FeatureTensor& a, double s)
{
    FeatureTensor out = a;
    for (double& v : out.data()) {
        v *= s;
    }
    return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, "max_abs_diff: length mismatch");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

} // namespace vbsynth::sta
