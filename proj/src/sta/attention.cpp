#include "vbsynth/sta/attention.hpp"

#include <algorithm>
#include <cmath>

#include "vbsynth/error.hpp"

namespace vbsynth::sta {

AttentionParams::AttentionParams(int heads_, int dim_)
    : heads(heads_), dim(dim_), query(dim_, dim_), key(dim_, dim_), value(dim_, dim_), output(dim_, dim_)
{
    validate();
}

void AttentionParams::validate() const
{
    if (heads < 1 || dim < 1 || dim % heads != 0) {
        throw Error(ErrorCode::InvalidArgument, "attention heads must divide the channel width");
    }
    for (const Matrix* m : {&query, &key, &value, &output}) {
        if (m->rows() != dim || m->cols() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "attention projections must be dim x dim");
        }
    }
}

Matrix multi_head_attention(const Matrix& query_seq, const Matrix& key_seq, const Matrix& value_seq,
                            const AttentionParams& params, AttentionProbe* probe)
{
    params.validate();
    if (key_seq.rows() != value_seq.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "key and value sequences differ in length");
    }
    if (query_seq.cols() != params.dim || key_seq.cols() != params.dim || value_seq.cols() != params.dim) {
        throw Error(ErrorCode::DimensionMismatch, "sequence width differs from attention width");
    }

    const Matrix q = matmul(query_seq, params.query);
    const Matrix k = matmul(key_seq, params.key);
    const Matrix v = matmul(value_seq, params.value);
    const int lq = q.rows();
    const int lk = k.rows();
    const int hd = params.head_dim();
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));

    if (probe != nullptr) {
        probe->heads = params.heads;
        probe->queries = lq;
        probe->keys = lk;
        probe->weights.assign(static_cast<std::size_t>(params.heads) * lq * lk, 0.0);
    }

    Matrix concat(lq, params.dim);
    std::vector<double> scores(lk);
    for (int h = 0; h < params.heads; ++h) {
        const int base = h * hd;
        for (int i = 0; i < lq; ++i) {
            double top = -INFINITY;
            for (int j = 0; j < lk; ++j) {
                double s = 0.0;
                for (int d = 0; d < hd; ++d) {
                    s += q(i, base + d) * k(j, base + d);
                }
                scores[j] = s * inv_sqrt;
                top = std::max(top, scores[j]);
            }
            double total = 0.0;
            for (int j = 0; j < lk; ++j) {
                scores[j] = std::exp(scores[j] - top);
                total += scores[j];
            }
            for (int j = 0; j < lk; ++j) {
                scores[j] /= total;
            }
            if (probe != nullptr) {
                std::copy(scores.begin(), scores.end(),
                          probe->weights.begin() + (static_cast<std::ptrdiff_t>(h) * lq + i) * lk);
            }
            for (int d = 0; d < hd; ++d) {
                double acc = 0.0;
                for (int j = 0; j < lk; ++j) {
                    acc += scores[j] * v(j, base + d);
                }
                concat(i, base + d) = acc;
            }
        }
    }
    return matmul(concat, params.output);
}

} // namespace vbsynth::sta
