#pragma once

#include <cstddef>
#include <vector>

#include "vbsynth/rng.hpp"
#include "vbsynth/sta/tensor.hpp"

namespace vbsynth::sta {

/// Multi-head attention over width `dim`. Head h owns columns
/// [h * head_dim, (h + 1) * head_dim) of the Q/K/V projections and the
/// matching rows of the output projection. No biases.
struct AttentionParams {
    int heads = 1;
    int dim = 1;
    Matrix query;  ///< dim x dim
    Matrix key;    ///< dim x dim
    Matrix value;  ///< dim x dim
    Matrix output; ///< dim x dim

    AttentionParams() = default;
    AttentionParams(int heads, int dim);

    int head_dim() const { return dim / heads; }
    std::size_t parameter_count() const { return 4 * static_cast<std::size_t>(dim) * dim; }
    /// Throws InvalidArgument if heads does not divide dim or shapes disagree.
    void validate() const;
};

/// Receives the softmax weights of the last call, laid out [head][query][key].
struct AttentionProbe {
    int heads = 0;
    int queries = 0;
    int keys = 0;
    std::vector<double> weights;

    double weight(int head, int q, int k) const
    {
        return weights[(static_cast<std::size_t>(head) * queries + q) * keys + k];
    }
};

/// Scaled dot-product attention, scores / sqrt(head_dim), max-subtracted softmax,
/// heads concatenated then output-projected. Output has one row per query.
Matrix multi_head_attention(const Matrix& query_seq, const Matrix& key_seq, const Matrix& value_seq,
                            const AttentionParams& params, AttentionProbe* probe = nullptr);

} // namespace vbsynth::sta
