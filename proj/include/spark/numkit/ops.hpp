#pragma once

#include <cstddef>
#include <span>

#include "spark/numkit/tape.hpp"
#include "spark/numkit/tensor.hpp"

// Differentiable primitives recorded on a Tape. All inputs must live on the
// same tape. Shapes are passed explicitly where a flat node is ambiguous.
namespace spark::numkit::ops {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var silu(Var a);

// Row-wise affine map. `x` holds `rows` row vectors of width w.cols
// (flattened); `w` is (out_dim x in_dim). Output is rows x out_dim.
// `bias` may be null.
Var linear(Var x, Var w, std::size_t out_dim, const Var* bias = nullptr, std::size_t rows = 1);

Var slice(Var a, std::size_t offset, std::size_t length);
Var concat(std::span<const Var> parts);

Var softmax(Var a);
Var layer_norm(Var a, Var gain, Var bias, double eps);

// ln(1 + |DFT(a)|). The gradient at a bin with zero magnitude is taken as 0.
Var log_magnitude(Var a);

// sum_e weights[e] * values[e].
Var mix(std::span<const Var> values, Var weights);

// Multi-head scaled dot-product attention over `tokens` rows of width
// model_dim = q.size() / tokens, split into `heads` heads. Queries come
// from q; keys and values from k and v (same token count).
Var attention(Var q, Var k, Var v, std::size_t tokens, std::size_t heads);

// Attention weights for one head: tokens x tokens, row-major, rows sum to 1.
numkit::RealVec attention_weights(std::span<const double> q, std::span<const double> k, std::size_t tokens,
                          std::size_t heads, std::size_t head);

Var sum(Var a);
Var squared_distance(Var a, Var b);
Var bce_with_logits(Var logit, int label);

}  // namespace spark::numkit::ops
