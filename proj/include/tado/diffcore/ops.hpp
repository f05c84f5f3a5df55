#pragma once

#include <cstddef>
#include <vector>

#include "tado/diffcore/tape.hpp"
#include "tado/diffcore/tensor.hpp"
#include "tado/rng.hpp"

namespace tado {

// Value-level kernels shared by the recorded primitives below.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& m);
Tensor softmax_rows(const Tensor& m);

struct AxisMax {
  Tensor values;
  std::vector<std::size_t> argmax;  // flat index into the input, one per output entry
};

/// Maximum along `axis` of a rank-1 or rank-2 tensor. Ties resolve to the
/// lowest index.
AxisMax max_over_axis(const Tensor& t, std::size_t axis);

/// Inverted-dropout mask: entries are 0 with probability `rate`, otherwise
/// 1 / (1 - rate).
Tensor dropout_mask(const Shape& shape, double rate, Rng& rng);

// Recorded primitives. Each has an exact reverse rule.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var square(Var a);

/// (m x k) * (k x n).
Var matmul(Var a, Var b);
/// (m x k) * (k).
Var matvec(Var a, Var x);
Var transpose(Var m);
/// Adds a length-n vector to every row of an (m x n) matrix.
Var broadcast_add_rows(Var m, Var v);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var log(Var a);
Var exp(Var a);

/// Concatenation of rank-1 tensors.
Var concat(const std::vector<Var>& parts);
/// Stacks equal-length rank-1 tensors as matrix rows.
Var stack_rows(const std::vector<Var>& rows);
/// Contiguous range of a rank-1 tensor.
Var slice(Var v, std::size_t offset, std::size_t length);
/// Rows [begin, end) of a rank-2 tensor.
Var slice_rows(Var m, std::size_t begin, std::size_t end);
Var reshape(Var a, Shape shape);
Var flatten(Var a);

Var max_over_axis(Var a, std::size_t axis);
Var softmax_rows(Var m);
Var softmax(Var v);
Var log_softmax(Var v);

/// Elementwise product with a fixed mask.
Var apply_mask(Var a, const Tensor& mask);
/// Inverted dropout; identity when rate is 0.
Var dropout(Var a, double rate, Rng& rng);

/// Depthwise 1-D convolution along the row axis of an (L x V) input with
/// one k-tap kernel shared across all V channels, zero same-padding and a
/// scalar bias. k must be odd.
Var conv1d_same(Var input, Var kernel, Var bias);

/// One LSTM step with hidden size H. Pre-activations are
/// input_weights * x + recurrent_weights * h + bias (4H, gate blocks input,
/// forget, cell, output); returns the concatenation [h'; c'] (2H).
Var lstm_cell(Var x, Var h, Var c, Var input_weights, Var recurrent_weights, Var bias);

Var sum(Var a);
Var mean(Var a);
Var dot(Var a, Var b);
/// Single entry of a rank-1 tensor as a scalar.
Var pick(Var v, std::size_t index);

}  // namespace tado
