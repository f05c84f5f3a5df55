#include "tado/features/features.hpp"

#include <cmath>

#include "tado/diffcore/ops.hpp"
#include "tado/diffcore/param_tree.hpp"
#include "tado/errors.hpp"
#include "tado/layers.hpp"

namespace tado::features {

namespace {

std::size_t width_of(const EmbeddedHistory& history) {
  require_rank(history.matrix, 2, "history");
  if (history.length > history.matrix.dim(0)) throw ContractError("history length exceeds its row count");
  return history.matrix.dim(1);
}

Tensor active_rows(const EmbeddedHistory& history) {
  const std::size_t width = history.matrix.dim(1);
  const auto data = history.matrix.data();
  return Tensor::matrix(history.length, width,
                        std::vector<double>(data.begin(), data.begin() + history.length * width));
}

Tensor row_vector(const EmbeddedHistory& history, std::size_t r) {
  const auto row = history.matrix.row(r);
  return Tensor::vector(std::vector<double>(row.begin(), row.end()));
}

Var run_direction(Tape& tape, const EmbeddedHistory& history, const LstmParams<Var>& p, bool reverse) {
  const std::size_t width = history.matrix.dim(1);
  Var h = tape.constant(Tensor(Shape{width}));
  Var c = tape.constant(Tensor(Shape{width}));
  for (std::size_t step = 0; step < history.length; ++step) {
    const std::size_t r = reverse ? history.length - 1 - step : step;
    const Var state =
        lstm_cell(tape.constant(row_vector(history, r)), h, c, p.input_weights, p.recurrent_weights, p.bias);
    h = slice(state, 0, width);
    c = slice(state, width, width);
  }
  return h;
}

}  // namespace

Var conv_scale(Tape& tape, const EmbeddedHistory& history, const ConvScaleParams<Var>& params) {
  const std::size_t width = width_of(history);
  if (history.degenerate()) return tape.constant(Tensor(Shape{width}));
  const Var rows = tape.constant(active_rows(history));
  return max_over_axis(relu(conv1d_same(rows, params.kernel, params.bias)), 0);
}

std::pair<Var, Var> bilstm_last(Tape& tape, const EmbeddedHistory& history, const RecurrentParams<Var>& params) {
  width_of(history);
  return {run_direction(tape, history, params.forward, false), run_direction(tape, history, params.backward, true)};
}

Var user_features(Tape& tape, const EmbeddedHistory& history, const UserFeatureParams<Var>& params) {
  std::vector<Var> rows;
  for (const auto& scale : params.scales) rows.push_back(conv_scale(tape, history, scale));
  if (params.recurrent) {
    auto [fwd, bwd] = bilstm_last(tape, history, *params.recurrent);
    rows.push_back(fwd);
    rows.push_back(bwd);
  }
  return stack_rows(rows);
}

Var item_features(Tape& tape, const EmbeddedHistory& history, const ItemFeatureParams<Var>& params) {
  if (params.filters.empty()) throw ContractError("item_features: at least one filter is required");
  std::vector<Var> rows;
  for (const auto& filter : params.filters) rows.push_back(conv_scale(tape, history, filter));
  return stack_rows(rows);
}

PooledFeature conv_scale(const EmbeddedHistory& history, const ConvScaleParams<>& params) {
  return on_scratch_tape([&](Tape& tape) {
    return PooledFeature{conv_scale(tape, history, bind(tape, params, false)).value(), history.degenerate()};
  });
}

RecurrentOutput bilstm_last(const EmbeddedHistory& history, const RecurrentParams<>& params) {
  return on_scratch_tape([&](Tape& tape) {
    auto [fwd, bwd] = bilstm_last(tape, history, bind(tape, params, false));
    return RecurrentOutput{fwd.value(), bwd.value(), history.degenerate()};
  });
}

Tensor user_features(const EmbeddedHistory& history, const UserFeatureParams<>& params) {
  return on_scratch_tape(
      [&](Tape& tape) { return user_features(tape, history, bind(tape, params, false)).value(); });
}

Tensor item_features(const EmbeddedHistory& history, const ItemFeatureParams<>& params) {
  return on_scratch_tape(
      [&](Tape& tape) { return item_features(tape, history, bind(tape, params, false)).value(); });
}

ConvScaleParams<> init_conv_scale(std::size_t taps, Rng& rng) {
  return ConvScaleParams<>{uniform_tensor(Shape{taps}, 1.0 / std::sqrt(static_cast<double>(taps)), rng),
                           Tensor(Shape{1})};
}

LstmParams<> init_lstm(std::size_t dim, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  return LstmParams<>{uniform_tensor(Shape{4 * dim, dim}, bound, rng),
                      uniform_tensor(Shape{4 * dim, dim}, bound, rng), uniform_tensor(Shape{4 * dim}, bound, rng)};
}

UserFeatureParams<> init_user_features(std::size_t dim, bool with_recurrent, Rng& rng) {
  UserFeatureParams<> p;
  for (std::size_t s = 0; s < kUserKernelSizes.size(); ++s) p.scales[s] = init_conv_scale(kUserKernelSizes[s], rng);
  if (with_recurrent) p.recurrent = RecurrentParams<>{init_lstm(dim, rng), init_lstm(dim, rng)};
  return p;
}

ItemFeatureParams<> init_item_features(std::size_t rows, Rng& rng) {
  ItemFeatureParams<> p;
  for (std::size_t r = 0; r < rows; ++r) p.filters.push_back(init_conv_scale(kItemKernelSize, rng));
  return p;
}

}  // namespace tado::features
