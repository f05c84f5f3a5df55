#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "tado/data/dataset.hpp"
#include "tado/diffcore/tape.hpp"
#include "tado/rng.hpp"

namespace tado::features {

using data::EmbeddedHistory;

/// One convolution scale: k taps shared across every channel and a scalar
/// bias. k is odd.
template <class T = Tensor>
struct ConvScaleParams {
  T kernel;  // (k)
  T bias;    // (1)

  auto tie() { return std::tie(kernel, bias); }
  auto tie() const { return std::tie(kernel, bias); }
  static constexpr std::array<std::string_view, 2> names{"kernel", "bias"};
};

/// LSTM cell with hidden size equal to the input size V. Gate blocks are
/// stacked in the order input, forget, cell, output.
template <class T = Tensor>
struct LstmParams {
  T input_weights;      // (4V x V)
  T recurrent_weights;  // (4V x V)
  T bias;               // (4V)

  auto tie() { return std::tie(input_weights, recurrent_weights, bias); }
  auto tie() const { return std::tie(input_weights, recurrent_weights, bias); }
  static constexpr std::array<std::string_view, 3> names{"input_weights", "recurrent_weights", "bias"};
};

template <class T = Tensor>
struct RecurrentParams {
  LstmParams<T> forward;
  LstmParams<T> backward;

  auto tie() { return std::tie(forward, backward); }
  auto tie() const { return std::tie(forward, backward); }
  static constexpr std::array<std::string_view, 2> names{"forward", "backward"};
};

inline constexpr std::array<std::size_t, 3> kUserKernelSizes{1, 3, 5};
inline constexpr std::size_t kItemKernelSize = 3;

/// Scales for kernel sizes 1, 3, 5 and, unless ablated, the Bi-LSTM.
template <class T = Tensor>
struct UserFeatureParams {
  std::array<ConvScaleParams<T>, 3> scales;
  std::optional<RecurrentParams<T>> recurrent;

  std::size_t rows() const { return scales.size() + (recurrent ? 2 : 0); }

  auto tie() { return std::tie(scales, recurrent); }
  auto tie() const { return std::tie(scales, recurrent); }
  static constexpr std::array<std::string_view, 2> names{"scales", "recurrent"};
};

/// One kernel-3 filter per feature row.
template <class T = Tensor>
struct ItemFeatureParams {
  std::vector<ConvScaleParams<T>> filters;

  std::size_t rows() const { return filters.size(); }

  auto tie() { return std::tie(filters); }
  auto tie() const { return std::tie(filters); }
  static constexpr std::array<std::string_view, 1> names{"filters"};
};

// Recorded forward passes. History rows at or beyond `length` are never read.

/// relu(depthwise conv) max-pooled over the first `length` rows; the zero
/// vector for an empty history.
Var conv_scale(Tape& tape, const EmbeddedHistory& history, const ConvScaleParams<Var>& params);

/// Final hidden states of the forward (rows 0..length-1) and backward
/// (rows length-1..0) recurrences; zero vectors for an empty history.
std::pair<Var, Var> bilstm_last(Tape& tape, const EmbeddedHistory& history, const RecurrentParams<Var>& params);

/// Rows stacked as [conv k=1; conv k=3; conv k=5; forward; backward].
Var user_features(Tape& tape, const EmbeddedHistory& history, const UserFeatureParams<Var>& params);

/// Row j is conv_scale with filter j.
Var item_features(Tape& tape, const EmbeddedHistory& history, const ItemFeatureParams<Var>& params);

// Plain evaluation.

struct PooledFeature {
  Tensor values;
  bool degenerate = false;
};

struct RecurrentOutput {
  Tensor forward;
  Tensor backward;
  bool degenerate = false;
};

PooledFeature conv_scale(const EmbeddedHistory& history, const ConvScaleParams<>& params);
RecurrentOutput bilstm_last(const EmbeddedHistory& history, const RecurrentParams<>& params);
Tensor user_features(const EmbeddedHistory& history, const UserFeatureParams<>& params);
Tensor item_features(const EmbeddedHistory& history, const ItemFeatureParams<>& params);

ConvScaleParams<> init_conv_scale(std::size_t taps, Rng& rng);
LstmParams<> init_lstm(std::size_t dim, Rng& rng);
UserFeatureParams<> init_user_features(std::size_t dim, bool with_recurrent, Rng& rng);
ItemFeatureParams<> init_item_features(std::size_t rows, Rng& rng);

}  // namespace tado::features
