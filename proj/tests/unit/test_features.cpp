#include <cmath>
#include <vector>

#include "doctest.h"
#include "support/model_oracles.hpp"
#include "support/random_tensors.hpp"
#include "tado/diffcore/grad_check.hpp"
#include "tado/diffcore/ops.hpp"
#include "tado/diffcore/param_tree.hpp"
#include "tado/features/features.hpp"

using namespace tado;
using namespace tado::features;
using tado::testing::random_tensor;
using tado::testing::Vec;

namespace {

EmbeddedHistory history_of(const std::vector<Vec>& rows, std::size_t max_len) {
  const std::size_t width = rows.empty() ? 1 : rows.front().size();
  EmbeddedHistory h{Tensor(Shape{max_len, width}), rows.size()};
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) h.matrix(r, c) = rows[r][c];
  return h;
}

std::vector<Vec> random_rows(Rng& rng, std::size_t count, std::size_t width) {
  std::vector<Vec> rows(count, Vec(width));
  for (auto& row : rows)
    for (double& v : row) v = rng.uniform(-1.0, 1.0);
  return rows;
}

ConvScaleParams<> conv(std::vector<double> kernel, double bias) {
  return {Tensor::vector(std::move(kernel)), Tensor::vector({bias})};
}

Vec to_vec(const Tensor& t) { return Vec(t.data().begin(), t.data().end()); }

Vec row_of(const Tensor& m, std::size_t r) {
  const auto row = m.row(r);
  return Vec(row.begin(), row.end());
}

UserFeatureParams<> zero_user_params(std::size_t dim) {
  Rng rng(0);
  UserFeatureParams<> p = init_user_features(dim, true, rng);
  for (Tensor* t : leaf_pointers(p)) *t *= 0.0;
  return p;
}

}  // namespace

TEST_CASE("conv_scale examples") {
  const auto h = history_of({{1.0}, {2.0}, {3.0}}, 4);
  CHECK(conv_scale(h, conv({0.0, 1.0, 0.0}, 0.0)).values[0] == 3.0);
  CHECK(conv_scale(h, conv({1.0, 1.0, 1.0}, 0.0)).values[0] == 6.0);

  const auto single = history_of({{0.5, 0.0, 2.0}}, 3);
  const PooledFeature out = conv_scale(single, conv({1.0}, 0.0));
  CHECK(out.values == Tensor::vector({0.5, 0.0, 2.0}));
  CHECK_FALSE(out.degenerate);

  const PooledFeature empty = conv_scale(EmbeddedHistory{Tensor(Shape{3, 2}), 0}, conv({1.0, 1.0, 1.0}, 0.5));
  CHECK(empty.degenerate);
  CHECK(empty.values == Tensor(Shape{2}));
}

TEST_CASE("conv_scale matches the independent convolution oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 1 + rng.below(6), width = 1 + rng.below(4);
    const std::size_t taps = 2 * rng.below(3) + 1;
    const auto rows = random_rows(rng, len, width);
    const Tensor kernel = random_tensor(rng, Shape{taps});
    const double bias = rng.uniform(-0.5, 0.5);
    const Vec expect = tado::testing::conv_pool_oracle(rows, to_vec(kernel), bias);
    const Tensor got = conv_scale(history_of(rows, len + rng.below(3)), {kernel, Tensor::vector({bias})}).values;
    for (std::size_t c = 0; c < width; ++c) CHECK(std::abs(got[c] - expect[c]) < 1e-12);
  }
}

TEST_CASE("bilstm_last examples") {
  Rng rng(5);
  const std::size_t dim = 3;
  RecurrentParams<> zero{init_lstm(dim, rng), init_lstm(dim, rng)};
  for (Tensor* t : leaf_pointers(zero)) *t *= 0.0;
  const auto h = history_of(random_rows(rng, 4, dim), 5);
  const RecurrentOutput z = bilstm_last(h, zero);
  CHECK(z.forward == Tensor(Shape{dim}));
  CHECK(z.backward == Tensor(Shape{dim}));

  const LstmParams<> cell = init_lstm(dim, rng);
  const RecurrentOutput one = bilstm_last(history_of(random_rows(rng, 1, dim), 2), {cell, cell});
  CHECK(identical(one.forward, one.backward));

  const RecurrentOutput empty = bilstm_last(EmbeddedHistory{Tensor(Shape{2, dim}), 0}, {cell, cell});
  CHECK(empty.degenerate);
  CHECK(empty.forward == Tensor(Shape{dim}));
}

TEST_CASE("bilstm_last matches the step-by-step oracle") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + rng.below(4), len = trial < 10 ? 2 : 1 + rng.below(5);
    const RecurrentParams<> p{init_lstm(dim, rng), init_lstm(dim, rng)};
    const auto rows = random_rows(rng, len, dim);
    const RecurrentOutput got = bilstm_last(history_of(rows, len + 2), p);
    const tado::testing::LstmOracle fwd{p.forward.input_weights, p.forward.recurrent_weights, p.forward.bias};
    const tado::testing::LstmOracle bwd{p.backward.input_weights, p.backward.recurrent_weights, p.backward.bias};
    const Vec ef = fwd.run(rows);
    const Vec eb = bwd.run(std::vector<Vec>(rows.rbegin(), rows.rend()));
    for (std::size_t c = 0; c < dim; ++c) {
      CHECK(std::abs(got.forward[c] - ef[c]) < 1e-12);
      CHECK(std::abs(got.backward[c] - eb[c]) < 1e-12);
    }
  }
}

TEST_CASE("user_features stacks rows in fixed order") {
  const std::size_t dim = 4;
  const UserFeatureParams<> zero = zero_user_params(dim);
  const Tensor z = user_features(history_of({Vec(dim, 0.0)}, 3), zero);
  CHECK(z == Tensor(Shape{5, dim}));

  Rng rng(13);
  const UserFeatureParams<> p = init_user_features(dim, true, rng);
  const auto h = history_of(random_rows(rng, 4, dim), 6);
  const Tensor f = user_features(h, p);
  REQUIRE(f.shape() == Shape{5, dim});
  for (std::size_t s = 0; s < 3; ++s) CHECK(row_of(f, s) == to_vec(conv_scale(h, p.scales[s]).values));
  const RecurrentOutput rec = bilstm_last(h, *p.recurrent);
  CHECK(row_of(f, 3) == to_vec(rec.forward));
  CHECK(row_of(f, 4) == to_vec(rec.backward));
  CHECK(identical(f, user_features(h, p)));

  UserFeatureParams<> without = p;
  without.recurrent.reset();
  CHECK(user_features(h, without).shape() == Shape{3, dim});
  CHECK(without.rows() == 3);
  CHECK(p.rows() == 5);
}

TEST_CASE("item_features examples") {
  Rng rng(17);
  const std::size_t dim = 3;
  ItemFeatureParams<> zero = init_item_features(5, rng);
  for (Tensor* t : leaf_pointers(zero)) *t *= 0.0;
  const auto h = history_of(random_rows(rng, 3, dim), 4);
  CHECK(item_features(h, zero) == Tensor(Shape{5, dim}));

  const ItemFeatureParams<> p = init_item_features(5, rng);
  const Tensor f = item_features(h, p);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(p.filters[j].kernel.size() == kItemKernelSize);
    CHECK(row_of(f, j) == to_vec(conv_scale(h, p.filters[j]).values));
  }
  EmbeddedHistory twin = h;
  CHECK(identical(item_features(twin, p), f));
}

TEST_CASE("padding rows never change features") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + rng.below(4), len = 1 + rng.below(5);
    const UserFeatureParams<> p = init_user_features(dim, true, rng);
    const auto rows = random_rows(rng, len, dim);
    EmbeddedHistory tight = history_of(rows, len);
    EmbeddedHistory padded = history_of(rows, len + 1 + rng.below(4));
    const Tensor base = user_features(tight, p);
    CHECK(identical(base, user_features(padded, p)));
    // Garbage beyond `length` is never read either.
    for (std::size_t r = len; r < padded.matrix.dim(0); ++r)
      for (std::size_t c = 0; c < dim; ++c) padded.matrix(r, c) = rng.uniform(-9.0, 9.0);
    CHECK(identical(base, user_features(padded, p)));
  }
}

TEST_CASE("reversing reviews swaps the recurrent rows") {
  Rng rng(34);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 1 + rng.below(4), len = 1 + rng.below(5);
    const LstmParams<> cell = init_lstm(dim, rng);
    const RecurrentParams<> p{cell, cell};
    const auto rows = random_rows(rng, len, dim);
    const RecurrentOutput a = bilstm_last(history_of(rows, len), p);
    const RecurrentOutput b = bilstm_last(history_of(std::vector<Vec>(rows.rbegin(), rows.rend()), len), p);
    CHECK(identical(a.forward, b.backward));
    CHECK(identical(a.backward, b.forward));
  }
}

TEST_CASE("feature gradients pass the finite-difference check") {
  Rng rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t dim = 2 + rng.below(2), len = 1 + rng.below(4);
    const UserFeatureParams<> up = init_user_features(dim, true, rng);
    const ItemFeatureParams<> ip = init_item_features(5, rng);
    const EmbeddedHistory h = history_of(random_rows(rng, len, dim), len + 1);
    const Tensor mix_u = random_tensor(rng, Shape{5, dim});
    const Tensor mix_i = random_tensor(rng, Shape{5, dim});

    const std::vector<Tensor> user_leaves = leaf_values(up);
    const auto user_fn = [&](Tape& tape, std::span<const Var> vars) {
      return sum(mul(user_features(tape, h, rebind(up, vars)), tape.constant(mix_u)));
    };
    CHECK(grad_check(user_fn, user_leaves).max_relative_error < 1e-4);

    const std::vector<Tensor> item_leaves = leaf_values(ip);
    const auto item_fn = [&](Tape& tape, std::span<const Var> vars) {
      return sum(mul(item_features(tape, h, rebind(ip, vars)), tape.constant(mix_i)));
    };
    CHECK(grad_check(item_fn, item_leaves).max_relative_error < 1e-4);
  }
}
