#include <cmath>
#include <vector>

#include "doctest.h"
#include "support/model_oracles.hpp"
#include "support/random_tensors.hpp"
#include "tado/diffcore/grad_check.hpp"
#include "tado/diffcore/ops.hpp"
#include "tado/diffcore/param_tree.hpp"
#include "tado/errors.hpp"
#include "tado/interaction/interaction.hpp"

using namespace tado;
using namespace tado::interaction;
using tado::testing::matvec_oracle;
using tado::testing::random_tensor;
using tado::testing::Vec;

namespace {

Vec flat(const Tensor& t) { return Vec(t.data().begin(), t.data().end()); }

Vec join(Vec a, const Vec& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Vec mlp_oracle(const MlpParams<>& p, const Vec& x) {
  Vec h = matvec_oracle(p.hidden.weight, x);
  for (std::size_t j = 0; j < h.size(); ++j) h[j] = std::max(0.0, h[j] + p.hidden.bias[j]);
  Vec y = matvec_oracle(p.output.weight, h);
  const Vec s = matvec_oracle(p.skip, x);
  for (std::size_t j = 0; j < y.size(); ++j) y[j] += p.output.bias[j] + s[j];
  return y;
}

template <class P>
P zeroed(P p) {
  for (Tensor* t : leaf_pointers(p)) *t *= 0.0;
  return p;
}

}  // namespace

TEST_CASE("fuse examples") {
  Rng rng(1);
  const std::size_t r = 2, dim = 3, h = 2, classes = 5;
  const auto m = [&] { return random_tensor(rng, Shape{r, dim}); };
  const Tensor f_u = m(), z_u = m(), f_i = m(), z_i = m();

  InteractionParams<> p = init_interaction(r, dim, h, classes, rng);
  InteractionParams<> absorbing = p;
  absorbing.item_fusion = zeroed(p.item_fusion);
  const Tensor absorbed = fuse(f_u, z_u, f_i, z_i, absorbing);
  for (double v : absorbed.data()) CHECK(v == 0.0);

  InteractionParams<> twin = p;
  twin.item_fusion = p.user_fusion;
  const Tensor s = fuse(f_u, z_u, f_u, z_u, twin);
  const Vec user = mlp_oracle(p.user_fusion, join(flat(f_u), flat(z_u)));
  for (std::size_t j = 0; j < h; ++j) CHECK(std::abs(s[j] - user[j] * user[j]) < 1e-12);

  const Tensor got = fuse(f_u, z_u, f_i, z_i, p);
  const Vec item = mlp_oracle(p.item_fusion, join(flat(f_i), flat(z_i)));
  for (std::size_t j = 0; j < h; ++j) CHECK(std::abs(got[j] - user[j] * item[j]) < 1e-12);

  CHECK_THROWS_AS(fuse(f_u, random_tensor(rng, Shape{3, dim}), f_i, z_i, p), ShapeError);
}

TEST_CASE("fuse commutes with swapping streams and parameters") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t r = 1 + rng.below(4), dim = 1 + rng.below(4), h = 1 + rng.below(5);
    const InteractionParams<> p = init_interaction(r, dim, h, 5, rng);
    InteractionParams<> swapped = p;
    std::swap(swapped.user_fusion, swapped.item_fusion);
    const auto m = [&] { return random_tensor(rng, Shape{r, dim}); };
    const Tensor f_u = m(), z_u = m(), f_i = m(), z_i = m();
    CHECK(identical(fuse(f_u, z_u, f_i, z_i, p), fuse(f_i, z_i, f_u, z_u, swapped)));
  }
}

TEST_CASE("interaction_vector examples") {
  Rng rng(3);
  const std::size_t r = 2, dim = 3, h = 4, classes = 5;
  const InteractionParams<> p = init_interaction(r, dim, h, classes, rng);
  const Tensor z_u = random_tensor(rng, Shape{r, dim}), z_i = random_tensor(rng, Shape{r, dim});
  const Tensor s = random_tensor(rng, Shape{h});

  const Tensor eval = interaction_vector(z_u, z_i, s, p);
  CHECK(identical(eval, interaction_vector(z_u, z_i, s, p)));
  const Vec expect = mlp_oracle(p.output, join(join(flat(z_u), flat(z_i)), flat(s)));
  for (std::size_t c = 0; c < classes; ++c) CHECK(std::abs(eval[c] - expect[c]) < 1e-12);

  InteractionParams<> bias_only = zeroed(p);
  bias_only.output.output.bias = Tensor::vector({1, -2, 3, -4, 5});
  const Tensor z = interaction_vector(Tensor(Shape{r, dim}), Tensor(Shape{r, dim}), Tensor(Shape{h}), bias_only);
  CHECK(z == bias_only.output.output.bias);

  Tape tape;
  Rng dropout_rng(9);
  const auto bound = bind(tape, p, false);
  const Var zero_rate = interaction_vector(tape.constant(z_u), tape.constant(z_i), tape.constant(s), bound,
                                           DropoutSpec{0.0, &dropout_rng});
  CHECK(identical(zero_rate.value(), eval));
  const Var dropped = interaction_vector(tape.constant(z_u), tape.constant(z_i), tape.constant(s), bound,
                                         DropoutSpec{0.2, &dropout_rng});
  CHECK(dropped.value().all_finite());
  CHECK(dropped.shape() == Shape{classes});
}

TEST_CASE("direct head without the interaction component") {
  Rng rng(4);
  const std::size_t r = 3, dim = 2;
  const AffineParams<> head = init_affine(5, 2 * r * dim, Shape{5}, rng);
  const Tensor z_u = random_tensor(rng, Shape{r, dim}), z_i = random_tensor(rng, Shape{r, dim});
  Tape tape;
  const Var z = direct_vector(tape.constant(z_u), tape.constant(z_i), bind(tape, head, false), DropoutSpec::eval());
  const Vec x = join(flat(z_u), flat(z_i));
  const Vec y = matvec_oracle(head.weight, x);
  for (std::size_t c = 0; c < 5; ++c) CHECK(std::abs(z.value()[c] - (y[c] + head.bias[c])) < 1e-12);
}

TEST_CASE("interaction gradients pass the finite-difference check") {
  Rng rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t r = 1 + rng.below(3), dim = 1 + rng.below(3), h = 1 + rng.below(4);
    const InteractionParams<> p = init_interaction(r, dim, h, 5, rng);
    std::vector<Tensor> leaves = leaf_values(p);
    const std::size_t n = leaves.size();
    for (int i = 0; i < 4; ++i) leaves.push_back(random_tensor(rng, Shape{r, dim}));
    const Tensor mix = random_tensor(rng, Shape{5});
    const auto fn = [&](Tape& tape, std::span<const Var> vars) {
      const auto bound = rebind(p, vars.first(n));
      const Var s = fuse(vars[n], vars[n + 1], vars[n + 2], vars[n + 3], bound);
      const Var z = interaction_vector(vars[n + 1], vars[n + 3], s, bound, DropoutSpec::eval());
      return dot(z, tape.constant(mix));
    };
    CHECK(grad_check(fn, leaves).max_relative_error < 1e-4);
  }
}
