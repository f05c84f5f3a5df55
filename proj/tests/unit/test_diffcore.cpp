#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "support/random_tensors.hpp"
#include "tado/diffcore/grad_check.hpp"
#include "tado/diffcore/ops.hpp"
#include "tado/errors.hpp"

using namespace tado;
using tado::testing::random_tensor;

TEST_CASE("softmax_rows examples") {
  const Tensor uniform = softmax_rows(Tensor(Shape{1, 5}, 0.0));
  for (double v : uniform.data()) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));

  // exp(k) / (e + e^2 + e^3) evaluated independently.
  const Tensor s = softmax_rows(Tensor::matrix({{1.0, 2.0, 3.0}}));
  CHECK(std::abs(s[0] - 0.09003) < 1e-5);
  CHECK(std::abs(s[1] - 0.24473) < 1e-5);
  CHECK(std::abs(s[2] - 0.66524) < 1e-5);

  for (double c : {-50.0, 0.0, 3.5, 700.0}) {
    const Tensor flat = softmax_rows(Tensor::matrix({{c, c, c}}));
    for (double v : flat.data()) CHECK(std::abs(v - 1.0 / 3.0) < 1e-12);
  }

  CHECK_THROWS_AS(softmax_rows(Tensor::vector({1.0, 2.0})), ShapeError);
}

TEST_CASE("softmax_rows rows sum to one and are shift invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.below(6), cols = 1 + rng.below(8);
    Tensor m = random_tensor(rng, Shape{rows, cols}, -30.0, 30.0);
    const Tensor s = softmax_rows(m);
    Tensor shifted = m;
    const double c = rng.uniform(-10.0, 10.0);
    for (std::size_t j = 0; j < cols; ++j) shifted(0, j) += c;
    const Tensor s2 = softmax_rows(shifted);
    for (std::size_t i = 0; i < rows; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        CHECK(s(i, j) > 0.0);
        total += s(i, j);
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
    for (std::size_t j = 0; j < cols; ++j) CHECK(std::abs(s(0, j) - s2(0, j)) < 1e-12);
  }
}

TEST_CASE("primitive forward values") {
  Tape tape;
  CHECK(tanh(tape.constant(Tensor::scalar(0.0))).value().item() == 0.0);
  CHECK(sigmoid(tape.constant(Tensor::scalar(0.0))).value().item() == 0.5);
  CHECK(sigmoid(tape.constant(Tensor::scalar(-800.0))).value().item() >= 0.0);

  const AxisMax m = max_over_axis(Tensor::vector({3.0, 6.0, 5.0}), 0);
  CHECK(m.values.item() == 6.0);
  CHECK(m.argmax[0] == 1);

  const AxisMax tie = max_over_axis(Tensor::vector({2.0, 7.0, 7.0}), 0);
  CHECK(tie.argmax[0] == 1);

  const AxisMax cols = max_over_axis(Tensor::matrix({{1.0, 9.0}, {4.0, 2.0}}), 0);
  CHECK(cols.values[0] == 4.0);
  CHECK(cols.values[1] == 9.0);
  const AxisMax rows = max_over_axis(Tensor::matrix({{1.0, 9.0}, {4.0, 2.0}}), 1);
  CHECK(rows.values[0] == 9.0);
  CHECK(rows.values[1] == 4.0);

  const Tensor prod = matmul(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::matrix({{5, 6}, {7, 8}}));
  CHECK(identical(prod, Tensor::matrix({{19, 22}, {43, 50}})));

  const Var c = conv1d_same(tape.constant(Tensor::matrix({{1}, {2}, {3}})),
                            tape.constant(Tensor::vector({1, 1, 1})), tape.constant(Tensor::vector({0})));
  CHECK(identical(c.value(), Tensor::matrix({{3}, {6}, {5}})));

  const Var row = broadcast_add_rows(tape.constant(Tensor::matrix({{1, 2}, {3, 4}})),
                                     tape.constant(Tensor::vector({10, 20})));
  CHECK(identical(row.value(), Tensor::matrix({{11, 22}, {13, 24}})));
}

TEST_CASE("primitives reject incompatible shapes") {
  Tape tape;
  const Var a = tape.constant(Tensor(Shape{2, 3}));
  const Var b = tape.constant(Tensor(Shape{2, 2}));
  CHECK_THROWS_AS(add(a, b), ShapeError);
  CHECK_THROWS_AS(mul(a, b), ShapeError);
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
  CHECK_THROWS_AS(matvec(a, tape.constant(Tensor(Shape{2}))), ShapeError);
  CHECK_THROWS_AS(concat({a}), ShapeError);
  CHECK_THROWS_AS(conv1d_same(a, tape.constant(Tensor(Shape{2})), tape.constant(Tensor(Shape{1}))),
                  ShapeError);
  CHECK_THROWS_AS(slice(tape.constant(Tensor(Shape{3})), 2, 2), ShapeError);
  const Var h = tape.constant(Tensor(Shape{2}));
  CHECK_THROWS_AS(lstm_cell(tape.constant(Tensor(Shape{3})), h, h, tape.constant(Tensor(Shape{8, 2})),
                            tape.constant(Tensor(Shape{8, 2})), tape.constant(Tensor(Shape{8}))),
                  ShapeError);
}

TEST_CASE("dropout identities") {
  Rng rng(3);
  Tape tape;
  const Tensor x = random_tensor(rng, Shape{4, 5});
  const Var v = tape.constant(x);
  CHECK(identical(dropout(v, 0.0, rng).value(), x));

  const Tensor mask = dropout_mask(Shape{10000}, 0.2, rng);
  std::size_t dropped = 0;
  for (double m : mask.data()) {
    if (m == 0.0) {
      ++dropped;
    } else {
      CHECK(m == doctest::Approx(1.25));
    }
  }
  CHECK(dropped > 1800);
  CHECK(dropped < 2200);
}

TEST_CASE("grad_check contract examples") {
  const ScalarFn square_fn = [](Tape&, std::span<const Var> p) { return square(p[0]); };
  const std::vector<Tensor> x{Tensor::scalar(3.0)};
  CHECK(grad_check(square_fn, x, 1e-6).max_relative_error < 1e-8);

  const ScalarFn constant_fn = [](Tape& t, std::span<const Var>) { return t.constant(Tensor::scalar(4.0)); };
  CHECK(grad_check(constant_fn, x, 1e-6).max_relative_error == 0.0);

  const ScalarFn vector_fn = [](Tape&, std::span<const Var> p) { return p[0]; };
  const std::vector<Tensor> v{Tensor::vector({1.0, 2.0})};
  CHECK_THROWS_AS(grad_check(vector_fn, v, 1e-6), ContractError);
  CHECK_THROWS_AS(grad_check(square_fn, x, 1e-2), ContractError);
}

namespace {

struct PrimitiveCase {
  const char* name;
  std::vector<Shape> shapes;
  std::function<Var(Tape&, std::span<const Var>)> op;
};

// Every case reduces through a fixed random projection so each output entry
// contributes a distinct weight to the scalar.
double check_primitive(const PrimitiveCase& c, Rng& rng) {
  std::vector<Tensor> inputs;
  for (const Shape& s : c.shapes) inputs.push_back(random_tensor(rng, s, -2.0, 2.0));
  const std::uint64_t projection_seed = rng.next();
  const ScalarFn fn = [&c, projection_seed](Tape& tape, std::span<const Var> p) {
    const Var out = c.op(tape, p);
    Rng proj(projection_seed);
    return dot(out, tape.constant(random_tensor(proj, out.value().shape())));
  };
  return grad_check(fn, inputs, 1e-6).max_relative_error;
}

}  // namespace

TEST_CASE("every primitive gradient matches central differences over 100 seeds") {
  Rng mask_rng(5);
  const Tensor mask4x3 = dropout_mask(Shape{4, 3}, 0.4, mask_rng);
  const std::vector<PrimitiveCase> cases{
      {"add", {{3, 4}, {3, 4}}, [](Tape&, auto p) { return add(p[0], p[1]); }},
      {"sub", {{3, 4}, {3, 4}}, [](Tape&, auto p) { return sub(p[0], p[1]); }},
      {"mul", {{3, 4}, {3, 4}}, [](Tape&, auto p) { return mul(p[0], p[1]); }},
      {"square", {{5}}, [](Tape&, auto p) { return square(p[0]); }},
      {"scale", {{5}}, [](Tape&, auto p) { return scale(p[0], -1.7); }},
      {"add_scalar", {{5}}, [](Tape&, auto p) { return add_scalar(p[0], 0.3); }},
      {"matmul", {{3, 4}, {4, 2}}, [](Tape&, auto p) { return matmul(p[0], p[1]); }},
      {"matvec", {{3, 4}, {4}}, [](Tape&, auto p) { return matvec(p[0], p[1]); }},
      {"transpose", {{3, 4}}, [](Tape&, auto p) { return transpose(p[0]); }},
      {"broadcast_add_rows", {{3, 4}, {4}}, [](Tape&, auto p) { return broadcast_add_rows(p[0], p[1]); }},
      {"tanh", {{6}}, [](Tape&, auto p) { return tanh(p[0]); }},
      {"sigmoid", {{6}}, [](Tape&, auto p) { return sigmoid(p[0]); }},
      {"relu", {{6}}, [](Tape&, auto p) { return relu(p[0]); }},
      {"log", {{6}}, [](Tape&, auto p) { return log(add_scalar(square(p[0]), 0.5)); }},
      {"exp", {{6}}, [](Tape&, auto p) { return exp(p[0]); }},
      {"concat", {{2}, {3}}, [](Tape&, auto p) { return concat({p[0], p[1], p[0]}); }},
      {"stack_rows", {{3}, {3}}, [](Tape&, auto p) { return stack_rows({p[0], p[1]}); }},
      {"slice", {{6}}, [](Tape&, auto p) { return slice(p[0], 1, 3); }},
      {"slice_rows", {{5, 2}}, [](Tape&, auto p) { return slice_rows(p[0], 1, 4); }},
      {"flatten", {{3, 2}}, [](Tape&, auto p) { return flatten(p[0]); }},
      {"max_axis0", {{4, 3}}, [](Tape&, auto p) { return max_over_axis(p[0], 0); }},
      {"max_axis1", {{4, 3}}, [](Tape&, auto p) { return max_over_axis(p[0], 1); }},
      {"softmax_rows", {{3, 4}}, [](Tape&, auto p) { return softmax_rows(p[0]); }},
      {"softmax", {{5}}, [](Tape&, auto p) { return softmax(p[0]); }},
      {"log_softmax", {{5}}, [](Tape&, auto p) { return log_softmax(p[0]); }},
      {"apply_mask", {{4, 3}}, [&mask4x3](Tape&, auto p) { return apply_mask(p[0], mask4x3); }},
      {"conv1d_same_k3", {{5, 3}, {3}, {1}}, [](Tape&, auto p) { return conv1d_same(p[0], p[1], p[2]); }},
      {"conv1d_same_k5", {{2, 3}, {5}, {1}}, [](Tape&, auto p) { return conv1d_same(p[0], p[1], p[2]); }},
      {"lstm_cell", {{3}, {2}, {2}, {8, 3}, {8, 2}, {8}},
       [](Tape&, auto p) { return lstm_cell(p[0], p[1], p[2], p[3], p[4], p[5]); }},
      {"sum", {{3, 2}}, [](Tape&, auto p) { return sum(p[0]); }},
      {"mean", {{3, 2}}, [](Tape&, auto p) { return mean(p[0]); }},
      {"dot", {{4}, {4}}, [](Tape&, auto p) { return dot(p[0], p[1]); }},
      {"pick", {{4}}, [](Tape&, auto p) { return pick(p[0], 2); }},
  };
  for (const PrimitiveCase& c : cases) {
    Rng rng(1000);
    double worst = 0.0;
    for (int seed = 0; seed < 100; ++seed) worst = std::max(worst, check_primitive(c, rng));
    INFO("primitive " << c.name);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("tape backward requires a scalar and skips constants") {
  Tape tape;
  const Var a = tape.variable(Tensor::vector({1.0, 2.0}));
  const Var c = tape.constant(Tensor::vector({3.0, 4.0}));
  CHECK_THROWS_AS(tape.backward(mul(a, c)), ContractError);
  const Var out = dot(a, c);
  tape.backward(out);
  CHECK(identical(tape.grad(a), Tensor::vector({3.0, 4.0})));
  CHECK(identical(tape.grad(c), Tensor::vector({0.0, 0.0})));
  CHECK_FALSE(c.requires_grad());
}
