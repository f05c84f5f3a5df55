#include "tado/attention/co_attention.hpp"

#include "tado/diffcore/ops.hpp"
#include "tado/errors.hpp"

namespace tado::attention {

namespace {

void require_projection_shapes(const AffineParams<Var>& map, const Tensor& features, const char* what) {
  require_rank(features, 2, what);
  const std::size_t r = features.dim(0);
  if (map.weight.shape() != Shape{r, r} || map.bias.shape() != features.shape()) {
    throw ShapeError(std::string(what) + ": projection expects weight " + shape_string({r, r}) + " and bias " +
                     shape_string(features.shape()) + ", got " + shape_string(map.weight.shape()) + " and " +
                     shape_string(map.bias.shape()));
  }
}

Var project(const AffineParams<Var>& map, Var features, const char* what) {
  require_projection_shapes(map, features.value(), what);
  return add(matmul(map.weight, features), map.bias);
}

Var constant(Tape& tape, const Tensor& t) { return tape.constant(t); }

}  // namespace

std::pair<Var, Var> project_qk(Var f_u, Var f_i, const ProjectionParams<Var>& params) {
  if (f_u.shape() != f_i.shape()) {
    throw ShapeError("project_qk: f_u " + shape_string(f_u.shape()) + " vs f_i " + shape_string(f_i.shape()));
  }
  return {project(params.user, f_u, "f_u"), project(params.item_map(), f_i, "f_i")};
}

Var affinity(Var q, Var k) {
  require_rank(q.value(), 2, "affinity Q");
  require_same_shape(q.value(), k.value(), "affinity");
  return tanh(matmul(k, transpose(q)));
}

std::pair<Var, Var> attention_weights(Var m) {
  require_rank(m.value(), 2, "attention_weights");
  if (m.value().rows() != m.value().cols()) throw ShapeError("attention_weights: M must be square");
  return {softmax_rows(m), softmax_rows(transpose(m))};
}

std::pair<Var, Var> contextualize(Var m_u, Var m_i, Var q, Var k) {
  return {matmul(m_u, q), matmul(m_i, k)};
}

CoAttentionVars co_attention(Var f_u, Var f_i, const ProjectionParams<Var>& params) {
  CoAttentionVars s;
  std::tie(s.q, s.k) = project_qk(f_u, f_i, params);
  s.affinity = affinity(s.q, s.k);
  std::tie(s.user_weights, s.item_weights) = attention_weights(s.affinity);
  std::tie(s.user_context, s.item_context) = contextualize(s.user_weights, s.item_weights, s.q, s.k);
  return s;
}

std::pair<Tensor, Tensor> project_qk(const Tensor& f_u, const Tensor& f_i, const ProjectionParams<>& params) {
  return on_scratch_tape([&](Tape& tape) {
    auto [q, k] = project_qk(constant(tape, f_u), constant(tape, f_i), bind(tape, params, false));
    return std::pair{q.value(), k.value()};
  });
}

Tensor affinity(const Tensor& q, const Tensor& k) {
  return on_scratch_tape([&](Tape& tape) { return affinity(constant(tape, q), constant(tape, k)).value(); });
}

std::pair<Tensor, Tensor> attention_weights(const Tensor& m) {
  return on_scratch_tape([&](Tape& tape) {
    auto [u, i] = attention_weights(constant(tape, m));
    return std::pair{u.value(), i.value()};
  });
}

std::pair<Tensor, Tensor> contextualize(const Tensor& m_u, const Tensor& m_i, const Tensor& q, const Tensor& k) {
  return on_scratch_tape([&](Tape& tape) {
    auto [zu, zi] = contextualize(constant(tape, m_u), constant(tape, m_i), constant(tape, q), constant(tape, k));
    return std::pair{zu.value(), zi.value()};
  });
}

CoAttentionState co_attention(const Tensor& f_u, const Tensor& f_i, const ProjectionParams<>& params) {
  return on_scratch_tape([&](Tape& tape) {
    const auto s = co_attention(constant(tape, f_u), constant(tape, f_i), bind(tape, params, false));
    return CoAttentionState{s.q.value(),           s.k.value(),           s.affinity.value(),
                            s.user_weights.value(), s.item_weights.value(), s.user_context.value(),
                            s.item_context.value()};
  });
}

ProjectionParams<> init_projection(std::size_t rows, std::size_t dim, bool shared, Rng& rng) {
  ProjectionParams<> p;
  p.user = init_affine(rows, rows, Shape{rows, dim}, rng);
  if (!shared) p.item = init_affine(rows, rows, Shape{rows, dim}, rng);
  return p;
}

}  // namespace tado::attention
