#include "tado/interaction/interaction.hpp"

#include "tado/diffcore/ops.hpp"
#include "tado/errors.hpp"

namespace tado::interaction {

namespace {

void require_matrix_pair(Var a, Var b, const char* what) {
  require_rank(a.value(), 2, what);
  require_same_shape(a.value(), b.value(), what);
}

}  // namespace

Var mlp(const MlpParams<Var>& params, Var x) {
  const Var hidden = relu(affine(params.hidden, x));
  return add(affine(params.output, hidden), matvec(params.skip, x));
}

Var fuse(Var f_u, Var z_u, Var f_i, Var z_i, const InteractionParams<Var>& params) {
  require_matrix_pair(f_u, z_u, "fuse (user stream)");
  require_matrix_pair(f_i, z_i, "fuse (item stream)");
  const Var user = mlp(params.user_fusion, concat({flatten(f_u), flatten(z_u)}));
  const Var item = mlp(params.item_fusion, concat({flatten(f_i), flatten(z_i)}));
  return mul(user, item);
}

Var interaction_vector(Var z_u, Var z_i, Var s_ui, const InteractionParams<Var>& params, const DropoutSpec& dropout) {
  require_matrix_pair(z_u, z_i, "interaction_vector");
  require_rank(s_ui.value(), 1, "interaction_vector S_ui");
  return mlp(params.output, dropout.apply(concat({flatten(z_u), flatten(z_i), s_ui})));
}

Var direct_vector(Var z_u, Var z_i, const AffineParams<Var>& head, const DropoutSpec& dropout) {
  require_matrix_pair(z_u, z_i, "direct_vector");
  return affine(head, dropout.apply(concat({flatten(z_u), flatten(z_i)})));
}

Tensor fuse(const Tensor& f_u, const Tensor& z_u, const Tensor& f_i, const Tensor& z_i,
            const InteractionParams<>& params) {
  return on_scratch_tape([&](Tape& tape) {
    return fuse(tape.constant(f_u), tape.constant(z_u), tape.constant(f_i), tape.constant(z_i),
                bind(tape, params, false))
        .value();
  });
}

Tensor interaction_vector(const Tensor& z_u, const Tensor& z_i, const Tensor& s_ui, const InteractionParams<>& params) {
  return on_scratch_tape([&](Tape& tape) {
    return interaction_vector(tape.constant(z_u), tape.constant(z_i), tape.constant(s_ui), bind(tape, params, false),
                              DropoutSpec::eval())
        .value();
  });
}

MlpParams<> init_mlp(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  return MlpParams<>{init_affine(hidden, in, Shape{hidden}, rng), init_affine(out, hidden, Shape{out}, rng),
                     glorot_uniform(out, in, rng)};
}

InteractionParams<> init_interaction(std::size_t rows, std::size_t dim, std::size_t hidden, std::size_t classes,
                                     Rng& rng) {
  const std::size_t stream = 2 * rows * dim;
  InteractionParams<> p;
  p.user_fusion = init_mlp(stream, hidden, hidden, rng);
  p.item_fusion = init_mlp(stream, hidden, hidden, rng);
  p.output = init_mlp(stream + hidden, hidden, classes, rng);
  return p;
}

}  // namespace tado::interaction
