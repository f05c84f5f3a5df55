#include "tado/layers.hpp"

#include <cmath>

namespace tado {

Var affine(const AffineParams<Var>& p, Var x) {
  const Var product = x.value().rank() == 1 ? matvec(p.weight, x) : matmul(p.weight, x);
  return add(product, p.bias);
}

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

Tensor glorot_uniform(std::size_t out, std::size_t in, Rng& rng) {
  return uniform_tensor(Shape{out, in}, std::sqrt(6.0 / static_cast<double>(in + out)), rng);
}

AffineParams<> init_affine(std::size_t out, std::size_t in, Shape bias_shape, Rng& rng) {
  return AffineParams<>{glorot_uniform(out, in, rng), Tensor(std::move(bias_shape))};
}

}  // namespace tado
