#include "tado/data/pseudo_embed.hpp"

#include <cmath>

#include "tado/errors.hpp"
#include "tado/rng.hpp"

namespace tado::data {

std::uint64_t stable_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> pseudo_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ContractError("pseudo_embed: dim must be at least 1");
  Rng rng(stable_hash(text) ^ splitmix64(seed));
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace tado::data
