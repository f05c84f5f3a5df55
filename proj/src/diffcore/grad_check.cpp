#include "tado/diffcore/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "tado/errors.hpp"

namespace tado {

namespace {

double evaluate(const ScalarFn& fn, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Tensor& p : params) vars.push_back(tape.constant(p));
  const Var out = fn(tape, vars);
  if (out.value().size() != 1) {
    throw ContractError("grad_check: function output must be scalar, got shape " +
                        shape_string(out.value().shape()));
  }
  return out.value()[0];
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& fn, std::span<const Tensor> params, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw ContractError("grad_check: eps must lie in [1e-7, 1e-3]");

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const Tensor& p : params) vars.push_back(tape.variable(p));
    const Var out = fn(tape, vars);
    if (out.value().size() != 1) {
      throw ContractError("grad_check: function output must be scalar, got shape " +
                          shape_string(out.value().shape()));
    }
    tape.backward(out);
    for (const Var& v : vars) analytic.push_back(tape.grad(v));
  }

  GradCheckResult result;
  std::vector<Tensor> probe(params.begin(), params.end());
  for (std::size_t p = 0; p < probe.size(); ++p) {
    for (std::size_t e = 0; e < probe[p].size(); ++e) {
      const double original = probe[p][e];
      probe[p][e] = original + eps;
      const double up = evaluate(fn, probe);
      probe[p][e] = original - eps;
      const double down = evaluate(fn, probe);
      probe[p][e] = original;

      const double numeric = (up - down) / (2.0 * eps);
      const double error = std::abs(analytic[p][e] - numeric) / std::max(1.0, std::abs(numeric));
      if (error > result.max_relative_error) {
        result.max_relative_error = error;
        result.worst_param = p;
        result.worst_entry = e;
      }
      ++result.entries_checked;
    }
  }
  return result;
}

}  // namespace tado
