#include "tado/diffcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tado/errors.hpp"

namespace tado {

namespace {

// dA = G * B^T for A (m x k), B (k x n), G (m x n).
Tensor matmul_grad_left(const Tensor& g, const Tensor& b) {
  const std::size_t m = g.dim(0), n = g.dim(1), k = b.dim(0);
  Tensor out(Shape{m, k});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += g(i, j) * b(p, j);
      out(i, p) = acc;
    }
  }
  return out;
}

// dB = A^T * G.
Tensor matmul_grad_right(const Tensor& a, const Tensor& g) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = g.dim(1);
  Tensor out(Shape{k, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out(p, j) += aip * g(i, j);
    }
  }
  return out;
}

template <class F>
Tensor map_values(const Tensor& a, F f) {
  Tensor out = Tensor::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

void require_same_tape(const Var& a, const Var& b, const char* op) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw ContractError(std::string(op) + ": operands are not on the same tape");
  }
}

}  // namespace

namespace {

// Four interleaved partial sums: fixed summation order, shorter dependency
// chains than a single accumulator.
double dot_product(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    s0 += a[p] * b[p];
    s1 += a[p + 1] * b[p + 1];
    s2 += a[p + 2] * b[p + 2];
    s3 += a[p + 3] * b[p + 3];
  }
  for (; p < n; ++p) s0 += a[p] * b[p];
  return (s0 + s1) + (s2 + s3);
}

double sigmoid_value(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += aip * b(p, j);
    }
  }
  return out;
}

Tensor transpose(const Tensor& m) {
  require_rank(m, 2, "transpose");
  Tensor out(Shape{m.dim(1), m.dim(0)});
  for (std::size_t i = 0; i < m.dim(0); ++i) {
    for (std::size_t j = 0; j < m.dim(1); ++j) out(j, i) = m(i, j);
  }
  return out;
}

Tensor softmax_rows(const Tensor& m) {
  require_rank(m, 2, "softmax_rows");
  Tensor out = Tensor::zeros_like(m);
  for (std::size_t i = 0; i < m.dim(0); ++i) {
    const auto row = m.row(i);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      out(i, j) = std::exp(row[j] - peak);
      total += out(i, j);
    }
    for (std::size_t j = 0; j < row.size(); ++j) out(i, j) /= total;
  }
  return out;
}

AxisMax max_over_axis(const Tensor& t, std::size_t axis) {
  if (t.rank() == 1) {
    if (axis != 0) throw ShapeError("max_over_axis: axis out of range for rank-1 input");
    if (t.size() == 0) throw ShapeError("max_over_axis: empty input");
    std::size_t best = 0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i] > t[best]) best = i;
    }
    return {Tensor::scalar(t[best]), {best}};
  }
  require_rank(t, 2, "max_over_axis");
  if (axis > 1) throw ShapeError("max_over_axis: axis out of range for rank-2 input");
  const std::size_t rows = t.dim(0), cols = t.dim(1);
  if (rows == 0 || cols == 0) throw ShapeError("max_over_axis: empty input");
  const std::size_t outer = axis == 0 ? cols : rows;
  const std::size_t inner = axis == 0 ? rows : cols;
  AxisMax result{Tensor(Shape{outer}), std::vector<std::size_t>(outer)};
  for (std::size_t o = 0; o < outer; ++o) {
    auto flat = [&](std::size_t i) { return axis == 0 ? i * cols + o : o * cols + i; };
    std::size_t best = flat(0);
    for (std::size_t i = 1; i < inner; ++i) {
      if (t[flat(i)] > t[best]) best = flat(i);
    }
    result.values[o] = t[best];
    result.argmax[o] = best;
  }
  return result;
}

Tensor dropout_mask(const Shape& shape, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ContractError("dropout rate must lie in [0, 1)");
  Tensor mask(shape);
  const double keep = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < rate ? 0.0 : keep;
  return mask;
}

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  out += b.value();
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    Tensor neg = g;
    neg *= -1.0;
    t.accumulate(b, std::move(neg));
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (a.requires_grad()) {
      Tensor ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= b.value()[i];
      t.accumulate(a, std::move(ga));
    }
    if (b.requires_grad()) {
      Tensor gb = g;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= a.value()[i];
      t.accumulate(b, std::move(gb));
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  out *= factor;
  return a.tape().record(std::move(out), {a}, [a, factor](Tape& t, const Tensor& g) {
    Tensor ga = g;
    ga *= factor;
    t.accumulate(a, std::move(ga));
  });
}

Var add_scalar(Var a, double offset) {
  Tensor out = map_values(a.value(), [offset](double x) { return x + offset; });
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Tensor& g) { t.accumulate(a, g); });
}

Var square(Var a) { return mul(a, a); }

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  Tensor out = matmul(a.value(), b.value());
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (a.requires_grad()) t.accumulate(a, matmul_grad_left(g, b.value()));
    if (b.requires_grad()) t.accumulate(b, matmul_grad_right(a.value(), g));
  });
}

Var matvec(Var a, Var x) {
  require_same_tape(a, x, "matvec");
  const Tensor& av = a.value();
  const Tensor& xv = x.value();
  require_rank(av, 2, "matvec");
  require_rank(xv, 1, "matvec");
  const std::size_t m = av.dim(0), k = av.dim(1);
  if (xv.size() != k) {
    throw ShapeError("matvec: " + shape_string(av.shape()) + " x " + shape_string(xv.shape()));
  }
  Tensor out(Shape{m});
  const double* xp = xv.data().data();
  for (std::size_t i = 0; i < m; ++i) out[i] = dot_product(av.data().data() + i * k, xp, k);
  return a.tape().record(std::move(out), {a, x}, [a, x, m, k](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      const double* xv = x.value().data().data();
      double* gp = ga->data().data();
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        double* row = gp + i * k;
        for (std::size_t p = 0; p < k; ++p) row[p] += gi * xv[p];
      }
    }
    if (Tensor* gx = t.grad_buffer(x)) {
      const double* ap = a.value().data().data();
      double* gp = gx->data().data();
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        const double* row = ap + i * k;
        for (std::size_t p = 0; p < k; ++p) gp[p] += row[p] * gi;
      }
    }
  });
}

Var transpose(Var m) {
  return m.tape().record(transpose(m.value()), {m},
                         [m](Tape& t, const Tensor& g) { t.accumulate(m, transpose(g)); });
}

Var broadcast_add_rows(Var m, Var v) {
  require_same_tape(m, v, "broadcast_add_rows");
  const Tensor& mv = m.value();
  require_rank(mv, 2, "broadcast_add_rows");
  require_rank(v.value(), 1, "broadcast_add_rows");
  if (v.value().size() != mv.dim(1)) {
    throw ShapeError("broadcast_add_rows: " + shape_string(mv.shape()) + " + " +
                     shape_string(v.value().shape()));
  }
  Tensor out = mv;
  for (std::size_t i = 0; i < mv.dim(0); ++i) {
    for (std::size_t j = 0; j < mv.dim(1); ++j) out(i, j) += v.value()[j];
  }
  return m.tape().record(std::move(out), {m, v}, [m, v](Tape& t, const Tensor& g) {
    t.accumulate(m, g);
    if (v.requires_grad()) {
      Tensor gv(Shape{g.dim(1)});
      for (std::size_t i = 0; i < g.dim(0); ++i) {
        for (std::size_t j = 0; j < g.dim(1); ++j) gv[j] += g(i, j);
      }
      t.accumulate(v, std::move(gv));
    }
  });
}

Var tanh(Var a) {
  Tensor out = map_values(a.value(), [](double x) { return std::tanh(x); });
  return a.tape().record(out, {a}, [a, out](Tape& t, const Tensor& g) {
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= 1.0 - out[i] * out[i];
    t.accumulate(a, std::move(ga));
  });
}

Var sigmoid(Var a) {
  Tensor out = map_values(a.value(), sigmoid_value);
  return a.tape().record(out, {a}, [a, out](Tape& t, const Tensor& g) {
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= out[i] * (1.0 - out[i]);
    t.accumulate(a, std::move(ga));
  });
}

Var relu(Var a) {
  Tensor out = map_values(a.value(), [](double x) { return x > 0.0 ? x : 0.0; });
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    Tensor ga = g;
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < ga.size(); ++i) {
      if (!(x[i] > 0.0)) ga[i] = 0.0;
    }
    t.accumulate(a, std::move(ga));
  });
}

Var log(Var a) {
  Tensor out = map_values(a.value(), [](double x) { return std::log(x); });
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] /= a.value()[i];
    t.accumulate(a, std::move(ga));
  });
}

Var exp(Var a) {
  Tensor out = map_values(a.value(), [](double x) { return std::exp(x); });
  return a.tape().record(out, {a}, [a, out](Tape& t, const Tensor& g) {
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= out[i];
    t.accumulate(a, std::move(ga));
  });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  std::vector<double> data;
  std::vector<std::size_t> lengths;
  for (const Var& p : parts) {
    require_same_tape(parts.front(), p, "concat");
    require_rank(p.value(), 1, "concat");
    const auto values = p.value().data();
    data.insert(data.end(), values.begin(), values.end());
    lengths.push_back(values.size());
  }
  return parts.front().tape().record(
      Tensor::vector(std::move(data)), parts, [parts, lengths](Tape& t, const Tensor& g) {
        std::size_t offset = 0;
        for (std::size_t i = 0; i < parts.size(); ++i) {
          if (parts[i].requires_grad()) {
            std::vector<double> piece(g.data().begin() + offset, g.data().begin() + offset + lengths[i]);
            t.accumulate(parts[i], Tensor::vector(std::move(piece)));
          }
          offset += lengths[i];
        }
      });
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no inputs");
  const std::size_t width = rows.front().value().size();
  std::vector<double> data;
  data.reserve(rows.size() * width);
  for (const Var& r : rows) {
    require_same_tape(rows.front(), r, "stack_rows");
    require_rank(r.value(), 1, "stack_rows");
    if (r.value().size() != width) throw ShapeError("stack_rows: rows differ in length");
    const auto values = r.value().data();
    data.insert(data.end(), values.begin(), values.end());
  }
  return rows.front().tape().record(
      Tensor::matrix(rows.size(), width, std::move(data)), rows, [rows, width](Tape& t, const Tensor& g) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (!rows[i].requires_grad()) continue;
          const auto r = g.row(i);
          t.accumulate(rows[i], Tensor::vector(std::vector<double>(r.begin(), r.end())));
        }
      });
}

Var slice(Var v, std::size_t offset, std::size_t length) {
  require_rank(v.value(), 1, "slice");
  if (offset + length > v.value().size()) {
    throw ShapeError("slice: range exceeds length " + std::to_string(v.value().size()));
  }
  const auto src = v.value().data();
  std::vector<double> data(src.begin() + offset, src.begin() + offset + length);
  return v.tape().record(Tensor::vector(std::move(data)), {v}, [v, offset](Tape& t, const Tensor& g) {
    Tensor gv = Tensor::zeros_like(v.value());
    std::copy(g.data().begin(), g.data().end(), gv.data().begin() + offset);
    t.accumulate(v, std::move(gv));
  });
}

Var slice_rows(Var m, std::size_t begin, std::size_t end) {
  const Tensor& mv = m.value();
  require_rank(mv, 2, "slice_rows");
  if (begin > end || end > mv.dim(0)) throw ShapeError("slice_rows: range out of bounds");
  const std::size_t cols = mv.dim(1);
  std::vector<double> data(mv.data().begin() + begin * cols, mv.data().begin() + end * cols);
  return m.tape().record(Tensor::matrix(end - begin, cols, std::move(data)), {m},
                         [m, begin, cols](Tape& t, const Tensor& g) {
                           Tensor gm = Tensor::zeros_like(m.value());
                           std::copy(g.data().begin(), g.data().end(), gm.data().begin() + begin * cols);
                           t.accumulate(m, std::move(gm));
                         });
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    t.accumulate(a, g.reshaped(a.value().shape()));
  });
}

Var flatten(Var a) { return reshape(a, Shape{a.value().size()}); }

Var max_over_axis(Var a, std::size_t axis) {
  AxisMax m = max_over_axis(a.value(), axis);
  std::vector<std::size_t> argmax = std::move(m.argmax);
  return a.tape().record(std::move(m.values), {a}, [a, argmax](Tape& t, const Tensor& g) {
    Tensor ga = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < argmax.size(); ++i) ga[argmax[i]] += g[i];
    t.accumulate(a, std::move(ga));
  });
}

Var softmax_rows(Var m) {
  Tensor out = softmax_rows(m.value());
  return m.tape().record(out, {m}, [m, out](Tape& t, const Tensor& g) {
    Tensor gm = Tensor::zeros_like(out);
    for (std::size_t i = 0; i < out.dim(0); ++i) {
      double inner = 0.0;
      for (std::size_t j = 0; j < out.dim(1); ++j) inner += g(i, j) * out(i, j);
      for (std::size_t j = 0; j < out.dim(1); ++j) gm(i, j) = out(i, j) * (g(i, j) - inner);
    }
    t.accumulate(m, std::move(gm));
  });
}

Var softmax(Var v) {
  require_rank(v.value(), 1, "softmax");
  const std::size_t n = v.value().size();
  return reshape(softmax_rows(reshape(v, Shape{1, n})), Shape{n});
}

Var log_softmax(Var v) {
  const Tensor& x = v.value();
  require_rank(x, 1, "log_softmax");
  if (x.size() == 0) throw ShapeError("log_softmax: empty input");
  const double peak = *std::max_element(x.data().begin(), x.data().end());
  double total = 0.0;
  for (double xi : x.data()) total += std::exp(xi - peak);
  const double log_total = peak + std::log(total);
  Tensor out = map_values(x, [log_total](double xi) { return xi - log_total; });
  return v.tape().record(out, {v}, [v, out](Tape& t, const Tensor& g) {
    double gsum = 0.0;
    for (double gi : g.data()) gsum += gi;
    Tensor gv = g;
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] -= std::exp(out[i]) * gsum;
    t.accumulate(v, std::move(gv));
  });
}

Var apply_mask(Var a, const Tensor& mask) {
  require_same_shape(a.value(), mask, "apply_mask");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return a.tape().record(std::move(out), {a}, [a, mask](Tape& t, const Tensor& g) {
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= mask[i];
    t.accumulate(a, std::move(ga));
  });
}

Var dropout(Var a, double rate, Rng& rng) {
  if (rate == 0.0) return a;
  return apply_mask(a, dropout_mask(a.value().shape(), rate, rng));
}

Var conv1d_same(Var input, Var kernel, Var bias) {
  require_same_tape(input, kernel, "conv1d_same");
  require_same_tape(input, bias, "conv1d_same");
  const Tensor& x = input.value();
  const Tensor& k = kernel.value();
  require_rank(x, 2, "conv1d_same");
  require_rank(k, 1, "conv1d_same");
  if (k.size() % 2 == 0) throw ShapeError("conv1d_same: kernel length must be odd");
  if (bias.value().size() != 1) throw ShapeError("conv1d_same: bias must hold one value");
  const std::size_t len = x.dim(0), width = x.dim(1), taps = k.size();
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(taps / 2);
  const double b = bias.value()[0];

  Tensor out(Shape{len, width}, b);
  for (std::size_t pos = 0; pos < len; ++pos) {
    for (std::size_t j = 0; j < taps; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(pos) + static_cast<std::ptrdiff_t>(j) - half;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
      const double w = k[j];
      for (std::size_t c = 0; c < width; ++c) out(pos, c) += w * x(static_cast<std::size_t>(src), c);
    }
  }
  return input.tape().record(
      std::move(out), {input, kernel, bias}, [input, kernel, bias, half](Tape& t, const Tensor& g) {
        const Tensor& x = input.value();
        const Tensor& k = kernel.value();
        const std::size_t len = x.dim(0), width = x.dim(1), taps = k.size();
        Tensor gx = Tensor::zeros_like(x);
        Tensor gk = Tensor::zeros_like(k);
        double gb = 0.0;
        for (std::size_t pos = 0; pos < len; ++pos) {
          for (std::size_t c = 0; c < width; ++c) gb += g(pos, c);
          for (std::size_t j = 0; j < taps; ++j) {
            const std::ptrdiff_t src =
                static_cast<std::ptrdiff_t>(pos) + static_cast<std::ptrdiff_t>(j) - half;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
            const auto s = static_cast<std::size_t>(src);
            double acc = 0.0;
            for (std::size_t c = 0; c < width; ++c) {
              acc += g(pos, c) * x(s, c);
              gx(s, c) += k[j] * g(pos, c);
            }
            gk[j] += acc;
          }
        }
        t.accumulate(input, std::move(gx));
        t.accumulate(kernel, std::move(gk));
        t.accumulate(bias, Tensor(bias.value().shape(), gb));
      });
}

Var lstm_cell(Var x, Var h, Var c, Var input_weights, Var recurrent_weights, Var bias) {
  for (const Var& v : {h, c, input_weights, recurrent_weights, bias}) require_same_tape(x, v, "lstm_cell");
  const Tensor& wx = input_weights.value();
  const Tensor& wh = recurrent_weights.value();
  require_rank(x.value(), 1, "lstm_cell x");
  require_rank(wx, 2, "lstm_cell input_weights");
  require_rank(wh, 2, "lstm_cell recurrent_weights");
  const std::size_t hidden = h.value().size(), in = x.value().size();
  if (wx.shape() != Shape{4 * hidden, in} || wh.shape() != Shape{4 * hidden, hidden} ||
      bias.value().shape() != Shape{4 * hidden} || c.value().shape() != Shape{hidden} ||
      h.value().rank() != 1) {
    throw ShapeError("lstm_cell: inconsistent shapes x " + shape_string(x.value().shape()) + ", h " +
                     shape_string(h.value().shape()) + ", input_weights " + shape_string(wx.shape()) +
                     ", recurrent_weights " + shape_string(wh.shape()));
  }

  // gates holds activated i, f, g, o; tanh_c holds tanh(c').
  std::vector<double> gates(4 * hidden), tanh_c(hidden);
  const double* xp = x.value().data().data();
  const double* hp = h.value().data().data();
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    const double pre = dot_product(wx.data().data() + r * in, xp, in) +
                       dot_product(wh.data().data() + r * hidden, hp, hidden) + bias.value()[r];
    gates[r] = r >= 2 * hidden && r < 3 * hidden ? std::tanh(pre) : sigmoid_value(pre);
  }
  Tensor out(Shape{2 * hidden});
  for (std::size_t j = 0; j < hidden; ++j) {
    const double cell = gates[hidden + j] * c.value()[j] + gates[j] * gates[2 * hidden + j];
    tanh_c[j] = std::tanh(cell);
    out[j] = gates[3 * hidden + j] * tanh_c[j];
    out[hidden + j] = cell;
  }

  Tape& tape = x.tape();
  bool needs = false;
  for (const Var& v : {x, h, c, input_weights, recurrent_weights, bias}) needs = needs || v.requires_grad();
  if (!needs) return tape.constant(std::move(out));
  return tape.record(
      std::move(out), {x, h, c, input_weights, recurrent_weights, bias},
      [x, h, c, input_weights, recurrent_weights, bias, hidden, in, gates = std::move(gates),
       tanh_c = std::move(tanh_c)](Tape& t, const Tensor& g) {
        std::vector<double> dpre(4 * hidden);
        Tensor* gc = t.grad_buffer(c);
        for (std::size_t j = 0; j < hidden; ++j) {
          const double i = gates[j], f = gates[hidden + j], cand = gates[2 * hidden + j], o = gates[3 * hidden + j];
          const double dh = g[j];
          const double dcell = g[hidden + j] + dh * o * (1.0 - tanh_c[j] * tanh_c[j]);
          dpre[j] = dcell * cand * i * (1.0 - i);
          dpre[hidden + j] = dcell * c.value()[j] * f * (1.0 - f);
          dpre[2 * hidden + j] = dcell * i * (1.0 - cand * cand);
          dpre[3 * hidden + j] = dh * tanh_c[j] * o * (1.0 - o);
          if (gc) (*gc)[j] += dcell * f;
        }
        const auto outer = [&](const Var& weights, const Var& input, std::size_t cols) {
          Tensor* gw = t.grad_buffer(weights);
          Tensor* gi = t.grad_buffer(input);
          const double* wp = weights.value().data().data();
          const double* ip = input.value().data().data();
          for (std::size_t r = 0; r < 4 * hidden; ++r) {
            const double d = dpre[r];
            if (d == 0.0) continue;
            if (gw) {
              double* row = gw->data().data() + r * cols;
              for (std::size_t p = 0; p < cols; ++p) row[p] += d * ip[p];
            }
            if (gi) {
              double* gp = gi->data().data();
              const double* row = wp + r * cols;
              for (std::size_t p = 0; p < cols; ++p) gp[p] += d * row[p];
            }
          }
        };
        outer(input_weights, x, in);
        outer(recurrent_weights, h, hidden);
        if (Tensor* gb = t.grad_buffer(bias)) {
          for (std::size_t r = 0; r < 4 * hidden; ++r) (*gb)[r] += dpre[r];
        }
      });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return a.tape().record(Tensor::scalar(total), {a}, [a](Tape& t, const Tensor& g) {
    t.accumulate(a, Tensor(a.value().shape(), g[0]));
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean: empty input");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var dot(Var a, Var b) { return sum(mul(a, b)); }

Var pick(Var v, std::size_t index) {
  require_rank(v.value(), 1, "pick");
  if (index >= v.value().size()) throw ShapeError("pick: index out of range");
  return v.tape().record(Tensor::scalar(v.value()[index]), {v}, [v, index](Tape& t, const Tensor& g) {
    Tensor gv = Tensor::zeros_like(v.value());
    gv[index] = g[0];
    t.accumulate(v, std::move(gv));
  });
}

}  // namespace tado
