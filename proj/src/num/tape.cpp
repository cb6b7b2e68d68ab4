#include "cvse/num/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvse/errors.hpp"

namespace cvse::num {

Var Tape::leaf(std::size_t rows, std::size_t cols, const double* external, std::vector<double> owned,
               bool requires_grad) {
  Node node;
  node.rows = rows;
  node.cols = cols;
  node.external = external;
  node.owned = std::move(owned);
  node.requires_grad = requires_grad && record_;
  nodes_.push_back(std::move(node));
  has_grad_ = false;
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(const Matrix& m) { return leaf(m.rows(), m.cols(), m.span().data(), {}, true); }
Var Tape::variable(const Vector& v) { return leaf(v.dim(), 1, v.span().data(), {}, true); }
Var Tape::constant_ref(const Matrix& m) { return leaf(m.rows(), m.cols(), m.span().data(), {}, false); }
Var Tape::constant_ref(const Vector& v) { return leaf(v.dim(), 1, v.span().data(), {}, false); }

Var Tape::constant(Vector v) {
  const std::size_t n = v.dim();
  return leaf(n, 1, nullptr, v.values(), false);
}

Var Tape::constant(Matrix m) {
  const std::size_t r = m.rows(), c = m.cols();
  return leaf(r, c, nullptr, m.values(), false);
}

Var Tape::scalar(double value) { return leaf(1, 1, nullptr, {value}, false); }

void Tape::check(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw UsageError("value is not recorded on this tape");
  }
}

std::span<const double> Tape::value_at(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.external != nullptr) return {n.external, n.rows * n.cols};
  return n.owned;
}

std::span<const double> Tape::value(Var v) const {
  check(v);
  return value_at(v.id_);
}

double Tape::scalar_value(Var v) const {
  check(v);
  if (size(v) != 1) throw ShapeError("scalar_value: value has " + std::to_string(size(v)) + " entries");
  return value_at(v.id_)[0];
}

std::size_t Tape::rows(Var v) const {
  check(v);
  return nodes_[v.id_].rows;
}

std::size_t Tape::cols(Var v) const {
  check(v);
  return nodes_[v.id_].cols;
}

bool Tape::requires_grad(Var v) const {
  check(v);
  return nodes_[v.id_].requires_grad;
}

Var Tape::push(std::size_t rows, std::size_t cols, std::vector<double> value,
               std::span<const Var> parents, BackwardFn backward) {
  bool needs = false;
  for (Var p : parents) {
    check(p);
    needs = needs || nodes_[p.id_].requires_grad;
  }
  if (!all_finite(value)) throw NumericError("non-finite value produced on tape");
  Node node;
  node.rows = rows;
  node.cols = cols;
  node.owned = std::move(value);
  node.requires_grad = needs && record_;
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  has_grad_ = false;
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var output, double seed) {
  check(output);
  if (size(output) != 1) throw ShapeError("backward: scalar seed given for non-scalar output");
  const double s[1] = {seed};
  backward(output, std::span<const double>(s, 1));
}

void Tape::backward(Var output, std::span<const double> seed) {
  check(output);
  if (!record_) throw UsageError("backward on a value-only tape");
  if (seed.size() != size(output)) throw ShapeError("backward: seed shape mismatch");
  for (Node& n : nodes_) {
    if (n.requires_grad) {
      n.grad.assign(n.rows * n.cols, 0.0);
    } else {
      n.grad.clear();
    }
  }
  Node& out = nodes_[output.id_];
  if (out.requires_grad) std::copy(seed.begin(), seed.end(), out.grad.begin());
  for (std::size_t i = output.id_ + 1; i-- > 0;) {
    if (nodes_[i].requires_grad && nodes_[i].backward) nodes_[i].backward(*this, i);
  }
  has_grad_ = true;
}

std::span<const double> Tape::grad(Var v) const {
  check(v);
  if (!has_grad_) throw UsageError("gradient requested before backward");
  const Node& n = nodes_[v.id_];
  if (!n.requires_grad) throw UsageError("gradient requested for a value that does not require grad");
  return n.grad;
}

Matrix Tape::grad_matrix(Var v) const {
  auto g = grad(v);
  return Matrix(rows(v), cols(v), std::vector<double>(g.begin(), g.end()));
}

namespace ad {
namespace {

Tape& tape_of(Var v) {
  if (!v.valid()) throw UsageError("op on an unrecorded value");
  return const_cast<Tape&>(*v.tape());
}

Tape& same_tape(Var a, Var b) {
  Tape& t = tape_of(a);
  if (b.tape() != &t) throw UsageError("operands recorded on different tapes");
  return t;
}

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw ShapeError(std::string(op) + ": " + detail);
}

std::string shape(const Tape& t, Var v) {
  return std::to_string(t.rows(v)) + "x" + std::to_string(t.cols(v));
}

}  // namespace

Var linear(Var x, Var weight, Var bias) {
  Tape& t = same_tape(x, weight);
  same_tape(x, bias);
  const std::size_t m = t.rows(weight), n = t.cols(weight);
  require(t.size(x) == n && t.size(bias) == m, "linear",
          "W " + shape(t, weight) + ", x " + shape(t, x) + ", b " + shape(t, bias));
  auto xv = t.value(x), wv = t.value(weight), bv = t.value(bias);
  std::vector<double> out(m);
  for (std::size_t r = 0; r < m; ++r) {
    double s = bv[r];
    const double* wr = wv.data() + r * n;
    for (std::size_t c = 0; c < n; ++c) s += wr[c] * xv[c];
    out[r] = s;
  }
  const std::size_t xi = x.id(), wi = weight.id(), bi = bias.id();
  return t.push(m, 1, std::move(out), {x, weight, bias}, [xi, wi, bi, m, n](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    auto xv = tp.value_at(xi);
    auto wv = tp.value_at(wi);
    if (tp.requires_grad_at(xi)) {
      auto gx = tp.grad_buffer(xi);
      for (std::size_t r = 0; r < m; ++r) {
        const double* wr = wv.data() + r * n;
        for (std::size_t c = 0; c < n; ++c) gx[c] += wr[c] * g[r];
      }
    }
    if (tp.requires_grad_at(wi)) {
      auto gw = tp.grad_buffer(wi);
      for (std::size_t r = 0; r < m; ++r) {
        double* gr = gw.data() + r * n;
        for (std::size_t c = 0; c < n; ++c) gr[c] += g[r] * xv[c];
      }
    }
    if (tp.requires_grad_at(bi)) {
      auto gb = tp.grad_buffer(bi);
      for (std::size_t r = 0; r < m; ++r) gb[r] += g[r];
    }
  });
}

Var linear_rows(Var rows, Var weight, Var bias) {
  Tape& t = same_tape(rows, weight);
  same_tape(rows, bias);
  const std::size_t m = t.rows(weight), n = t.cols(weight), count = t.rows(rows);
  require(t.cols(rows) == n && t.size(bias) == m, "linear_rows",
          "W " + shape(t, weight) + ", X " + shape(t, rows) + ", b " + shape(t, bias));
  auto xv = t.value(rows), wv = t.value(weight), bv = t.value(bias);
  std::vector<double> out(count * m);
  for (std::size_t i = 0; i < count; ++i) {
    const double* xr = xv.data() + i * n;
    for (std::size_t r = 0; r < m; ++r) {
      const double* wr = wv.data() + r * n;
      double s = bv[r];
      for (std::size_t c = 0; c < n; ++c) s += wr[c] * xr[c];
      out[i * m + r] = s;
    }
  }
  const std::size_t xi = rows.id(), wi = weight.id(), bi = bias.id();
  return t.push(count, m, std::move(out), {rows, weight, bias},
                [xi, wi, bi, m, n, count](Tape& tp, std::size_t self) {
                  auto g = tp.grad_buffer(self);
                  auto xv = tp.value_at(xi);
                  auto wv = tp.value_at(wi);
                  const bool gx_on = tp.requires_grad_at(xi), gw_on = tp.requires_grad_at(wi),
                             gb_on = tp.requires_grad_at(bi);
                  for (std::size_t i = 0; i < count; ++i) {
                    const double* gi = g.data() + i * m;
                    const double* xr = xv.data() + i * n;
                    if (gx_on) {
                      double* gx = tp.grad_buffer(xi).data() + i * n;
                      for (std::size_t r = 0; r < m; ++r) {
                        const double* wr = wv.data() + r * n;
                        for (std::size_t c = 0; c < n; ++c) gx[c] += wr[c] * gi[r];
                      }
                    }
                    if (gw_on) {
                      double* gw = tp.grad_buffer(wi).data();
                      for (std::size_t r = 0; r < m; ++r) {
                        double* gr = gw + r * n;
                        const double gir = gi[r];
                        for (std::size_t c = 0; c < n; ++c) gr[c] += gir * xr[c];
                      }
                    }
                    if (gb_on) {
                      double* gb = tp.grad_buffer(bi).data();
                      for (std::size_t r = 0; r < m; ++r) gb[r] += gi[r];
                    }
                  }
                });
}

Var linear_transposed(Var weight, Var y) {
  Tape& t = same_tape(weight, y);
  const std::size_t m = t.rows(weight), n = t.cols(weight);
  require(t.size(y) == m, "linear_transposed", "W " + shape(t, weight) + ", y " + shape(t, y));
  auto wv = t.value(weight), yv = t.value(y);
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const double* wr = wv.data() + r * n;
    for (std::size_t c = 0; c < n; ++c) out[c] += wr[c] * yv[r];
  }
  const std::size_t wi = weight.id(), yi = y.id();
  return t.push(n, 1, std::move(out), {weight, y}, [wi, yi, m, n](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    auto wv = tp.value_at(wi);
    auto yv = tp.value_at(yi);
    if (tp.requires_grad_at(wi)) {
      auto gw = tp.grad_buffer(wi);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) gw[r * n + c] += yv[r] * g[c];
      }
    }
    if (tp.requires_grad_at(yi)) {
      auto gy = tp.grad_buffer(yi);
      for (std::size_t r = 0; r < m; ++r) {
        const double* wr = wv.data() + r * n;
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += wr[c] * g[c];
        gy[r] += s;
      }
    }
  });
}

Var matvec(Var rows, Var u) {
  Tape& t = same_tape(rows, u);
  const std::size_t count = t.rows(rows), n = t.cols(rows);
  require(t.size(u) == n, "matvec", "X " + shape(t, rows) + ", u " + shape(t, u));
  auto xv = t.value(rows), uv = t.value(u);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = num::dot(xv.subspan(i * n, n), uv);
  const std::size_t xi = rows.id(), ui = u.id();
  return t.push(count, 1, std::move(out), {rows, u}, [xi, ui, count, n](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    auto xv = tp.value_at(xi);
    auto uv = tp.value_at(ui);
    if (tp.requires_grad_at(xi)) {
      auto gx = tp.grad_buffer(xi);
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < n; ++c) gx[i * n + c] += g[i] * uv[c];
      }
    }
    if (tp.requires_grad_at(ui)) {
      auto gu = tp.grad_buffer(ui);
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < n; ++c) gu[c] += g[i] * xv[i * n + c];
      }
    }
  });
}

Var softmax(Var z) {
  Tape& t = tape_of(z);
  const std::size_t n = t.size(z);
  require(n >= 1, "softmax", "empty input");
  auto zv = t.value(z);
  const double mx = *std::max_element(zv.begin(), zv.end());
  std::vector<double> out(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(zv[i] - mx);
    total += out[i];
  }
  for (double& o : out) o /= total;
  const std::size_t zi = z.id();
  return t.push(t.rows(z), t.cols(z), std::move(out), {z}, [zi, n](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    auto s = tp.value_at(self);
    double sg = 0.0;
    for (std::size_t i = 0; i < n; ++i) sg += s[i] * g[i];
    auto gz = tp.grad_buffer(zi);
    for (std::size_t i = 0; i < n; ++i) gz[i] += s[i] * (g[i] - sg);
  });
}

namespace {

// Normalizes `count` rows of length `n` in place and returns each row's divisor.
std::vector<double> normalize_rows_in_place(std::vector<double>& data, std::size_t count, std::size_t n,
                                            double eps) {
  std::vector<double> denom(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::span<double> row(data.data() + i * n, n);
    denom[i] = std::max(l2_norm(row), eps);
    for (double& x : row) x /= denom[i];
  }
  return denom;
}

Var normalize_impl(Var v, std::size_t count, std::size_t n, double eps) {
  Tape& t = tape_of(v);
  auto in = t.value(v);
  std::vector<double> out(in.begin(), in.end());
  std::vector<double> denom = normalize_rows_in_place(out, count, n, eps);
  const std::size_t vi = v.id();
  return t.push(t.rows(v), t.cols(v), std::move(out), {v},
                [vi, count, n, eps, denom = std::move(denom)](Tape& tp, std::size_t self) {
                  auto g = tp.grad_buffer(self);
                  auto y = tp.value_at(self);
                  auto gv = tp.grad_buffer(vi);
                  for (std::size_t i = 0; i < count; ++i) {
                    const double* yi = y.data() + i * n;
                    const double* gi = g.data() + i * n;
                    double* go = gv.data() + i * n;
                    // The eps floor makes the map linear, so the projection term drops out.
                    const bool clamped = denom[i] <= eps;
                    double yg = 0.0;
                    if (!clamped) {
                      for (std::size_t c = 0; c < n; ++c) yg += yi[c] * gi[c];
                    }
                    for (std::size_t c = 0; c < n; ++c) go[c] += (gi[c] - yi[c] * yg) / denom[i];
                  }
                });
}

}  // namespace

Var l2_normalize(Var v, double eps) {
  Tape& t = tape_of(v);
  require(t.size(v) >= 1, "l2_normalize", "empty input");
  return normalize_impl(v, 1, t.size(v), eps);
}

Var l2_normalize_rows(Var rows, double eps) {
  Tape& t = tape_of(rows);
  require(t.size(rows) >= 1, "l2_normalize_rows", "empty input");
  return normalize_impl(rows, t.rows(rows), t.cols(rows), eps);
}

Var sq_l2_distance(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require(t.size(a) == t.size(b), "sq_l2_distance", shape(t, a) + " vs " + shape(t, b));
  const double d = num::sq_l2_distance(t.value(a), t.value(b));
  const std::size_t ai = a.id(), bi = b.id(), n = t.size(a);
  return t.push(1, 1, {d}, {a, b}, [ai, bi, n](Tape& tp, std::size_t self) {
    const double g = tp.grad_buffer(self)[0];
    auto av = tp.value_at(ai);
    auto bv = tp.value_at(bi);
    const bool ga = tp.requires_grad_at(ai), gb = tp.requires_grad_at(bi);
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = 2.0 * g * (av[i] - bv[i]);
      if (ga) tp.grad_buffer(ai)[i] += diff;
      if (gb) tp.grad_buffer(bi)[i] -= diff;
    }
  });
}

Var row_sq_distances(Var rows, Var v) {
  Tape& t = same_tape(rows, v);
  const std::size_t count = t.rows(rows), n = t.cols(rows);
  require(t.size(v) == n, "row_sq_distances", "X " + shape(t, rows) + ", v " + shape(t, v));
  auto xv = t.value(rows), vv = t.value(v);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = num::sq_l2_distance(xv.subspan(i * n, n), vv);
  const std::size_t xi = rows.id(), vi = v.id();
  return t.push(count, 1, std::move(out), {rows, v}, [xi, vi, count, n](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    auto xv = tp.value_at(xi);
    auto vv = tp.value_at(vi);
    const bool gx = tp.requires_grad_at(xi), gvon = tp.requires_grad_at(vi);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t c = 0; c < n; ++c) {
        const double diff = 2.0 * g[i] * (xv[i * n + c] - vv[c]);
        if (gx) tp.grad_buffer(xi)[i * n + c] += diff;
        if (gvon) tp.grad_buffer(vi)[c] -= diff;
      }
    }
  });
}

Var concat(Var a, Var b) {
  Tape& t = same_tape(a, b);
  auto av = t.value(a), bv = t.value(b);
  std::vector<double> out(av.begin(), av.end());
  out.insert(out.end(), bv.begin(), bv.end());
  const std::size_t ai = a.id(), bi = b.id(), na = av.size(), nb = bv.size();
  return t.push(na + nb, 1, std::move(out), {a, b}, [ai, bi, na, nb](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    if (tp.requires_grad_at(ai)) {
      auto ga = tp.grad_buffer(ai);
      for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
    }
    if (tp.requires_grad_at(bi)) {
      auto gb = tp.grad_buffer(bi);
      for (std::size_t i = 0; i < nb; ++i) gb[i] += g[na + i];
    }
  });
}

Var slice(Var v, std::size_t offset, std::size_t length) {
  Tape& t = tape_of(v);
  require(offset + length <= t.size(v) && length > 0, "slice", "range outside " + shape(t, v));
  auto vv = t.value(v).subspan(offset, length);
  const std::size_t vi = v.id();
  return t.push(length, 1, std::vector<double>(vv.begin(), vv.end()), {v},
                [vi, offset, length](Tape& tp, std::size_t self) {
                  auto g = tp.grad_buffer(self);
                  auto gv = tp.grad_buffer(vi);
                  for (std::size_t i = 0; i < length; ++i) gv[offset + i] += g[i];
                });
}

Var dot(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require(t.size(a) == t.size(b), "dot", shape(t, a) + " vs " + shape(t, b));
  const double d = num::dot(t.value(a), t.value(b));
  const std::size_t ai = a.id(), bi = b.id(), n = t.size(a);
  return t.push(1, 1, {d}, {a, b}, [ai, bi, n](Tape& tp, std::size_t self) {
    const double g = tp.grad_buffer(self)[0];
    auto av = tp.value_at(ai);
    auto bv = tp.value_at(bi);
    if (tp.requires_grad_at(ai)) {
      auto ga = tp.grad_buffer(ai);
      for (std::size_t i = 0; i < n; ++i) ga[i] += g * bv[i];
    }
    if (tp.requires_grad_at(bi)) {
      auto gb = tp.grad_buffer(bi);
      for (std::size_t i = 0; i < n; ++i) gb[i] += g * av[i];
    }
  });
}

Var weighted_sum(Var weights, Var rows) {
  Tape& t = same_tape(weights, rows);
  const std::size_t count = t.rows(rows), n = t.cols(rows);
  require(t.size(weights) == count, "weighted_sum", "w " + shape(t, weights) + ", X " + shape(t, rows));
  auto wv = t.value(weights), xv = t.value(rows);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t c = 0; c < n; ++c) out[c] += wv[i] * xv[i * n + c];
  }
  const std::size_t wi = weights.id(), xi = rows.id();
  return t.push(n, 1, std::move(out), {weights, rows}, [wi, xi, count, n](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    auto wv = tp.value_at(wi);
    auto xv = tp.value_at(xi);
    if (tp.requires_grad_at(wi)) {
      auto gw = tp.grad_buffer(wi);
      for (std::size_t i = 0; i < count; ++i) gw[i] += num::dot(g, xv.subspan(i * n, n));
    }
    if (tp.requires_grad_at(xi)) {
      auto gx = tp.grad_buffer(xi);
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < n; ++c) gx[i * n + c] += wv[i] * g[c];
      }
    }
  });
}

namespace {

Var binary_elementwise(Var a, Var b, double sign_b, const char* name) {
  Tape& t = same_tape(a, b);
  require(t.size(a) == t.size(b), name, shape(t, a) + " vs " + shape(t, b));
  auto av = t.value(a), bv = t.value(b);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + sign_b * bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return t.push(t.rows(a), t.cols(a), std::move(out), {a, b}, [ai, bi, sign_b](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    if (tp.requires_grad_at(ai)) {
      auto ga = tp.grad_buffer(ai);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad_at(bi)) {
      auto gb = tp.grad_buffer(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign_b * g[i];
    }
  });
}

}  // namespace

Var add(Var a, Var b) { return binary_elementwise(a, b, 1.0, "add"); }
Var sub(Var a, Var b) { return binary_elementwise(a, b, -1.0, "sub"); }

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * av[i];
  const std::size_t ai = a.id();
  return t.push(t.rows(a), t.cols(a), std::move(out), {a}, [ai, factor](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    auto ga = tp.grad_buffer(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var add_constant(Var a, double c) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + c;
  const std::size_t ai = a.id();
  return t.push(t.rows(a), t.cols(a), std::move(out), {a}, [ai](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    auto ga = tp.grad_buffer(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var hinge(Var a) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(av[i], 0.0);
  const std::size_t ai = a.id();
  return t.push(t.rows(a), t.cols(a), std::move(out), {a}, [ai](Tape& tp, std::size_t self) {
    auto g = tp.grad_buffer(self);
    auto av = tp.value_at(ai);
    auto ga = tp.grad_buffer(ai);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (av[i] > 0.0) ga[i] += g[i];
    }
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  auto av = t.value(a);
  double s = 0.0;
  for (double x : av) s += x;
  const std::size_t ai = a.id();
  return t.push(1, 1, {s}, {a}, [ai](Tape& tp, std::size_t self) {
    const double g = tp.grad_buffer(self)[0];
    for (double& x : tp.grad_buffer(ai)) x += g;
  });
}

Var sum(std::span<const Var> scalars) {
  if (scalars.empty()) throw UsageError("sum of an empty list");
  Tape& t = tape_of(scalars[0]);
  double s = 0.0;
  std::vector<std::size_t> ids;
  ids.reserve(scalars.size());
  for (Var v : scalars) {
    if (v.tape() != &t) throw UsageError("operands recorded on different tapes");
    require(t.size(v) == 1, "sum", "expects scalars");
    s += t.scalar_value(v);
    ids.push_back(v.id());
  }
  return t.push(1, 1, {s}, scalars, [ids = std::move(ids)](Tape& tp, std::size_t self) {
    const double g = tp.grad_buffer(self)[0];
    for (std::size_t id : ids) {
      if (tp.requires_grad_at(id)) tp.grad_buffer(id)[0] += g;
    }
  });
}

}  // namespace ad
}  // namespace cvse::num
