#include "cvse/num/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "cvse/errors.hpp"

namespace cvse::num {

double evaluate(const ScalarGraph& graph, std::span<const Matrix> params) {
  Tape tape(false);
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Matrix& p : params) vars.push_back(tape.constant_ref(p));
  const double value = tape.scalar_value(graph(tape, vars));
  if (!std::isfinite(value)) throw NumericError("grad_check: non-finite function value");
  return value;
}

GradCheckReport grad_check(const ScalarGraph& graph, std::vector<Matrix> params, double h) {
  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const Matrix& p : params) vars.push_back(tape.variable(p));
    Var out = graph(tape, vars);
    if (!std::isfinite(tape.scalar_value(out))) throw NumericError("grad_check: non-finite function value");
    tape.backward(out);
    for (Var v : vars) analytic.push_back(tape.grad_matrix(v));
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].span();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + h;
      const double up = evaluate(graph, params);
      p[i] = saved - h;
      const double down = evaluate(graph, params);
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k].span()[i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      if (err > report.max_relative_error) {
        report = {err, k, i, a, numeric};
      }
    }
  }
  return report;
}

}  // namespace cvse::num
