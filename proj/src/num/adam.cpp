#include "cvse/num/adam.hpp"

#include <cmath>
#include <string>

#include "cvse/errors.hpp"

namespace cvse::num {

AdamState AdamState::for_parameters(std::span<const Matrix> params, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const Matrix& p : params) {
    s.first_moment.emplace_back(p.rows(), p.cols());
    s.second_moment.emplace_back(p.rows(), p.cols());
  }
  return s;
}

AdamState adam_step(std::span<Matrix> params, std::span<const Matrix> grads, const AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ShapeError("adam_step: parameter/gradient/state count mismatch");
  }
  if (!(state.beta1 > 0.0 && state.beta1 < 1.0 && state.beta2 > 0.0 && state.beta2 < 1.0)) {
    throw UsageError("adam_step: betas must lie in (0, 1)");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const bool ok = params[k].rows() == grads[k].rows() && params[k].cols() == grads[k].cols() &&
                    params[k].rows() == state.first_moment[k].rows() &&
                    params[k].cols() == state.first_moment[k].cols() &&
                    params[k].rows() == state.second_moment[k].rows() &&
                    params[k].cols() == state.second_moment[k].cols();
    if (!ok) throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(k));
  }

  AdamState next = state;
  next.step += 1;
  const double t = static_cast<double>(next.step);
  const double c1 = 1.0 - std::pow(next.beta1, t);
  const double c2 = 1.0 - std::pow(next.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].span();
    auto g = grads[k].span();
    auto m = next.first_moment[k].span();
    auto v = next.second_moment[k].span();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = next.beta1 * m[i] + (1.0 - next.beta1) * g[i];
      v[i] = next.beta2 * v[i] + (1.0 - next.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= next.learning_rate * m_hat / (std::sqrt(v_hat) + next.epsilon);
    }
  }
  return next;
}

}  // namespace cvse::num
