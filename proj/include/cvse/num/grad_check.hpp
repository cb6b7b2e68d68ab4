#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cvse/num/tape.hpp"
#include "cvse/num/tensor.hpp"

namespace cvse::num {

/// Builds a scalar output on `tape` from the recorded parameter leaves.
using ScalarGraph = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares reverse-mode gradients of `graph` against central differences
/// with step `h` over every coordinate of `params`. The relative error of a
/// coordinate is |a - n| / max(|a|, |n|, 1e-8). Throws NumericError if the
/// function is non-finite at any evaluated point.
GradCheckReport grad_check(const ScalarGraph& graph, std::vector<Matrix> params, double h = 1e-4);

/// Evaluates `graph` without recording gradients.
double evaluate(const ScalarGraph& graph, std::span<const Matrix> params);

}  // namespace cvse::num
