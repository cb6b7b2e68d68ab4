#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvse/num/tensor.hpp"

namespace cvse::num {

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;

  /// Zeroed moment buffers shaped like `params`.
  static AdamState for_parameters(std::span<const Matrix> params, double learning_rate = 1e-3);
};

/// One bias-corrected Adam update. `params` is updated in place; the advanced
/// optimizer state is returned and the input state is left untouched.
AdamState adam_step(std::span<Matrix> params, std::span<const Matrix> grads, const AdamState& state);

}  // namespace cvse::num
