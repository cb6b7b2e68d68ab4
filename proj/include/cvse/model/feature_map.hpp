#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvse/num/tensor.hpp"

namespace cvse::model {

/// w x h grid of region vectors for one image view. Region j = y * width + x.
class FeatureMap {
 public:
  FeatureMap() = default;
  /// `values` holds width*height*channels reals, region-major then channel.
  FeatureMap(std::size_t width, std::size_t height, std::size_t channels, std::vector<double> values);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t channels() const { return regions_.cols(); }
  std::size_t region_count() const { return regions_.rows(); }
  bool empty() const { return region_count() == 0; }

  std::span<const double> region(std::size_t j) const { return regions_.row(j); }
  /// Regions as rows of a (w*h) x channels matrix.
  const num::Matrix& regions() const { return regions_; }

  bool operator==(const FeatureMap&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  num::Matrix regions_;
};

}  // namespace cvse::model
