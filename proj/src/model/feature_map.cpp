#include "cvse/model/feature_map.hpp"

#include <string>

#include "cvse/errors.hpp"

namespace cvse::model {

FeatureMap::FeatureMap(std::size_t width, std::size_t height, std::size_t channels, std::vector<double> values)
    : width_(width), height_(height) {
  if (width == 0 || height == 0 || channels == 0) {
    throw ShapeError("feature map dimensions must be positive");
  }
  if (values.size() != width * height * channels) {
    throw ShapeError("feature map expects " + std::to_string(width * height * channels) + " values, got " +
                     std::to_string(values.size()));
  }
  if (!num::all_finite(values)) throw DataError("feature map contains non-finite values");
  regions_ = num::Matrix(width * height, channels, std::move(values));
}

}  // namespace cvse::model
