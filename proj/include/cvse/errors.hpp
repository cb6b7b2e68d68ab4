#pragma once

#include <stdexcept>
#include <string>

namespace cvse {

/// Operand shapes disagree (dimension mismatch, empty vector where one is required).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// API misuse: empty batch, K larger than the point count, unrecorded gradient request.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced NaN/Inf or violated a numeric invariant.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (missing view, bad file, dimension drift).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown study, sentence or group id.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace cvse
