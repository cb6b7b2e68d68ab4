#pragma once

// Reverse-mode differentiation over a recorded forward composition.
//
// Every op appends a node holding its value and a closure that pushes the
// node's adjoint into its parents. `Tape::backward` replays the closures in
// reverse creation order, which is a valid topological order because a node
// can only reference nodes created before it.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "cvse/num/tensor.hpp"

namespace cvse::num {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy.
class Var {
 public:
  Var() = default;

  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(const Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tape* tape_ = nullptr;
  std::size_t id_ = std::numeric_limits<std::size_t>::max();
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  /// With `record_gradients == false` the tape only evaluates values.
  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves referencing external storage; the referenced object must outlive the tape.
  Var variable(const Matrix& m);
  Var variable(const Vector& v);
  Var constant_ref(const Matrix& m);
  Var constant_ref(const Vector& v);

  // Owned leaves.
  Var constant(Vector v);
  Var constant(Matrix m);
  Var scalar(double value);

  std::span<const double> value(Var v) const;
  double scalar_value(Var v) const;
  std::size_t rows(Var v) const;
  std::size_t cols(Var v) const;
  std::size_t size(Var v) const { return rows(v) * cols(v); }

  bool records_gradients() const { return record_; }
  bool requires_grad(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }

  /// Reverse pass from a scalar output with adjoint `seed`.
  void backward(Var output, double seed = 1.0);
  /// Reverse pass from an arbitrary-shaped output with adjoint `seed`.
  void backward(Var output, std::span<const double> seed);

  /// Gradient of the last backward output with respect to `v`.
  /// Throws UsageError if `v` is not on this tape or backward has not run.
  std::span<const double> grad(Var v) const;
  Matrix grad_matrix(Var v) const;

  // Op-author interface.
  Var push(std::size_t rows, std::size_t cols, std::vector<double> value,
           std::span<const Var> parents, BackwardFn backward);
  Var push(std::size_t rows, std::size_t cols, std::vector<double> value,
           std::initializer_list<Var> parents, BackwardFn backward) {
    return push(rows, cols, std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                std::move(backward));
  }
  std::span<double> grad_buffer(std::size_t id) { return nodes_[id].grad; }
  std::span<double> grad_buffer(Var v) { return nodes_[v.id_].grad; }
  std::span<const double> value_at(std::size_t id) const;
  bool requires_grad_at(std::size_t id) const { return nodes_[id].requires_grad; }
  void check(Var v) const;

 private:
  struct Node {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> owned;
    const double* external = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
    std::vector<double> grad;
  };

  Var leaf(std::size_t rows, std::size_t cols, const double* external, std::vector<double> owned,
           bool requires_grad);

  bool record_;
  bool has_grad_ = false;
  std::vector<Node> nodes_;
};

/// Differentiable ops. All inputs must live on the same tape.
namespace ad {

/// W x + b for a vector x (n), W (m x n), b (m).
Var linear(Var x, Var weight, Var bias);
/// Row-wise W x_r + b for X (r x n); result is (r x m).
Var linear_rows(Var rows, Var weight, Var bias);
/// W^T y for W (m x n), y (m).
Var linear_transposed(Var weight, Var y);
/// X u for X (r x n), u (n).
Var matvec(Var rows, Var u);

Var softmax(Var z);
Var l2_normalize(Var v, double eps = kNormEps);
Var l2_normalize_rows(Var rows, double eps = kNormEps);

Var sq_l2_distance(Var a, Var b);
/// ||X_r - v||^2 for each row r of X.
Var row_sq_distances(Var rows, Var v);

Var concat(Var a, Var b);
Var slice(Var v, std::size_t offset, std::size_t length);
Var dot(Var a, Var b);
/// sum_r w_r X_r.
Var weighted_sum(Var weights, Var rows);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double factor);
Var add_constant(Var a, double c);
/// max(x, 0) elementwise.
Var hinge(Var a);
Var sum(Var a);
Var sum(std::span<const Var> scalars);

}  // namespace ad

}  // namespace cvse::num
