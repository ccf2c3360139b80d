#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ptycho/tensor.hpp"

namespace ptycho::ad {

class Tape;

namespace detail {

/// Grad landing slot shared between a leaf Variable and its tape node.
struct LeafSlot {
  bool real_only = false;
  std::optional<ComplexTensor> grad;
};

}  // namespace detail

/// A value in the recorded computation. Leaves are created through
/// Tape::leaf and receive gradients on backward; constants carry no tape
/// reference and never receive a gradient.
class Variable {
 public:
  Variable() = default;

  /// Untracked constant.
  static Variable constant(ComplexTensor v, bool real_only = false);

  const ComplexTensor& value() const { return *value_; }
  std::shared_ptr<const ComplexTensor> value_ptr() const { return value_; }
  bool requires_grad() const { return node_ >= 0; }
  bool real_only() const { return real_only_; }
  bool defined() const { return value_ != nullptr; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }

  /// Gradient in the d/da + j*d/db convention; null before backward or for
  /// variables the loss does not reach.
  const ComplexTensor* grad() const {
    return leaf_ && leaf_->grad ? &*leaf_->grad : nullptr;
  }
  ComplexTensor grad_or_zero() const {
    if (const ComplexTensor* g = grad()) return *g;
    return ComplexTensor(value_->rows(), value_->cols());
  }

 private:
  friend class Tape;

  std::shared_ptr<const ComplexTensor> value_;
  Tape* tape_ = nullptr;
  int node_ = -1;
  bool real_only_ = false;
  std::shared_ptr<detail::LeafSlot> leaf_;
};

/// Records one optimization step's forward computation as a topologically
/// ordered node list; a single backward sweep visits each node once in
/// reverse order and is then consumed.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const ComplexTensor& gout)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Variable leaf(ComplexTensor v, bool real_only = false);

  /// Seeds d/dloss = 1 and propagates adjoints down the node list, landing
  /// gradients on every reachable leaf. The tape is consumed afterwards.
  void backward(const Variable& loss);

  std::size_t node_count() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  // Node construction API used by the op library (and by tests that need to
  // inject deliberately wrong adjoints).
  int push_node(std::shared_ptr<const ComplexTensor> value, bool real_only,
                BackwardFn backward);
  Variable wrap(int node, std::shared_ptr<const ComplexTensor> value,
                bool real_only);
  void accumulate_adjoint(int node, const ComplexTensor& g);
  const ComplexTensor& node_value(int node) const;

 private:
  struct Node {
    std::shared_ptr<const ComplexTensor> value;
    BackwardFn backward;  // null for leaves
    std::shared_ptr<detail::LeafSlot> leaf;
    bool real_only = false;
  };

  std::vector<Node> nodes_;
  std::vector<std::optional<ComplexTensor>> adjoints_;
  bool consumed_ = false;
};

// Differentiable primitives. Each returns a Variable recorded on the tape of
// its tracked operands (operands may also be constants). Adjoints follow the
// d/da + j*d/db convention throughout.

Variable add(const Variable& a, const Variable& b);
Variable sub(const Variable& a, const Variable& b);
Variable mul(const Variable& a, const Variable& b);  // Hadamard or scalar broadcast
Variable scale(const Variable& a, std::complex<double> c);
Variable add_scalar(const Variable& a, std::complex<double> c);
Variable conj(const Variable& a);
Variable modulus_squared(const Variable& a);          // real output
Variable sqrt_positive(const Variable& a);            // real in, sqrt(max(re,0))
Variable relu(const Variable& a);                     // real in, max(0, re)
Variable abs_real(const Variable& a);                 // real in, |re|
Variable sum(const Variable& a);                      // 1x1 output
Variable fft2(const Variable& a);
Variable ifft2(const Variable& a);
Variable exp_imag(const Variable& theta);             // real in, exp(j*theta)
Variable pad_center(const Variable& a, int pad_rows, int pad_cols);
Variable crop_center(const Variable& a, int rows, int cols);
Variable stack_rows(const std::vector<Variable>& parts);
/// out = s.re * plane for a real scalar s and a constant plane.
Variable scalar_times_plane(const Variable& s, const ComplexTensor& plane);
Variable mul_plane(const Variable& a, const ComplexTensor& plane);  // constant plane

}  // namespace ptycho::ad
