#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ptycho::ad {

/// 2D complex field stored as two contiguous row-major real planes.
/// Wavefields, transmission functions, filters and gradients all use this
/// type; real-valued quantities keep their imaginary plane at zero.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  ComplexTensor(int rows, int cols)
      : rows_(rows), cols_(cols), re_(size(), 0.0), im_(size(), 0.0) {}

  static ComplexTensor constant(int rows, int cols, std::complex<double> v);
  static ComplexTensor scalar(std::complex<double> v) { return constant(1, 1, v); }
  static ComplexTensor from_real(std::vector<double> re, int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }
  bool same_shape(const ComplexTensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

  double& re(int r, int c) { return re_[idx(r, c)]; }
  double re(int r, int c) const { return re_[idx(r, c)]; }
  double& im(int r, int c) { return im_[idx(r, c)]; }
  double im(int r, int c) const { return im_[idx(r, c)]; }

  std::complex<double> at(int r, int c) const {
    return {re_[idx(r, c)], im_[idx(r, c)]};
  }
  void set(int r, int c, std::complex<double> v) {
    re_[idx(r, c)] = v.real();
    im_[idx(r, c)] = v.imag();
  }

  std::span<double> re() { return re_; }
  std::span<const double> re() const { return re_; }
  std::span<double> im() { return im_; }
  std::span<const double> im() const { return im_; }

  /// Sum of |z|^2 over all samples.
  double squared_norm() const;
  std::complex<double> sum() const;
  bool all_finite() const;
  /// Max over samples of |this - o| (shape must match).
  double max_abs_diff(const ComplexTensor& o) const;

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_ = 0, cols_ = 0;
  std::vector<double> re_, im_;
};

// Elementwise arithmetic on raw tensors. These back the tape primitives and
// the non-differentiable simulation path, so both evaluate bit-identically.
ComplexTensor operator+(const ComplexTensor& a, const ComplexTensor& b);
ComplexTensor operator-(const ComplexTensor& a, const ComplexTensor& b);
ComplexTensor operator*(const ComplexTensor& a, const ComplexTensor& b);  // Hadamard
ComplexTensor conjugate(const ComplexTensor& a);
ComplexTensor scale(const ComplexTensor& a, std::complex<double> c);
ComplexTensor modulus_squared(const ComplexTensor& a);   // real-valued output
ComplexTensor sqrt_clamped(const ComplexTensor& a);      // sqrt(max(re, 0)), real
ComplexTensor exp_imag(const ComplexTensor& theta);      // exp(j * theta.re)
ComplexTensor pad_center(const ComplexTensor& a, int pad_rows, int pad_cols);
ComplexTensor crop_center(const ComplexTensor& a, int rows, int cols);

void accumulate(ComplexTensor& into, const ComplexTensor& g);  // into += g

}  // namespace ptycho::ad
