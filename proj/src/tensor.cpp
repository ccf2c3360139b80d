#include "ptycho/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace ptycho::ad {

namespace {

void require_same_shape(const ComplexTensor& a, const ComplexTensor& b,
                        const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

}  // namespace

ComplexTensor ComplexTensor::constant(int rows, int cols,
                                      std::complex<double> v) {
  ComplexTensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.re_[i] = v.real();
    t.im_[i] = v.imag();
  }
  return t;
}

ComplexTensor ComplexTensor::from_real(std::vector<double> re, int rows,
                                       int cols) {
  if (re.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("from_real: plane size does not match shape");
  }
  ComplexTensor t(rows, cols);
  t.re_ = std::move(re);
  return t;
}

double ComplexTensor::squared_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += re_[i] * re_[i] + im_[i] * im_[i];
  return s;
}

std::complex<double> ComplexTensor::sum() const {
  double sr = 0.0, si = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    sr += re_[i];
    si += im_[i];
  }
  return {sr, si};
}

bool ComplexTensor::all_finite() const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (!std::isfinite(re_[i]) || !std::isfinite(im_[i])) return false;
  }
  return true;
}

double ComplexTensor::max_abs_diff(const ComplexTensor& o) const {
  require_same_shape(*this, o, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    m = std::max(m, std::hypot(re_[i] - o.re_[i], im_[i] - o.im_[i]));
  }
  return m;
}

ComplexTensor operator+(const ComplexTensor& a, const ComplexTensor& b) {
  require_same_shape(a, b, "add");
  ComplexTensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.re()[i] = a.re()[i] + b.re()[i];
    out.im()[i] = a.im()[i] + b.im()[i];
  }
  return out;
}

ComplexTensor operator-(const ComplexTensor& a, const ComplexTensor& b) {
  require_same_shape(a, b, "subtract");
  ComplexTensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.re()[i] = a.re()[i] - b.re()[i];
    out.im()[i] = a.im()[i] - b.im()[i];
  }
  return out;
}

ComplexTensor operator*(const ComplexTensor& a, const ComplexTensor& b) {
  require_same_shape(a, b, "multiply");
  ComplexTensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a.re()[i], ai = a.im()[i];
    const double br = b.re()[i], bi = b.im()[i];
    out.re()[i] = ar * br - ai * bi;
    out.im()[i] = ar * bi + ai * br;
  }
  return out;
}

ComplexTensor conjugate(const ComplexTensor& a) {
  ComplexTensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.re()[i] = a.re()[i];
    out.im()[i] = -a.im()[i];
  }
  return out;
}

ComplexTensor scale(const ComplexTensor& a, std::complex<double> c) {
  ComplexTensor out(a.rows(), a.cols());
  const double cr = c.real(), ci = c.imag();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a.re()[i], ai = a.im()[i];
    out.re()[i] = ar * cr - ai * ci;
    out.im()[i] = ar * ci + ai * cr;
  }
  return out;
}

ComplexTensor modulus_squared(const ComplexTensor& a) {
  ComplexTensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.re()[i] = a.re()[i] * a.re()[i] + a.im()[i] * a.im()[i];
  }
  return out;
}

ComplexTensor sqrt_clamped(const ComplexTensor& a) {
  ComplexTensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.re()[i] = std::sqrt(std::max(a.re()[i], 0.0));
  }
  return out;
}

ComplexTensor exp_imag(const ComplexTensor& theta) {
  ComplexTensor out(theta.rows(), theta.cols());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    out.re()[i] = std::cos(theta.re()[i]);
    out.im()[i] = std::sin(theta.re()[i]);
  }
  return out;
}

ComplexTensor pad_center(const ComplexTensor& a, int pad_rows, int pad_cols) {
  if (pad_rows < 0 || pad_cols < 0) {
    throw std::invalid_argument("pad_center: negative padding");
  }
  ComplexTensor out(a.rows() + 2 * pad_rows, a.cols() + 2 * pad_cols);
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      out.re(r + pad_rows, c + pad_cols) = a.re(r, c);
      out.im(r + pad_rows, c + pad_cols) = a.im(r, c);
    }
  }
  return out;
}

ComplexTensor crop_center(const ComplexTensor& a, int rows, int cols) {
  if (rows > a.rows() || cols > a.cols() || rows <= 0 || cols <= 0) {
    throw std::invalid_argument("crop_center: crop exceeds tensor bounds");
  }
  const int off_r = (a.rows() - rows) / 2;
  const int off_c = (a.cols() - cols) / 2;
  ComplexTensor out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out.re(r, c) = a.re(r + off_r, c + off_c);
      out.im(r, c) = a.im(r + off_r, c + off_c);
    }
  }
  return out;
}

void accumulate(ComplexTensor& into, const ComplexTensor& g) {
  require_same_shape(into, g, "accumulate");
  for (std::size_t i = 0; i < into.size(); ++i) {
    into.re()[i] += g.re()[i];
    into.im()[i] += g.im()[i];
  }
}

}  // namespace ptycho::ad
