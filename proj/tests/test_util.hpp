#pragma once

#include <complex>
#include <vector>

#include "ptycho/rng.hpp"
#include "ptycho/tensor.hpp"

namespace ptycho::testing {

inline ad::ComplexTensor random_tensor(Rng& rng, int rows, int cols,
                                       double scale = 1.0) {
  ad::ComplexTensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.re()[i] = scale * (2.0 * rng.uniform() - 1.0);
    t.im()[i] = scale * (2.0 * rng.uniform() - 1.0);
  }
  return t;
}

inline ad::ComplexTensor random_real_tensor(Rng& rng, int rows, int cols,
                                            double lo = -1.0, double hi = 1.0) {
  ad::ComplexTensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.re()[i] = lo + (hi - lo) * rng.uniform();
  }
  return t;
}

/// Reference O(N^2) 2D DFT with unitary normalization, written directly from
/// the transform definition; independent oracle for the FFT path.
inline ad::ComplexTensor naive_dft2(const ad::ComplexTensor& a, bool inverse) {
  const int rows = a.rows(), cols = a.cols();
  ad::ComplexTensor out(rows, cols);
  const double sign = inverse ? 1.0 : -1.0;
  for (int u = 0; u < rows; ++u) {
    for (int v = 0; v < cols; ++v) {
      std::complex<double> acc{0.0, 0.0};
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          const double ang = 2.0 * 3.14159265358979323846 *
                             (double(u) * r / rows + double(v) * c / cols);
          acc += a.at(r, c) * std::polar(1.0, sign * ang);
        }
      }
      out.set(u, v, acc / std::sqrt(double(rows) * cols));
    }
  }
  return out;
}

}  // namespace ptycho::testing
