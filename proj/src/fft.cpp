#include "ptycho/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace ptycho::ad {

namespace {

// One interleaved scratch buffer and plan pair per shape. FFTW_ESTIMATE keeps
// plan selection deterministic across runs of the same build.
struct PlanEntry {
  fftw_complex* buf = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  std::size_t n = 0;

  ~PlanEntry() {
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
    if (buf) fftw_free(buf);
  }
};

std::mutex g_plan_mutex;

PlanEntry& plan_for(int rows, int cols) {
  static std::map<std::pair<int, int>, PlanEntry> cache;
  auto [it, inserted] = cache.try_emplace({rows, cols});
  PlanEntry& e = it->second;
  if (inserted) {
    e.n = static_cast<std::size_t>(rows) * cols;
    e.buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * e.n));
    e.forward = fftw_plan_dft_2d(rows, cols, e.buf, e.buf, FFTW_FORWARD,
                                 FFTW_ESTIMATE);
    e.inverse = fftw_plan_dft_2d(rows, cols, e.buf, e.buf, FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  }
  return e;
}

ComplexTensor transform(const ComplexTensor& a, bool inverse) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  PlanEntry& e = plan_for(a.rows(), a.cols());
  for (std::size_t i = 0; i < e.n; ++i) {
    e.buf[i][0] = a.re()[i];
    e.buf[i][1] = a.im()[i];
  }
  fftw_execute(inverse ? e.inverse : e.forward);
  ComplexTensor out(a.rows(), a.cols());
  const double norm = 1.0 / std::sqrt(static_cast<double>(e.n));
  for (std::size_t i = 0; i < e.n; ++i) {
    out.re()[i] = e.buf[i][0] * norm;
    out.im()[i] = e.buf[i][1] * norm;
  }
  return out;
}

}  // namespace

ComplexTensor fft2_raw(const ComplexTensor& a) { return transform(a, false); }

ComplexTensor ifft2_raw(const ComplexTensor& a) { return transform(a, true); }

double fft_freq(int k, int n, double d) {
  const int signed_k = (k <= (n - 1) / 2) ? k : k - n;
  return static_cast<double>(signed_k) / (n * d);
}

}  // namespace ptycho::ad
