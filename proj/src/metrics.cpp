#include "ptycho/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ptycho {

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

std::vector<double> gaussian_window() {
  std::vector<double> w(kSsimWindow);
  const double c = (kSsimWindow - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    w[i] = std::exp(-(i - c) * (i - c) / (2.0 * kSsimSigma * kSsimSigma));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

/// Separable weighted local mean, 'valid' region only.
std::vector<double> local_mean(const std::vector<double>& img, int rows,
                               int cols, const std::vector<double>& w) {
  const int k = static_cast<int>(w.size());
  const int out_rows = rows - k + 1, out_cols = cols - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(rows) * out_cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += w[i] * img[r * cols + c + i];
      tmp[r * out_cols + c] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_rows) * out_cols);
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += w[i] * tmp[(r + i) * out_cols + c];
      out[r * out_cols + c] = acc;
    }
  }
  return out;
}

double bilinear_at(const ComplexTensor& img, double col, double row) {
  const int c0 = static_cast<int>(std::floor(col));
  const int r0 = static_cast<int>(std::floor(row));
  const double fc = col - c0, fr = row - r0;
  double acc = 0.0;
  for (int dr = 0; dr <= 1; ++dr) {
    for (int dc = 0; dc <= 1; ++dc) {
      const int r = r0 + dr, c = c0 + dc;
      if (r < 0 || r >= img.rows() || c < 0 || c >= img.cols()) continue;
      acc += (dr ? fr : 1.0 - fr) * (dc ? fc : 1.0 - fc) * img.re(r, c);
    }
  }
  return acc;
}

/// Linear-interpolated crossing of `level` between samples i and i+1.
double crossing(const std::vector<double>& v, int i, double level) {
  const double d = v[i + 1] - v[i];
  if (d == 0.0) return i;
  return i + (level - v[i]) / d;
}

}  // namespace

ComplexTensor crop_roi(const ComplexTensor& t, const EvalRoi& roi) {
  if (roi.row0 < 0 || roi.col0 < 0 || roi.row0 + roi.rows > t.rows() ||
      roi.col0 + roi.cols > t.cols() || roi.rows <= 0 || roi.cols <= 0) {
    throw std::invalid_argument("crop_roi: roi outside tensor");
  }
  ComplexTensor out(roi.rows, roi.cols);
  for (int r = 0; r < roi.rows; ++r) {
    for (int c = 0; c < roi.cols; ++c) {
      out.re(r, c) = t.re(roi.row0 + r, roi.col0 + c);
      out.im(r, c) = t.im(roi.row0 + r, roi.col0 + c);
    }
  }
  return out;
}

ComplexTensor magnitude_plane(const ComplexTensor& t) {
  ComplexTensor out(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.re()[i] = std::hypot(t.re()[i], t.im()[i]);
  }
  return out;
}

ComplexTensor phase_plane(const ComplexTensor& t) {
  ComplexTensor out(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.size(); ++i) {
    double p = std::atan2(t.im()[i], t.re()[i]);
    if (p <= -std::numbers::pi) p += 2.0 * std::numbers::pi;
    out.re()[i] = p;
  }
  return out;
}

double ssim(const ComplexTensor& a, const ComplexTensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a.re()[i]) || !std::isfinite(b.re()[i])) {
      throw std::invalid_argument("ssim: non-finite input");
    }
  }
  double lo = a.re()[0], hi = a.re()[0];
  for (std::size_t i = 0; i < a.size(); ++i) {
    lo = std::min({lo, a.re()[i], b.re()[i]});
    hi = std::max({hi, a.re()[i], b.re()[i]});
  }
  const double range = hi - lo > 0.0 ? hi - lo : 1.0;
  const double c1 = kSsimK1 * range * kSsimK1 * range;
  const double c2 = kSsimK2 * range * kSsimK2 * range;

  const int rows = a.rows(), cols = a.cols();
  std::vector<double> av(a.re().begin(), a.re().end());
  std::vector<double> bv(b.re().begin(), b.re().end());
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = av[i] * av[i];
    bb[i] = bv[i] * bv[i];
    ab[i] = av[i] * bv[i];
  }

  std::vector<double> mu_a, mu_b, m_aa, m_bb, m_ab;
  if (rows >= kSsimWindow && cols >= kSsimWindow) {
    const std::vector<double> w = gaussian_window();
    mu_a = local_mean(av, rows, cols, w);
    mu_b = local_mean(bv, rows, cols, w);
    m_aa = local_mean(aa, rows, cols, w);
    m_bb = local_mean(bb, rows, cols, w);
    m_ab = local_mean(ab, rows, cols, w);
  } else {
    // Too small for the window: one global statistic.
    auto mean_of = [&](const std::vector<double>& v) {
      double acc = 0.0;
      for (double x : v) acc += x;
      return std::vector<double>{acc / v.size()};
    };
    mu_a = mean_of(av);
    mu_b = mean_of(bv);
    m_aa = mean_of(aa);
    m_bb = mean_of(bb);
    m_ab = mean_of(ab);
  }

  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double va = m_aa[i] - mu_a[i] * mu_a[i];
    const double vb = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    acc += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
           ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
  }
  return acc / mu_a.size();
}

ComplexTensor remove_ambiguities(const ComplexTensor& recon,
                                 const ComplexTensor& truth) {
  if (!recon.same_shape(truth)) {
    throw std::invalid_argument("remove_ambiguities: shape mismatch");
  }
  if (recon.squared_norm() == 0.0) return recon;

  const int rows = recon.rows(), cols = recon.cols();
  // D = truth * conj(recon); the sought phasor approximates D/|D|.
  const ComplexTensor d = truth * conjugate(recon);

  // Ramp slopes from magnitude-weighted wrapped phase increments.
  double sum_wx = 0.0, sum_x = 0.0, sum_wy = 0.0, sum_y = 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      const std::complex<double> inc = d.at(r, c + 1) * std::conj(d.at(r, c));
      const double w = std::abs(inc);
      sum_x += w * std::arg(inc);
      sum_wx += w;
    }
  }
  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::complex<double> inc = d.at(r + 1, c) * std::conj(d.at(r, c));
      const double w = std::abs(inc);
      sum_y += w * std::arg(inc);
      sum_wy += w;
    }
  }
  const double ax = sum_wx > 0.0 ? sum_x / sum_wx : 0.0;
  const double ay = sum_wy > 0.0 ? sum_y / sum_wy : 0.0;

  // Global offset after removing the ramp.
  const double cr = (cols - 1) / 2.0, rr = (rows - 1) / 2.0;
  std::complex<double> acc{0.0, 0.0};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double ramp = ax * (c - cr) + ay * (r - rr);
      acc += d.at(r, c) * std::polar(1.0, -ramp);
    }
  }
  const double phi = std::abs(acc) > 0.0 ? std::arg(acc) : 0.0;

  ComplexTensor out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double ramp = ax * (c - cr) + ay * (r - rr);
      out.set(r, c, recon.at(r, c) * std::polar(1.0, phi + ramp));
    }
  }
  return out;
}

PositionErrorStats position_error_stats(
    const std::vector<std::array<double, 2>>& estimated_px,
    const std::vector<std::array<double, 2>>& truth_px, int histogram_bins) {
  if (estimated_px.size() != truth_px.size()) {
    throw std::invalid_argument("position_error_stats: count mismatch");
  }
  PositionErrorStats out;
  for (std::size_t j = 0; j < estimated_px.size(); ++j) {
    out.per_position.push_back(std::hypot(estimated_px[j][0] - truth_px[j][0],
                                          estimated_px[j][1] - truth_px[j][1]));
  }
  std::vector<double> sorted = out.per_position;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  out.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  out.max = sorted.back();
  double acc = 0.0;
  for (double v : sorted) acc += v;
  out.mean = acc / n;

  const double top = out.max > 0.0 ? out.max : 1.0;
  out.histogram_counts.assign(histogram_bins, 0);
  for (int i = 0; i <= histogram_bins; ++i) {
    out.histogram_edges.push_back(top * i / histogram_bins);
  }
  for (double v : out.per_position) {
    int bin = static_cast<int>(v / top * histogram_bins);
    bin = std::min(bin, histogram_bins - 1);
    ++out.histogram_counts[bin];
  }
  return out;
}

ProfileResult line_profile_fwhm(const ComplexTensor& image,
                                std::array<double, 2> p0,
                                std::array<double, 2> p1, int samples) {
  if (samples < 2) throw std::invalid_argument("line_profile_fwhm: samples < 2");
  auto inside = [&](const std::array<double, 2>& p) {
    return p[0] >= 0 && p[0] <= image.cols() - 1 && p[1] >= 0 &&
           p[1] <= image.rows() - 1;
  };
  if (!inside(p0) || !inside(p1)) {
    throw std::invalid_argument("line_profile_fwhm: endpoints outside image");
  }
  ProfileResult out;
  const double len = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
  const double step = len / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double f = static_cast<double>(i) / (samples - 1);
    out.t_px.push_back(i * step);
    out.values.push_back(bilinear_at(image, p0[0] + f * (p1[0] - p0[0]),
                                     p0[1] + f * (p1[1] - p0[1])));
  }

  const auto [min_it, max_it] =
      std::minmax_element(out.values.begin(), out.values.end());
  const double lo = *min_it, hi = *max_it;
  if (hi - lo <= 1e-12 * std::max(std::abs(hi), 1.0)) {
    out.kind = ProfileWidthKind::kUndefined;
    return out;
  }
  const int peak = static_cast<int>(max_it - out.values.begin());
  if (peak > 0 && peak < samples - 1) {
    // Dominant interior peak: nearest half-maximum crossings on both sides.
    const double half = lo + 0.5 * (hi - lo);
    int left = -1, right = -1;
    for (int i = peak - 1; i >= 0; --i) {
      if (out.values[i] <= half) {
        left = i;
        break;
      }
    }
    for (int i = peak + 1; i < samples; ++i) {
      if (out.values[i] <= half) {
        right = i - 1;
        break;
      }
    }
    if (left >= 0 && right >= 0) {
      const double tl = crossing(out.values, left, half);
      const double tr = crossing(out.values, right, half);
      out.kind = ProfileWidthKind::kPeakFwhm;
      out.width_px = (tr - tl) * step;
      return out;
    }
  }
  // No interior peak: treat as an edge response, 25%-75% width.
  const double q1 = lo + 0.25 * (hi - lo), q3 = lo + 0.75 * (hi - lo);
  double t1 = -1.0, t3 = -1.0;
  for (int i = 0; i + 1 < samples; ++i) {
    const double a = out.values[i], b = out.values[i + 1];
    if (t1 < 0 && ((a <= q1 && b >= q1) || (a >= q1 && b <= q1))) {
      t1 = crossing(out.values, i, q1);
    }
    if (t3 < 0 && ((a <= q3 && b >= q3) || (a >= q3 && b <= q3))) {
      t3 = crossing(out.values, i, q3);
    }
  }
  if (t1 >= 0 && t3 >= 0) {
    out.kind = ProfileWidthKind::kEdgeWidth;
    out.width_px = std::abs(t3 - t1) * step;
  }
  return out;
}

double abbe_limit(double wavelength, double numerical_aperture) {
  if (numerical_aperture <= 0.0) {
    throw std::invalid_argument("abbe_limit: NA must be > 0");
  }
  return 0.82 * wavelength / numerical_aperture;
}

std::string ConvergenceHistory::to_csv() const {
  std::ostringstream os;
  os << "epoch,data_fidelity,regularization,total_loss,z_m,"
     << "pos_err_median,pos_err_mean,pos_err_max,ssim_magnitude,ssim_phase\n";
  os.precision(17);
  for (const EpochRecord& e : epochs) {
    os << e.epoch << ',' << e.data_fidelity << ',' << e.regularization << ','
       << e.total_loss << ',' << e.z_m << ',';
    if (e.has_truth_metrics) {
      os << e.pos_err_median << ',' << e.pos_err_mean << ',' << e.pos_err_max
         << ',' << e.ssim_magnitude << ',' << e.ssim_phase;
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace ptycho
