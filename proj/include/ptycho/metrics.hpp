#pragma once

#include <array>
#include <string>
#include <vector>

#include "ptycho/tensor.hpp"

namespace ptycho {

using ad::ComplexTensor;

/// Rectangle (in object pixels) over which truth-aware metrics are computed;
/// regions the scan never illuminated carry no information.
struct EvalRoi {
  int row0 = 0, col0 = 0;
  int rows = 0, cols = 0;
};

ComplexTensor crop_roi(const ComplexTensor& t, const EvalRoi& roi);

/// Magnitude plane |z| and phase plane arg(z) wrapped to (-pi, pi].
ComplexTensor magnitude_plane(const ComplexTensor& t);
ComplexTensor phase_plane(const ComplexTensor& t);

/// Structural similarity between two real images: 11x11 Gaussian window with
/// sigma 1.5, K1 = 0.01, K2 = 0.03. The dynamic range is taken over both
/// images together so the metric stays symmetric; images smaller than the
/// window fall back to global statistics.
double ssim(const ComplexTensor& a, const ComplexTensor& b);

/// Removes the global phase offset and the best-fit linear phase ramp from
/// `recon`, choosing the phasor field e^{j(phi + ax + by)} that minimizes the
/// distance to `truth`. Zero-energy input is returned unchanged.
ComplexTensor remove_ambiguities(const ComplexTensor& recon,
                                 const ComplexTensor& truth);

struct PositionErrorStats {
  std::vector<double> per_position;  // Euclidean error in pixels
  double median = 0.0, mean = 0.0, max = 0.0;
  std::vector<double> histogram_edges;
  std::vector<int> histogram_counts;
};

/// Per-shot Euclidean distance in pixels between estimated positions
/// (nominal + correction) and the true ones.
PositionErrorStats position_error_stats(
    const std::vector<std::array<double, 2>>& estimated_px,
    const std::vector<std::array<double, 2>>& truth_px, int histogram_bins = 20);

enum class ProfileWidthKind { kPeakFwhm, kEdgeWidth, kUndefined };

struct ProfileResult {
  std::vector<double> t_px;     // arc length along the segment, pixels
  std::vector<double> values;   // bilinearly interpolated intensities
  ProfileWidthKind kind = ProfileWidthKind::kUndefined;
  double width_px = 0.0;        // FWHM or 25-75% edge width
};

/// Intensity profile along the segment p0 -> p1 ((col,row) pixel coords) with
/// the stated number of samples, plus its FWHM. Falls back to the 25-75%
/// edge-response width when the profile has no interior peak; flat profiles
/// are flagged undefined.
ProfileResult line_profile_fwhm(const ComplexTensor& image,
                                std::array<double, 2> p0,
                                std::array<double, 2> p1, int samples);

/// Coherent-illumination resolution limit 0.82 * lambda / NA.
double abbe_limit(double wavelength, double numerical_aperture);

struct EpochRecord {
  int epoch = 0;
  double data_fidelity = 0.0;
  double regularization = 0.0;
  double total_loss = 0.0;
  double z_m = 0.0;
  double pos_err_median = 0.0, pos_err_mean = 0.0, pos_err_max = 0.0;
  double ssim_magnitude = 0.0, ssim_phase = 0.0;
  bool has_truth_metrics = false;
};

struct ConvergenceHistory {
  std::vector<EpochRecord> epochs;

  std::string to_csv() const;
};

}  // namespace ptycho
