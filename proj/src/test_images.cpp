#include "ptycho/test_images.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ptycho {

namespace {

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Fixed layouts in unit coordinates: (cx, cy, radius, level).
constexpr double kDiskSpots[][4] = {
    {0.28, 0.30, 0.16, 0.95}, {0.68, 0.24, 0.10, 0.75}, {0.76, 0.62, 0.17, 0.85},
    {0.36, 0.72, 0.12, 0.65}, {0.55, 0.45, 0.07, 1.00}, {0.16, 0.58, 0.08, 0.55},
    {0.62, 0.84, 0.07, 0.70}, {0.86, 0.38, 0.06, 0.60},
};

constexpr double kBlobSpots[][4] = {
    {0.33, 0.36, 0.20, 0.90}, {0.64, 0.58, 0.24, 0.80}, {0.52, 0.26, 0.12, 0.70},
    {0.28, 0.68, 0.13, 0.60}, {0.74, 0.30, 0.10, 0.50}, {0.47, 0.78, 0.15, 0.75},
};

}  // namespace

ad::ComplexTensor test_image(TestImage kind, int rows, int cols) {
  ad::ComplexTensor img(rows, cols);
  const double edge = 1.5 / std::max(rows, cols);  // ~1.5 px transition
  for (int r = 0; r < rows; ++r) {
    const double y = rows > 1 ? static_cast<double>(r) / (rows - 1) : 0.5;
    for (int c = 0; c < cols; ++c) {
      const double x = cols > 1 ? static_cast<double>(c) / (cols - 1) : 0.5;
      double v = 0.0;
      switch (kind) {
        case TestImage::kDisks: {
          v = 0.15 + 0.1 * x + 0.05 * y;
          for (const auto& s : kDiskSpots) {
            const double d = std::hypot(x - s[0], y - s[1]);
            v = std::max(v, s[3] * smoothstep(s[2] + edge, s[2] - edge, d));
          }
          break;
        }
        case TestImage::kBlobs: {
          for (const auto& s : kBlobSpots) {
            const double d2 = (x - s[0]) * (x - s[0]) + (y - s[1]) * (y - s[1]);
            v += s[3] * std::exp(-d2 / (2.0 * s[2] * s[2] * 0.25));
          }
          v = std::min(v, 1.0);
          break;
        }
        case TestImage::kRings: {
          const double d = std::hypot(x - 0.5, y - 0.5);
          v = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * d / 0.12) *
                        std::exp(-d * d / 0.18);
          break;
        }
        case TestImage::kWaves: {
          v = 0.5 +
              0.25 * std::sin(2.0 * std::numbers::pi * (1.8 * x + 0.6 * y)) +
              0.25 * std::sin(2.0 * std::numbers::pi *
                              (2.6 * y - 0.9 * x + 0.3 * std::sin(3.0 * x)));
          break;
        }
      }
      img.re(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace ptycho
