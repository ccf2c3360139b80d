#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ptycho/gradcheck.hpp"
#include "ptycho/spatial.hpp"
#include "test_util.hpp"

using namespace ptycho;
using namespace ptycho::ad;
using ptycho::testing::random_tensor;

namespace {

ComplexTensor ramp_image(int n, double ax, double ay, double b) {
  ComplexTensor img(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      img.re(r, c) = b + ax * c + ay * r;
      img.im(r, c) = 0.5 * b - ax * r + ay * c;
    }
  }
  return img;
}

}  // namespace

TEST_CASE("hat kernel values and partition of unity") {
  CHECK(kernel_k1(0.0) == 1.0);
  CHECK(kernel_k1(0.25) == 0.75);
  CHECK(kernel_k1(1.0) == 0.0);
  CHECK(kernel_k1(-1.0) == 0.0);
  CHECK(kernel_k1(1.7) == 0.0);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double x = 10.0 * (rng.uniform() - 0.5);
    double total = 0.0;
    for (int n = -7; n <= 7; ++n) total += kernel_k1(x - n);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("identity grid") {
  const SamplingGrid g = generate_grid({1.0, 1.0, 0.0, 0.0}, 5, 5);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      CHECK(g.x[r * 5 + c] == doctest::Approx(2.0 * c / 4 - 1.0));
      CHECK(g.y[r * 5 + c] == doctest::Approx(2.0 * r / 4 - 1.0));
    }
  }
}

TEST_CASE("unit translation shifts sampling by one input pixel") {
  const int w = 9;
  AffineParams p;
  p.tx = 2.0 / (w - 1);
  const SamplingGrid g = generate_grid(p, w, w);
  ComplexTensor img = ramp_image(w, 1.0, 0.0, 0.0);  // re = column index
  const ComplexTensor v = bilinear_sample(img, g);
  for (int r = 0; r < w; ++r) {
    for (int c = 0; c + 1 < w; ++c) {  // last column samples out of bounds
      CHECK(v.re(r, c) == doctest::Approx(c + 1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("half-scale grid covers the central half extent") {
  const SamplingGrid g = generate_grid({0.5, 0.5, 0.0, 0.0}, 3, 3);
  CHECK(g.x[0] == doctest::Approx(-0.5));
  CHECK(g.x[2] == doctest::Approx(0.5));
  CHECK(g.y[0] == doctest::Approx(-0.5));
  CHECK(g.y[6] == doctest::Approx(0.5));
  CHECK(g.x[4] == doctest::Approx(0.0));
}

TEST_CASE("integer-aligned grid reproduces a direct crop") {
  Rng rng(2);
  const int d = 16, k = 6;
  const ComplexTensor u = random_tensor(rng, d, d);
  // Window starting at integer offsets (3, 5): center-aligned translation.
  const int row0 = 3, col0 = 5;
  CropPlan plan;
  plan.out_rows = plan.out_cols = k;
  plan.sx = plan.sy = double(k - 1) / (d - 1);
  plan.base_tx = 2.0 * (col0 + (k - 1) / 2.0 - (d - 1) / 2.0) / (d - 1);
  plan.base_ty = 2.0 * (row0 + (k - 1) / 2.0 - (d - 1) / 2.0) / (d - 1);
  const SamplingGrid g = generate_grid(
      {plan.sx, plan.sy, plan.base_tx, plan.base_ty}, k, k);
  const ComplexTensor v = bilinear_sample(u, g);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      CHECK(std::abs(v.at(r, c) - u.at(row0 + r, col0 + c)) < 1e-13);
    }
  }
}

TEST_CASE("bilinear interpolation is exact on affine images") {
  const int n = 12;
  const ComplexTensor img = ramp_image(n, 0.7, -0.3, 2.0);
  AffineParams p;
  p.tx = 1.0 / (n - 1);  // half an input pixel
  p.ty = 3.0 / (n - 1);  // one and a half pixels
  const SamplingGrid g = generate_grid(p, n, n);
  const ComplexTensor v = bilinear_sample(img, g);
  for (int r = 1; r < n - 3; ++r) {
    for (int c = 1; c < n - 2; ++c) {
      const double col = c + 0.5, row = r + 1.5;
      const std::complex<double> expected{2.0 + 0.7 * col - 0.3 * row,
                                          1.0 - 0.7 * row - 0.3 * col};
      CHECK(std::abs(v.at(r, c) - expected) < 1e-12);
    }
  }
}

TEST_CASE("sampling a constant image returns ones wherever taps are inside") {
  const ComplexTensor ones = ComplexTensor::constant(10, 10, 1.0);
  const SamplingGrid g =
      generate_grid({0.8, 0.8, 0.07, -0.13}, 7, 7);
  const ComplexTensor v = bilinear_sample(ones, g);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v.re()[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scatter is the exact adjoint of sampling") {
  Rng rng(3);
  const int d = 14, k = 9;
  const ComplexTensor u = random_tensor(rng, d, d);
  const ComplexTensor w = random_tensor(rng, k, k);
  const SamplingGrid g = generate_grid({0.6, 0.7, 0.11, -0.23}, k, k);
  const ComplexTensor v = bilinear_sample(u, g);
  const ComplexTensor s = bilinear_scatter(w, g, d, d);
  double lhs = 0.0, rhs = 0.0;  // real inner products per plane
  for (std::size_t i = 0; i < v.size(); ++i) {
    lhs += v.re()[i] * w.re()[i] + v.im()[i] * w.im()[i];
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    rhs += u.re()[i] * s.re()[i] + u.im()[i] * s.im()[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("out-of-bounds sampling contributes zeros and is counted") {
  const ComplexTensor u = ComplexTensor::constant(8, 8, 1.0);
  const SamplingGrid g = generate_grid({1.0, 1.0, 5.0, 0.0}, 4, 4);
  const ComplexTensor v = bilinear_sample(u, g);
  CHECK(v.squared_norm() == 0.0);
  CHECK(count_out_of_bounds(g, 8, 8) == 16);
  const SamplingGrid inside = generate_grid({0.5, 0.5, 0.0, 0.0}, 4, 4);
  CHECK(count_out_of_bounds(inside, 8, 8) == 0);
}

TEST_CASE("translation gradients match finite differences off-lattice") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const ComplexTensor u = random_tensor(rng, 12, 12);
    CropPlan plan;
    plan.out_rows = plan.out_cols = 6;
    plan.sx = plan.sy = 5.0 / 11.0;
    plan.base_tx = 0.04 + 0.01 * rng.uniform();
    plan.base_ty = -0.06 + 0.01 * rng.uniform();
    std::vector<CheckPoint> pts{
        {u, false},
        {ComplexTensor::scalar(0.013 + 0.05 * rng.uniform()), true},
        {ComplexTensor::scalar(-0.021 - 0.05 * rng.uniform()), true}};
    const double err = finite_difference_check(
        [&](Tape&, const std::vector<Variable>& v) {
          return sum(modulus_squared(bilinear_crop(v[0], v[1], v[2], plan)));
        },
        pts);
    CHECK(err < 1e-5);
  }
}

TEST_CASE("shift composition is exact on affine images") {
  const int n = 16, k = 16;
  const ComplexTensor img = ramp_image(n, 0.4, 0.9, 1.0);
  const double t1 = 1.7 / (n - 1), t2 = 2.9 / (n - 1);
  const SamplingGrid g1 = generate_grid({1.0, 1.0, t1, -t2}, k, k);
  const SamplingGrid g2 = generate_grid({1.0, 1.0, t2, -t1}, k, k);
  const SamplingGrid g12 = generate_grid({1.0, 1.0, t1 + t2, -t1 - t2}, k, k);
  const ComplexTensor two_step = bilinear_sample(bilinear_sample(img, g1), g2);
  const ComplexTensor one_step = bilinear_sample(img, g12);
  // Compare away from the borders the shifts drag out of bounds (rows shift
  // up by ~2.3 px, columns right by ~2.3 px).
  for (int r = 5; r < k; ++r) {
    for (int c = 0; c < k - 6; ++c) {
      CHECK(std::abs(two_step.at(r, c) - one_step.at(r, c)) < 1e-12);
    }
  }
}
