#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ptycho/fft.hpp"
#include "ptycho/gradcheck.hpp"
#include "ptycho/tape.hpp"
#include "test_util.hpp"

using namespace ptycho;
using namespace ptycho::ad;
using ptycho::testing::naive_dft2;
using ptycho::testing::random_real_tensor;
using ptycho::testing::random_tensor;

namespace {

Variable sum_mod2(Tape&, const std::vector<Variable>& vars) {
  Variable acc;
  for (const Variable& v : vars) {
    Variable term = sum(modulus_squared(v));
    acc = acc.defined() ? add(acc, term) : term;
  }
  return acc;
}

}  // namespace

TEST_CASE("elementwise multiply identities") {
  Rng rng(7);
  const ComplexTensor z = random_tensor(rng, 3, 5);
  const ComplexTensor ones = ComplexTensor::constant(3, 5, 1.0);
  CHECK((Variable::constant(ones), true));
  const ComplexTensor prod = ones * z;
  CHECK(prod.max_abs_diff(z) == doctest::Approx(0.0));

  const ComplexTensor i1 = ComplexTensor::constant(1, 1, {0.0, 1.0});
  const ComplexTensor sq = i1 * i1;
  CHECK(sq.re(0, 0) == doctest::Approx(-1.0));
  CHECK(sq.im(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("multiply rejects mismatched shapes") {
  Tape tape;
  Variable a = tape.leaf(ComplexTensor(2, 3));
  Variable b = tape.leaf(ComplexTensor(3, 2));
  CHECK_THROWS_AS(mul(a, b), std::invalid_argument);
}

TEST_CASE("multiply gradient matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::vector<CheckPoint> pts{{random_tensor(rng, 4, 4), false},
                                {random_tensor(rng, 4, 4), false}};
    const double err = finite_difference_check(
        [](Tape&, const std::vector<Variable>& v) {
          return sum(modulus_squared(mul(v[0], v[1])));
        },
        pts);
    CHECK(err < 1e-6);
  }
}

TEST_CASE("modulus squared values and gradient") {
  ComplexTensor t(1, 1);
  t.set(0, 0, {3.0, 4.0});
  CHECK(modulus_squared(t).re(0, 0) == doctest::Approx(25.0));

  // Zero input: value and gradient both zero.
  Tape tape;
  Variable x = tape.leaf(ComplexTensor(2, 2));
  tape.backward(sum(modulus_squared(x)));
  CHECK(x.grad()->max_abs_diff(ComplexTensor(2, 2)) == 0.0);

  Rng rng(3);
  std::vector<CheckPoint> pts{{random_tensor(rng, 4, 4), false}};
  CHECK(finite_difference_check(sum_mod2, pts) < 1e-6);
}

TEST_CASE("fft of constant concentrates at DC under unitary scaling") {
  Tape tape;
  Variable x = tape.leaf(ComplexTensor::constant(4, 4, 1.0));
  const ComplexTensor f = fft2(x).value();
  CHECK(f.re(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(f.im(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  double off_dc = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r || c) off_dc += std::abs(f.at(r, c));
    }
  }
  CHECK(off_dc < 1e-12);
}

TEST_CASE("fft round trip and Parseval") {
  Rng rng(11);
  const ComplexTensor x = random_tensor(rng, 32, 32);
  const ComplexTensor back = ifft2_raw(fft2_raw(x));
  CHECK(back.max_abs_diff(x) < 1e-12);

  // Parseval by direct summation.
  const ComplexTensor f = fft2_raw(x);
  double direct = 0.0, spectral = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    direct += x.re()[i] * x.re()[i] + x.im()[i] * x.im()[i];
    spectral += f.re()[i] * f.re()[i] + f.im()[i] * f.im()[i];
  }
  CHECK(std::abs(direct - spectral) / direct < 1e-12);
}

TEST_CASE("fft matches the direct transform definition on odd sizes") {
  Rng rng(13);
  const ComplexTensor x = random_tensor(rng, 6, 9);
  CHECK(fft2_raw(x).max_abs_diff(naive_dft2(x, false)) < 1e-10);
  CHECK(ifft2_raw(x).max_abs_diff(naive_dft2(x, true)) < 1e-10);
}

TEST_CASE("fft adjoint pair passes the gradient check") {
  Rng rng(17);
  std::vector<CheckPoint> pts{{random_tensor(rng, 5, 6), false}};
  CHECK(finite_difference_check(
            [](Tape&, const std::vector<Variable>& v) {
              return sum(modulus_squared(fft2(v[0])));
            },
            pts) < 1e-6);
  CHECK(finite_difference_check(
            [](Tape&, const std::vector<Variable>& v) {
              return sum(modulus_squared(ifft2(add(v[0], conj(v[0])))));
            },
            pts) < 1e-6);
}

TEST_CASE("backward: quadratic form gradient is 2x") {
  Rng rng(19);
  const ComplexTensor xv = random_tensor(rng, 3, 3);
  Tape tape;
  Variable x = tape.leaf(xv);
  tape.backward(sum(modulus_squared(x)));
  const ComplexTensor expected = ad::scale(xv, 2.0);
  CHECK(x.grad()->max_abs_diff(expected) < 1e-14);
}

TEST_CASE("backward: unreachable variable gets zero gradient") {
  Tape tape;
  Rng rng(23);
  Variable x = tape.leaf(random_tensor(rng, 2, 2));
  Variable y = tape.leaf(random_tensor(rng, 2, 2));
  tape.backward(sum(modulus_squared(x)));
  CHECK(y.grad() == nullptr);
  CHECK(y.grad_or_zero().squared_norm() == 0.0);
}

TEST_CASE("backward twice on a consumed tape fails") {
  Tape tape;
  Variable x = tape.leaf(ComplexTensor::constant(2, 2, 1.0));
  Variable loss = sum(modulus_squared(x));
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), std::logic_error);
}

TEST_CASE("backward rejects non-scalar and complex losses") {
  {
    Tape tape;
    Variable x = tape.leaf(ComplexTensor::constant(2, 2, 1.0));
    CHECK_THROWS_AS(tape.backward(modulus_squared(x)), std::invalid_argument);
  }
  {
    Tape tape;
    Variable x = tape.leaf(ComplexTensor::constant(2, 2, {1.0, 0.5}));
    CHECK_THROWS_AS(tape.backward(sum(x)), std::invalid_argument);
  }
}

TEST_CASE("finite_difference_check on a linear function") {
  Rng rng(29);
  std::vector<CheckPoint> pts{{random_tensor(rng, 4, 4), false}};
  const double err = finite_difference_check(
      [](Tape&, const std::vector<Variable>& v) {
        return sum(modulus_squared(add(v[0], conj(v[0]))));
      },
      pts);
  // |x + conj(x)|^2 = 4 re(x)^2 is quadratic; the check is near machine level.
  CHECK(err < 1e-8);

  // Central differences are exact for linear functions at any step; a larger
  // step keeps the quotient clear of summation rounding.
  const double err_linear = finite_difference_check(
      [](Tape&, const std::vector<Variable>& v) {
        return ad::scale(sum(add(v[0], conj(v[0]))), 0.5);
      },
      pts, 1e-3);
  CHECK(err_linear < 1e-10);
}

TEST_CASE("finite_difference_check flags a wrong adjoint") {
  Rng rng(31);
  std::vector<CheckPoint> pts{{random_tensor(rng, 3, 3), false}};
  // Identity op with a sign-flipped backward rule.
  auto broken_identity = [](const Variable& a) {
    Tape* tape = a.tape();
    const int ia = a.node();
    auto value = a.value_ptr();
    const int id = tape->push_node(
        value, a.real_only(), [ia](Tape& t, const ComplexTensor& g) {
          t.accumulate_adjoint(ia, ad::scale(g, -1.0));
        });
    return tape->wrap(id, value, a.real_only());
  };
  const double err = finite_difference_check(
      [&](Tape&, const std::vector<Variable>& v) {
        return sum(modulus_squared(broken_identity(v[0])));
      },
      pts);
  CHECK(err == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("remaining primitives pass the gradient check") {
  Rng rng(37);
  const ComplexTensor a = random_tensor(rng, 4, 5);
  const ComplexTensor b = random_tensor(rng, 4, 5);
  // Positive real plane away from zero (sqrt kink) and the abs/relu kinks.
  ComplexTensor pos = random_real_tensor(rng, 4, 5, 0.5, 2.0);
  ComplexTensor signed_plane = random_real_tensor(rng, 4, 5, 0.1, 0.9);
  for (std::size_t i = 0; i < signed_plane.size(); ++i) {
    if (i % 2) signed_plane.re()[i] = -signed_plane.re()[i];
  }

  SUBCASE("add/sub/scale/conj chain") {
    std::vector<CheckPoint> pts{{a, false}, {b, false}};
    CHECK(finite_difference_check(
              [](Tape&, const std::vector<Variable>& v) {
                Variable w = sub(ad::scale(v[0], {0.7, -0.3}), conj(v[1]));
                return sum(modulus_squared(add(w, v[1])));
              },
              pts) < 1e-6);
  }
  SUBCASE("scalar broadcast in mul and add") {
    std::vector<CheckPoint> pts{{a, false},
                                {ComplexTensor::scalar({0.4, 0.3}), false}};
    CHECK(finite_difference_check(
              [](Tape&, const std::vector<Variable>& v) {
                return sum(modulus_squared(add(mul(v[1], v[0]), v[1])));
              },
              pts) < 1e-6);
  }
  SUBCASE("sqrt of a positive real plane") {
    std::vector<CheckPoint> pts{{pos, true}};
    CHECK(finite_difference_check(
              [](Tape&, const std::vector<Variable>& v) {
                return sum(mul(sqrt_positive(v[0]), sqrt_positive(v[0])));
              },
              pts) < 1e-6);
  }
  SUBCASE("relu and abs away from their kinks") {
    std::vector<CheckPoint> pts{{signed_plane, true}};
    CHECK(finite_difference_check(
              [](Tape&, const std::vector<Variable>& v) {
                Variable r = relu(v[0]);
                return add(sum(mul(r, r)), sum(abs_real(v[0])));
              },
              pts) < 1e-6);
  }
  SUBCASE("exp of j*theta") {
    std::vector<CheckPoint> pts{{random_real_tensor(rng, 4, 4, -2.0, 2.0), true},
                                {random_tensor(rng, 4, 4), false}};
    CHECK(finite_difference_check(
              [](Tape&, const std::vector<Variable>& v) {
                return sum(modulus_squared(add(exp_imag(v[0]), v[1])));
              },
              pts) < 1e-6);
  }
  SUBCASE("pad and crop adjoints") {
    std::vector<CheckPoint> pts{{a, false}};
    CHECK(finite_difference_check(
              [](Tape&, const std::vector<Variable>& v) {
                Variable padded = pad_center(v[0], 2, 3);
                return sum(modulus_squared(fft2(padded)));
              },
              pts) < 1e-6);
    CHECK(finite_difference_check(
              [](Tape&, const std::vector<Variable>& v) {
                return sum(modulus_squared(crop_center(v[0], 2, 3)));
              },
              pts) < 1e-6);
  }
  SUBCASE("stacking") {
    std::vector<CheckPoint> pts{{a, false}, {b, false}};
    CHECK(finite_difference_check(
              [](Tape&, const std::vector<Variable>& v) {
                return sum(modulus_squared(
                    stack_rows({v[0], conj(v[1]), v[0]})));
              },
              pts) < 1e-6);
  }
  SUBCASE("scalar times constant plane") {
    std::vector<CheckPoint> pts{{ComplexTensor::scalar(0.8), true}};
    const ComplexTensor plane = random_tensor(rng, 3, 3);
    CHECK(finite_difference_check(
              [&](Tape&, const std::vector<Variable>& v) {
                return sum(modulus_squared(
                    exp_imag(scalar_times_plane(v[0], modulus_squared(plane)))));
              },
              pts) < 1e-6);
  }
  SUBCASE("multiply by constant plane") {
    std::vector<CheckPoint> pts{{a, false}};
    const ComplexTensor plane = random_tensor(rng, 4, 5);
    CHECK(finite_difference_check(
              [&](Tape&, const std::vector<Variable>& v) {
                return sum(modulus_squared(mul_plane(v[0], plane)));
              },
              pts) < 1e-6);
  }
}

TEST_CASE("pad/crop center values") {
  ComplexTensor t(2, 2);
  t.set(0, 0, {1.0, -1.0});
  t.set(1, 1, {2.0, 0.5});
  const ComplexTensor p = ad::pad_center(t, 1, 2);
  CHECK(p.rows() == 4);
  CHECK(p.cols() == 6);
  CHECK(p.at(1, 2) == std::complex<double>{1.0, -1.0});
  CHECK(ad::crop_center(p, 2, 2).max_abs_diff(t) == 0.0);
}

TEST_CASE("gradient of a real loss w.r.t. a real-constrained leaf is real") {
  Rng rng(41);
  Tape tape;
  Variable theta = tape.leaf(random_real_tensor(rng, 4, 4), /*real_only=*/true);
  Variable c = tape.leaf(random_tensor(rng, 4, 4));
  tape.backward(sum(modulus_squared(mul(exp_imag(theta), c))));
  double im_norm = 0.0;
  for (double v : theta.grad()->im()) im_norm += std::abs(v);
  CHECK(im_norm <= 1e-12);
}

TEST_CASE("two identical forward passes give bitwise-identical gradients") {
  Rng rng(43);
  const ComplexTensor xv = random_tensor(rng, 8, 8);
  const ComplexTensor yv = random_tensor(rng, 8, 8);
  auto run = [&] {
    Tape tape;
    Variable x = tape.leaf(xv);
    Variable y = tape.leaf(yv);
    Variable loss =
        sum(modulus_squared(fft2(mul(x, add(y, ad::scale(x, {0.3, 0.1}))))));
    tape.backward(loss);
    return std::make_pair(x.grad_or_zero(), y.grad_or_zero());
  };
  const auto [gx1, gy1] = run();
  const auto [gx2, gy2] = run();
  for (std::size_t i = 0; i < gx1.size(); ++i) {
    CHECK(gx1.re()[i] == gx2.re()[i]);
    CHECK(gx1.im()[i] == gx2.im()[i]);
    CHECK(gy1.re()[i] == gy2.re()[i]);
    CHECK(gy1.im()[i] == gy2.im()[i]);
  }
}

TEST_CASE("primitives keep finite values on finite inputs") {
  Rng rng(47);
  const ComplexTensor a = random_tensor(rng, 6, 6, 1e3);
  CHECK(fft2_raw(a).all_finite());
  CHECK((a * a).all_finite());
  CHECK(ad::modulus_squared(a).all_finite());
  CHECK(ad::exp_imag(ad::modulus_squared(a)).all_finite());
}
