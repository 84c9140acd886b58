#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "horseshoe/henon_map.hpp"
#include "horseshoe/polynomial.hpp"

namespace horseshoe {
namespace {

Complex random_complex(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> u(-r, r);
  return {u(rng), u(rng)};
}

TEST(HenonMap, FixedPointOfQuadraticFamily) {
  const HenonMap F = HenonMap::normal_form(1.0, -10.0);
  const double x = 1.0 + std::sqrt(11.0);
  const Point2 z = F.apply(Point2{x, x});
  EXPECT_NEAR(std::abs(z.x - x), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(z.y - x), 0.0, 1e-13);
}

TEST(HenonMap, OriginFixedWhenCIsZero) {
  const HenonMap F = HenonMap::normal_form(1.0, 0.0);
  EXPECT_EQ(F.apply(Point2{0.0, 0.0}), (Point2{0.0, 0.0}));
}

TEST(HenonMap, ResonantExampleFixedPoint) {
  const HenonMap F = HenonMap::normal_form(1.0 / 8.0, 9.0 / 32.0);
  const Point2 z = F.apply(Point2{3.0 / 8.0, 3.0 / 8.0});
  EXPECT_DOUBLE_EQ(z.x.real(), 3.0 / 8.0);
  EXPECT_DOUBLE_EQ(z.y.real(), 3.0 / 8.0);
  const Point2 w = F.apply_inverse(Point2{3.0 / 8.0, 3.0 / 8.0});
  EXPECT_DOUBLE_EQ(w.x.real(), 3.0 / 8.0);
  EXPECT_DOUBLE_EQ(w.y.real(), 3.0 / 8.0);
}

TEST(HenonMap, InverseMapsPeriodTwoCycle) {
  // x + y = -(1 + a), 2y = x^2 + c for the 2-cycle of x^2 - 10 - y.
  const HenonMap F = HenonMap::normal_form(1.0, -10.0);
  const double s7 = std::sqrt(7.0);
  const Point2 w = F.apply_inverse(Point2{-1.0 + s7, -1.0 - s7});
  EXPECT_NEAR(std::abs(w.x - (-1.0 - s7)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(w.y - (-1.0 + s7)), 0.0, 1e-13);
}

TEST(HenonMap, RoundTripOnRandomPoints) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    Complex a = random_complex(rng, 2.0);
    if (std::abs(a) < 0.1) a = 0.1;
    const HenonMap F = HenonMap::normal_form(a, random_complex(rng, 10.0));
    const Point2 z{random_complex(rng, 3.0), random_complex(rng, 3.0)};
    const Point2 back = F.apply(F.apply_inverse(z));
    EXPECT_LE(dist(back, z), 1e-12 * (1.0 + norm(z)) / std::min(1.0, std::abs(a)));
    const Point2 fwd = F.apply_inverse(F.apply(z));
    EXPECT_LE(dist(fwd, z), 1e-10 * (1.0 + norm(z)));
  }
}

TEST(HenonMap, JacobianOfResonantExample) {
  const HenonMap F = HenonMap::normal_form(1.0 / 8.0, 9.0 / 32.0);
  const Matrix2C J = F.jacobian(Point2{3.0 / 8.0, 3.0 / 8.0});
  EXPECT_DOUBLE_EQ(J.m00.real(), 0.75);
  EXPECT_DOUBLE_EQ(J.m01.real(), -0.125);
  EXPECT_DOUBLE_EQ(J.m10.real(), 1.0);
  EXPECT_DOUBLE_EQ(J.m11.real(), 0.0);
  const auto ev = J.eigenvalues();
  EXPECT_NEAR(std::abs(ev[0] - 0.25), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(ev[1] - 0.5), 0.0, 1e-15);
}

TEST(HenonMap, JacobianDeterminantIsA) {
  std::mt19937_64 rng(3);
  const Complex a{0.7, -0.4};
  const HenonMap F = HenonMap::normal_form(a, {-2.0, 1.0});
  for (int i = 0; i < 100; ++i) {
    const Matrix2C J = F.jacobian(Point2{random_complex(rng, 5.0), random_complex(rng, 5.0)});
    EXPECT_NEAR(std::abs(J.det() - a), 0.0, 1e-14);
  }
  const Matrix2C J0 = F.jacobian(Point2{0.0, 0.0});
  EXPECT_EQ(J0.m00, F.dp(0.0));
  EXPECT_EQ(J0.m01, -a);
}

TEST(HenonMap, JacobianMatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  const HenonMap F({Complex{-3.0, 0.5}, 0.2, 0.0, 1.0}, Complex{0.4, 0.1});
  const double h = 1e-5;
  for (int i = 0; i < 200; ++i) {
    const Point2 z{random_complex(rng, 2.0), random_complex(rng, 2.0)};
    const Matrix2C J = F.jacobian(z);
    const Point2 dx = (1.0 / (2.0 * h)) * (F.apply(z + Point2{h, 0.0}) - F.apply(z - Point2{h, 0.0}));
    const Point2 dy = (1.0 / (2.0 * h)) * (F.apply(z + Point2{0.0, h}) - F.apply(z - Point2{0.0, h}));
    const double scale = 1.0 + std::abs(J.m00);
    EXPECT_LT(std::abs(dx.x - J.m00) / scale, 1e-6);
    EXPECT_LT(std::abs(dx.y - J.m10) / scale, 1e-6);
    EXPECT_LT(std::abs(dy.x - J.m01) / scale, 1e-6);
    EXPECT_LT(std::abs(dy.y - J.m11) / scale, 1e-6);
  }
}

TEST(HenonMap, DivergenceIsSignalled) {
  const HenonMap F = HenonMap::normal_form(1.0, -10.0);
  EXPECT_THROW((void)F.apply(Point2{1e200, 0.0}), DivergedError);
}

TEST(HenonMap, RejectsDegenerateParameters) {
  EXPECT_THROW(HenonMap({1.0, 2.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(HenonMap::normal_form(0.0, -10.0), std::invalid_argument);
}

TEST(HenonMap, DescriptorRoundTrip) {
  const HenonMap F = HenonMap::parse("henon d=2 a=1+0i c=-10+0i");
  EXPECT_EQ(F.a(), Complex(1.0));
  EXPECT_EQ(F.c(), Complex(-10.0));
  EXPECT_TRUE(F.is_normal_form());
  const HenonMap G = HenonMap::parse(F.descriptor());
  EXPECT_EQ(G.coeffs(), F.coeffs());
  EXPECT_EQ(G.a(), F.a());
  const HenonMap P = HenonMap::parse("poly [1+2i,0,-3,1] a=0.5-0.25i");
  EXPECT_EQ(P.degree(), 3);
  EXPECT_EQ(P.coeffs()[0], Complex(1.0, 2.0));
  EXPECT_EQ(P.a(), Complex(0.5, -0.25));
  EXPECT_EQ(HenonMap::parse(P.descriptor()).coeffs(), P.coeffs());
}

TEST(HenonMap, ComplexLiterals) {
  EXPECT_EQ(parse_complex("1.5-2i"), Complex(1.5, -2.0));
  EXPECT_EQ(parse_complex("-3"), Complex(-3.0, 0.0));
  EXPECT_EQ(parse_complex("-0.5i"), Complex(0.0, -0.5));
  EXPECT_EQ(parse_complex(format_complex({0.1, -1e-300})), Complex(0.1, -1e-300));
  EXPECT_THROW(parse_complex("abc"), std::invalid_argument);
}

TEST(HenonMap, BoxEnclosureSoundness) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int box = 0; box < 20; ++box) {
    const HenonMap F = HenonMap::normal_form(random_complex(rng, 1.5) + 0.2, random_complex(rng, 10.0));
    const Complex cx = random_complex(rng, 4.0);
    const Complex cy = random_complex(rng, 4.0);
    const double rx = 0.5 * u(rng);
    const double ry = 0.5 * u(rng);
    const Box2 b{ComplexRect::around(cx, rx), ComplexRect::around(cy, ry)};
    const Box2 img = F.apply(b);
    const Box2 pre = F.apply_inverse(b);
    for (int i = 0; i < 10000; ++i) {
      const Point2 z{cx + Complex{rx * (2 * u(rng) - 1), rx * (2 * u(rng) - 1)},
                     cy + Complex{ry * (2 * u(rng) - 1), ry * (2 * u(rng) - 1)}};
      ASSERT_TRUE(img.contains(F.apply(z)));
      ASSERT_TRUE(pre.contains(F.apply_inverse(z)));
    }
  }
}

TEST(HenonMap, EscapeMonotonicityOutsideR0) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const HenonMap F = HenonMap::normal_form(random_complex(rng, 2.0), random_complex(rng, 20.0));
    const double R = escape_radius(F) * (1.0 + 1e-6);
    const double r = R * (1.0 + 3.0 * u(rng));
    const Complex x = std::polar(r, 2.0 * std::numbers::pi * u(rng));
    const Complex y = std::polar(r * u(rng), 2.0 * std::numbers::pi * u(rng));
    EXPECT_GT(std::abs(F.apply(Point2{x, y}).x), std::abs(x));
  }
}

TEST(EscapeRadius, ClosedForm) {
  EXPECT_NEAR(escape_radius(HenonMap::normal_form(1.0, -10.0)), 1.0 + std::sqrt(11.0), 1e-12);
  EXPECT_NEAR(escape_radius(HenonMap::normal_form(1.0, -6.0)), 1.0 + std::sqrt(7.0), 1e-12);
  EXPECT_NEAR(escape_radius(HenonMap::normal_form(Complex{0.3, 0.4}, 0.0)), 1.5, 1e-12);
}

TEST(QuasiHenonLike, BoundaryChecks) {
  const HenonMap F = HenonMap::normal_form(1.0, -10.0);
  const HenonLikeCheck ok = check_quasi_henon_like(F, Bidisc::square(4.5), Orientation::horizontal);
  EXPECT_EQ(ok.verdict, Verdict::yes);
  EXPECT_GT(ok.margin, 0.0);
  EXPECT_EQ(ok.degree, 2);
  const HenonLikeCheck bad = check_quasi_henon_like(F, Bidisc::square(1.0), Orientation::horizontal);
  EXPECT_NE(bad.verdict, Verdict::yes);
  const HenonMap cubic({-10.0, 0.0, 0.0, 1.0}, 1.0);
  const HenonLikeCheck c3 = check_quasi_henon_like(cubic, Bidisc::square(4.5), Orientation::horizontal);
  EXPECT_EQ(c3.verdict, Verdict::yes);
  EXPECT_EQ(c3.degree, 3);
}

TEST(QuasiHenonLike, BoundaryDegreeIsConstant) {
  const HenonMap F = HenonMap::normal_form(1.0, -10.0);
  const Bidisc B = Bidisc::square(4.5);
  EXPECT_EQ(boundary_degree(F, B, 0.0), 2);
  for (int k = 0; k < 32; ++k) {
    const Complex y = std::polar(4.5 * (k % 4) / 4.0, 2.0 * std::numbers::pi * k / 32.0);
    EXPECT_EQ(boundary_degree(F, B, y), 2) << "y=" << y;
  }
  const HenonMap cubic({-10.0, 0.0, 0.0, 1.0}, 1.0);
  EXPECT_EQ(boundary_degree(cubic, B, 0.0), 3);
}

TEST(Polynomial, RootsOfCubic) {
  // (x - 1)(x + 2)(x - 3i)
  const std::vector<Complex> c{Complex{0, 6}, Complex{-2, -3}, Complex{1, -3}, 1.0};
  const auto roots = polynomial_roots(c);
  ASSERT_EQ(roots.size(), 3u);
  for (Complex r : {Complex{1.0}, Complex{-2.0}, Complex{0, 3}}) {
    double best = 1e9;
    for (Complex z : roots) best = std::min(best, std::abs(z - r));
    EXPECT_LT(best, 1e-12);
  }
}

}  // namespace
}  // namespace horseshoe
