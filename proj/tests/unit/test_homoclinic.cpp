#include <gtest/gtest.h>

#include <cmath>

#include "horseshoe/homoclinic.hpp"
#include "horseshoe/symbolic.hpp"

namespace horseshoe {
namespace {

const HenonMap kMap = HenonMap::normal_form(0.3, -1.4);

// Fixed points of x^2 - 1.4 - 0.3 y solve x^2 - 1.3 x - 1.4 = 0: x = 2, -0.7.
SaddleData saddle_at_two() { return saddle_at(kMap, Point2{2.0, 2.0}, 1); }

TEST(Saddle, MultipliersAtTwo) {
  const SaddleData s = saddle_at_two();
  EXPECT_LT(dist(s.p, Point2{2.0, 2.0}), 1e-12);
  // Eigenvalues of [[4, -0.3], [1, 0]]: 2 +- sqrt(3.7).
  EXPECT_NEAR(std::abs(s.lambda - Complex{2.0 + std::sqrt(3.7)}), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(s.mu - Complex{2.0 - std::sqrt(3.7)}), 0.0, 1e-12);
  const Matrix2C J = kMap.jacobian(s.p);
  EXPECT_LT(norm(J.apply(s.eigvec_u) - Point2{s.lambda * s.eigvec_u.x, s.lambda * s.eigvec_u.y}), 1e-12);
  EXPECT_LT(norm(J.apply(s.eigvec_s) - Point2{s.mu * s.eigvec_s.x, s.mu * s.eigvec_s.y}), 1e-12);
}

TEST(Saddle, FindSaddlesListsBothFixedPoints) {
  const auto all = find_saddles(kMap, 1);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_THROW((void)saddle_at(kMap, Point2{2.0, 2.0}, 0), std::invalid_argument);
}

TEST(Saddle, RejectsNonHyperbolic) {
  // a = 1, c = 0: the fixed point x = 0 has multipliers of modulus 1.
  EXPECT_THROW((void)saddle_at(HenonMap::normal_form(1.0, 0.0), Point2{0.0, 0.0}, 1), NotHyperbolicError);
}

TEST(Parametrize, ResidualWithinTolerance) {
  const SaddleData s = saddle_at_two();
  for (ManifoldKind which : {ManifoldKind::unstable, ManifoldKind::stable}) {
    const ManifoldParam m = parametrize_manifold(kMap, s, which);
    EXPECT_LE(m.residual, 1e-9);
    EXPECT_GT(m.valid_radius, 0.0);
    EXPECT_LT(dist(m(0.0), s.p), 1e-14);
    // Invariance checked directly against the map at a few parameters.
    for (double f : {-0.9, -0.3, 0.5, 0.9}) {
      const Complex t = f * m.valid_radius;
      const Point2 lhs = which == ManifoldKind::unstable ? kMap.apply(m(t)) : kMap.apply_inverse(m(t));
      EXPECT_LT(dist(lhs, m(m.rate * t)), 1e-8) << f;
    }
  }
}

TEST(Parametrize, LinearMapHasNoHigherTerms) {
  const AffineSeriesMap A(Matrix2C{3.0, 0.0, 0.0, 0.5}, Point2{0.0, 0.0});
  const ManifoldParam m = parametrize(A, Point2{0.0, 0.0}, Point2{1.0, 0.0}, 3.0, ManifoldKind::unstable, 12);
  for (std::size_t n = 2; n < m.coeffs.size(); ++n) EXPECT_EQ(norm(m.coeffs[n]), 0.0) << n;
}

TEST(Parametrize, ResonanceIsReported) {
  // rate^2 = 4 is the other eigenvalue.
  const AffineSeriesMap A(Matrix2C{2.0, 0.0, 0.0, 4.0}, Point2{0.0, 0.0});
  try {
    (void)parametrize(A, Point2{0.0, 0.0}, Point2{1.0, 0.0}, 2.0, ManifoldKind::unstable, 8);
    FAIL() << "expected ResonanceError";
  } catch (const ResonanceError& e) {
    EXPECT_EQ(e.order(), 2);
  }
}

class Homoclinic : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    saddle_ = new SaddleData(saddle_at_two());
    q_ = new HomoclinicPoint(find_homoclinic(kMap, *saddle_));
  }
  static void TearDownTestSuite() {
    delete q_;
    delete saddle_;
  }
  static inline SaddleData* saddle_ = nullptr;
  static inline HomoclinicPoint* q_ = nullptr;
};

TEST_F(Homoclinic, PointLiesOnBothManifolds) {
  const ManifoldParam wu = parametrize_manifold(kMap, *saddle_, ManifoldKind::unstable);
  const ManifoldParam ws = parametrize_manifold(kMap, *saddle_, ManifoldKind::stable);
  Point2 z = wu(q_->t_u);
  for (int j = 0; j < q_->iterate; ++j) z = kMap.apply(z);
  EXPECT_LT(dist(z, q_->q), 1e-9);
  EXPECT_LT(dist(ws(q_->t_s), q_->q), 1e-9);
  EXPECT_GT(q_->transversality_angle, 1e-2);
}

TEST_F(Homoclinic, OrbitConvergesToSaddleBothWays) {
  // Few enough steps that rounding (amplified by lambda forward, 1/mu
  // backward) stays below the contraction.
  Point2 f = q_->q;
  double prev = dist(f, saddle_->p);
  for (int n = 0; n < 10; ++n) {
    f = kMap.apply(f);
    const double d = dist(f, saddle_->p);
    EXPECT_LT(d, prev) << n;
    prev = d;
  }
  EXPECT_LT(prev, 1e-6);
  Point2 b = q_->q;
  for (int n = 0; n < q_->iterate + 6; ++n) b = kMap.apply_inverse(b);
  EXPECT_LT(dist(b, saddle_->p), 1e-2);
}

TEST_F(Homoclinic, CrossingsIncludeSaddleAndPropagate) {
  const auto chart = ManifoldChart(parametrize_manifold(kMap, *saddle_, ManifoldKind::unstable),
                                   parametrize_manifold(kMap, *saddle_, ManifoldKind::stable), saddle_->p);
  const double ru = 0.9 * chart.unstable().valid_radius;
  const double rs = 0.95 * chart.stable().valid_radius;
  const auto c1 = crossing_parameters(kMap, *saddle_, chart, 1, ru, rs);
  ASSERT_FALSE(c1.empty());
  EXPECT_NEAR(c1.front().s, 0.0, 1e-12);
  const auto c2 = crossing_parameters(kMap, *saddle_, chart, 2, ru, rs);
  EXPECT_GE(c2.size(), c1.size());
}

TEST_F(Homoclinic, DegreeOneIsRejected) {
  EXPECT_THROW((void)build_horseshoe(kMap, *saddle_, *q_, 1), std::invalid_argument);
}

TEST_F(Homoclinic, DegreeTwoHorseshoeWithEquivariantCoding) {
  const HorseshoeResult h = build_horseshoe(kMap, *saddle_, *q_, 2);
  ASSERT_EQ(h.certificate.verdict, Verdict::yes);
  EXPECT_EQ(h.N, h.n + h.m);
  EXPECT_GT(h.cone_margin, 0.0);
  EXPECT_GT(h.boundary_margin, 0.0);
  ASSERT_TRUE(h.count.aggregate.has_value());
  EXPECT_EQ(*h.count.aggregate, 2);
  ASSERT_TRUE(h.system);
  // The chart centre is the saddle and maps back to chart coordinates 0.
  EXPECT_LT(dist(h.chart.center, saddle_->p), 1e-12);
  const auto back = h.system->from_space(saddle_->p);
  ASSERT_TRUE(back.has_value());
  EXPECT_LT(norm(*back), 1e-9);

  const ComponentLabeling lab = build_labeling(*h.system, 256);
  ASSERT_EQ(lab.roots.size(), 2u);
  int checked = 0;
  // Depth 4: symbols -2..2. One backward step of the chart map expands by
  // |mu|^-N ~ 4e5, so deeper backward windows exceed double precision.
  for (const Point2& z : sample_invariant_points(*h.system, lab, 20, 3, 7)) {
    const SymbolWord w = itinerary(*h.system, lab, z, 2, 2);
    const auto g = h.system->forward(z);
    ASSERT_TRUE(g.has_value());
    const SymbolWord v = itinerary(*h.system, lab, *g, 2, 1);
    for (int k = -2; k <= 1; ++k) EXPECT_EQ(v.at(k), w.at(k + 1));
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

}  // namespace
}  // namespace horseshoe
