#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "horseshoe/horseshoe_cert.hpp"

namespace horseshoe {
namespace {

const HenonMap kHorseshoe = HenonMap::normal_form(1.0, -10.0);

// Threshold 4 (5/4 + sqrt(5)/2) at a = 1, gamma = 1.
const double kThreshold = 4.0 * (1.25 + std::sqrt(5.0) / 2.0);

TEST(Inequality, HorseshoeParameters) {
  const Certificate c = certify_inequality(kHorseshoe, 1.0, 0.5 + 1e-9);
  EXPECT_EQ(c.verdict, Verdict::yes);
  // 2 sqrt(10 - (1 + sqrt(11)) * 2) - 2 evaluated directly.
  const double R = 1.0 + std::sqrt(11.0);
  EXPECT_NEAR(c.margin, 2.0 * std::sqrt(10.0 - 2.0 * R) - 2.0, 1e-7);
  EXPECT_NEAR(c.margin, 0.338, 1e-3);
  EXPECT_NEAR(c.R, R, 1e-7);
}

TEST(Inequality, BelowThreshold) {
  const Certificate c = certify_inequality(HenonMap::normal_form(1.0, -9.0), 1.0, 0.5 + 1e-9);
  EXPECT_EQ(c.verdict, Verdict::no);
  EXPECT_LE(c.margin, 0.0);
}

TEST(Inequality, ThresholdMatchesClosedForm) {
  EXPECT_NEAR(certified_threshold(1.0, 1.0, kDefaultAlpha), kThreshold, 1e-6);
  EXPECT_EQ(certify_inequality(HenonMap::normal_form(1.0, -9.47)).verdict, Verdict::no);
  EXPECT_EQ(certify_inequality(HenonMap::normal_form(1.0, -9.48)).verdict, Verdict::yes);
}

TEST(Inequality, MarginSignAgreesWithBruteForceBound) {
  // Oracle: the margin is positive exactly when
  // 2 sqrt(|c| - R (1 + |a|)) > gamma + |a| / gamma, evaluated in long double.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = 2.0 * u(rng);
    const double c = 30.0 * u(rng);
    const double g = 0.05 + 0.95 * u(rng);
    const double alpha = 0.5 + u(rng);
    const long double s = 1.0L + a;
    const long double R = alpha * (s + std::sqrt(s * s + 4.0L * c));
    const long double gap = c - R * s;
    const long double lhs = gap > 0 ? 2.0L * std::sqrt(gap) : 0.0L;
    const long double rhs = g + a / g;
    const double m = inequality_margin(a, c, g, alpha);
    if (std::fabs(static_cast<double>(lhs - rhs)) < 1e-9) continue;
    EXPECT_EQ(m > 0.0, lhs > rhs) << a << " " << c << " " << g << " " << alpha;
  }
}

TEST(Inequality, RefusesNonNormalForm) {
  const HenonMap cubic({-10.0, 0.0, 0.0, 1.0}, 1.0);
  EXPECT_THROW((void)certify_inequality(cubic), std::invalid_argument);
  EXPECT_THROW((void)certify_inequality(kHorseshoe, 1.5), std::invalid_argument);
  EXPECT_THROW((void)certify_inequality(kHorseshoe, 1.0, 0.5), std::invalid_argument);
}

TEST(Inequality, JsonKeyOrder) {
  const Certificate c = certify_inequality(kHorseshoe);
  const auto j = nlohmann::ordered_json::parse(c.to_json());
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"method", "map", "R", "alpha", "gamma", "margin", "verdict", "boxes",
                                            "depth", "wall_ms"}));
  EXPECT_EQ(j["verdict"], "yes");
  EXPECT_EQ(j["method"], "inequality");
}

TEST(Aperture, RestrictedSearchRecoversUnitCones) {
  ApertureSearch s;
  s.restrict_gamma_to_one = true;
  const ApertureResult r = minimize_threshold(1.0, s);
  EXPECT_DOUBLE_EQ(r.gamma, 1.0);
  EXPECT_NEAR(r.threshold, kThreshold, 1e-4);
}

TEST(Aperture, ThresholdBounds) {
  const ApertureResult r = minimize_threshold(1.0);
  EXPECT_LE(r.threshold, kThreshold + 1e-6);
  const ApertureResult small = minimize_threshold(1e-4);
  EXPECT_GE(small.threshold, 2.0);
}

TEST(Aperture, OptimizeCertifiesAboveThreshold) {
  const ApertureResult r = optimize_aperture(HenonMap::normal_form(1.0, -10.0));
  EXPECT_EQ(r.certificate.verdict, Verdict::yes);
  EXPECT_GE(r.certificate.margin, certify_inequality(kHorseshoe).margin - 1e-12);
  const ApertureResult none = optimize_aperture(HenonMap::normal_form(1.0, 0.0));
  EXPECT_EQ(none.certificate.verdict, Verdict::no);
}

TEST(ConeField, DerivativeBoundAndMatrixTests) {
  const ConeField unit(1.0);
  EXPECT_DOUBLE_EQ(unit.derivative_bound(1.0), 2.0);
  EXPECT_TRUE(unit.maps_horizontal_inside(Matrix2C{5.0, -1.0, 1.0, 0.0}));
  EXPECT_FALSE(unit.maps_horizontal_inside(Matrix2C{1.5, -1.0, 1.0, 0.0}));
  EXPECT_TRUE(unit.maps_vertical_inside(Matrix2C{0.0, 1.0, -1.0, 5.0}));
  EXPECT_THROW(ConeField(0.0), std::invalid_argument);
}

TEST(ConeSweep, HorseshoeParametersYes) {
  const Certificate c = certify_cone_sweep(kHorseshoe, Bidisc::square(4.4), ConeField(1.0), {12, 64});
  EXPECT_EQ(c.verdict, Verdict::yes);
  EXPECT_GT(c.margin, 0.0);
  EXPECT_LE(c.work.max_depth, 12);
}

TEST(ConeSweep, NotAHorseshoeNeverYes) {
  const Certificate c = certify_cone_sweep(HenonMap::normal_form(1.0, -1.0), Bidisc::square(3.0), ConeField(1.0),
                                           {10, 64});
  EXPECT_NE(c.verdict, Verdict::yes);
  const Certificate zero =
      certify_cone_sweep(HenonMap::normal_form(1.0, 0.0), Bidisc::square(2.1), ConeField(1.0), {10, 64});
  EXPECT_NE(zero.verdict, Verdict::yes);
}

TEST(ConeSweep, MonotoneInDepth) {
  const HenonMap F = HenonMap::normal_form(1.0, -10.0);
  Verdict prev = Verdict::unknown;
  for (int depth = 2; depth <= 12; depth += 2) {
    const Verdict v = certify_cone_sweep(F, Bidisc::square(4.4), ConeField(1.0), {depth, 8}).verdict;
    if (prev != Verdict::unknown) EXPECT_EQ(v, prev);
    prev = v;
  }
  EXPECT_EQ(prev, Verdict::yes);
}

TEST(CriticalValues, Formula) {
  EXPECT_TRUE(critical_values_escape(kHorseshoe, Bidisc::square(4.4)));
  EXPECT_FALSE(critical_values_escape(HenonMap::normal_form(1.0, -6.0), Bidisc::square(3.7)));
  EXPECT_FALSE(critical_values_escape(HenonMap::normal_form(Complex{0.3, 0.2}, 0.0), Bidisc::square(2.0)));
  const CriticalValueCheck c = critical_values_check(kHorseshoe, Bidisc::square(4.4));
  // |c| - R (1 + |a|) = 10 - 8.8 on the x side.
  EXPECT_NEAR(c.margin, 1.2, 1e-9);
}

TEST(ComponentCount, HorseshoeHasTwoOnEverySlice) {
  const ComponentCount cc = component_count(kHorseshoe, Bidisc::square(4.4), Direction::fwd, 256);
  ASSERT_TRUE(cc.aggregate.has_value());
  EXPECT_EQ(*cc.aggregate, 2);
  for (const SliceCount& s : cc.slices) EXPECT_EQ(s.count, 2);
  const ComponentCount bwd = component_count(kHorseshoe, Bidisc::square(4.4), Direction::bwd, 256);
  ASSERT_TRUE(bwd.aggregate.has_value());
  EXPECT_EQ(*bwd.aggregate, 2);
}

TEST(ComponentCount, CubicHasThree) {
  const HenonMap cubic({-30.0, 0.0, 0.0, 1.0}, 1.0);
  const double R = escape_radius(cubic) * 1.01;
  const ComponentCount cc = component_count(cubic, Bidisc::square(R), Direction::fwd, 256);
  ASSERT_TRUE(cc.aggregate.has_value());
  EXPECT_EQ(*cc.aggregate, 3);
}

TEST(ComponentCount, NegativeControlIsConnected) {
  const ComponentCount cc = component_count(HenonMap::normal_form(1.0, 0.0), Bidisc::square(2.1), Direction::fwd, 256);
  ASSERT_TRUE(cc.aggregate.has_value());
  EXPECT_EQ(*cc.aggregate, 1);
}

TEST(ComponentCount, ZoomBudgetLeavesSlicesUnresolved) {
  // At 16 pixels per axis the strips are resolved only by zooming.
  const HenonSystem system(kHorseshoe, Bidisc::square(4.4));
  ComponentCountOptions opts;
  opts.resolution = 16;
  opts.refine_levels = 3;
  const ComponentCount zoomed = component_count(system, Direction::fwd, opts);
  ASSERT_TRUE(zoomed.aggregate.has_value());
  EXPECT_EQ(*zoomed.aggregate, 2);
  opts.max_zoom_windows = 1;
  const ComponentCount starved = component_count(system, Direction::fwd, opts);
  EXPECT_FALSE(starved.aggregate.has_value());
  for (const SliceCount& s : starved.slices) EXPECT_EQ(s.count, -1);
  EXPECT_THROW((void)slice_components(system, Direction::fwd, 0.0, opts), std::runtime_error);
}

TEST(FiberDecay, GeometricDecayAndDyadicCounts) {
  FiberDecayOptions opts;
  opts.resolution = 384;
  const HenonSystem system(kHorseshoe, Bidisc::square(4.4));
  const FiberDecay fd = fiber_diameter_decay(system, 6, opts);
  ASSERT_EQ(fd.diameters.size(), 6u);
  EXPECT_FALSE(fd.truncated) << fd.note;
  EXPECT_LE(fd.diameters[0], 2.0 * 4.4);
  double K = 0.0;
  for (std::size_t n = 1; n < fd.diameters.size(); ++n) K = std::max(K, fd.diameters[n] / fd.diameters[n - 1]);
  EXPECT_LT(K, 1.0);
  for (std::size_t n = 0; n < fd.component_counts.size(); ++n) EXPECT_EQ(fd.component_counts[n], 1L << (n + 1));
}

}  // namespace
}  // namespace horseshoe
