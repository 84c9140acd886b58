#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "horseshoe/periodic_orbits.hpp"
#include "horseshoe/symbolic.hpp"

namespace horseshoe {
namespace {

class Symbolic : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    system_ = new HenonSystem(HenonMap::normal_form(1.0, -10.0), Bidisc::square(4.4));
    labeling_ = new ComponentLabeling(build_labeling(*system_, 512));
  }
  static void TearDownTestSuite() {
    delete labeling_;
    delete system_;
  }
  static const HenonSystem& sys() { return *system_; }
  static const ComponentLabeling& lab() { return *labeling_; }

 private:
  static inline HenonSystem* system_ = nullptr;
  static inline ComponentLabeling* labeling_ = nullptr;
};

const double kS11 = std::sqrt(11.0);
const double kS7 = std::sqrt(7.0);

TEST(SymbolWord, TextRoundTrip) {
  const SymbolWord w = SymbolWord::parse("1011^0110");
  EXPECT_EQ(w.offset, 4);
  EXPECT_EQ(w.first_index(), -4);
  EXPECT_EQ(w.last_index(), 3);
  EXPECT_EQ(w.at(0), 0);
  EXPECT_EQ(w.at(-1), 1);
  EXPECT_EQ(w.to_string(), "1011^0110");
  EXPECT_EQ(w.shifted().to_string(), "10110^110");
  EXPECT_THROW(SymbolWord::parse("10^2!"), std::invalid_argument);
}

TEST(SymbolWord, Periodic) {
  const SymbolWord w = SymbolWord::periodic({0, 1}, 3, 4);
  EXPECT_EQ(w.to_string(), "101^01010");
  EXPECT_EQ(w.period, 2);
}

TEST_F(Symbolic, TwoRootsOrderedByRealPart) {
  ASSERT_EQ(lab().roots.size(), 2u);
  EXPECT_LT(lab().roots[0].real(), lab().roots[1].real());
  // The components straddle the critical line x = 0.
  EXPECT_LT(lab().roots[0].real(), 0.0);
  EXPECT_GT(lab().roots[1].real(), 0.0);
}

TEST_F(Symbolic, FixedPointsHaveConstantWords) {
  const SymbolWord hi = itinerary(sys(), lab(), Point2{1.0 + kS11, 1.0 + kS11}, 5, 5);
  EXPECT_EQ(hi.to_string(), "11111^111111");
  const SymbolWord lo = itinerary(sys(), lab(), Point2{1.0 - kS11, 1.0 - kS11}, 5, 5);
  EXPECT_EQ(lo.to_string(), "00000^000000");
}

TEST_F(Symbolic, TwoCycleAlternates) {
  const SymbolWord w = itinerary(sys(), lab(), Point2{-1.0 + kS7, -1.0 - kS7}, 4, 5);
  for (int k = w.first_index(); k < w.last_index(); ++k) EXPECT_NE(w.at(k), w.at(k + 1));
  // x = -1 + sqrt 7 > 0 sits in component 1.
  EXPECT_EQ(w.at(0), 1);
}

TEST_F(Symbolic, EscapingPointIsNotInK) {
  EXPECT_THROW((void)itinerary(sys(), lab(), Point2{0.0, 0.0}, 2, 2), NotInKError);
}

TEST_F(Symbolic, ComponentsMapToMatchingImages) {
  // F(U_i) is the component of F(B) ∩ B labelled i.
  for (const Point2& z : sample_invariant_points(sys(), lab(), 40, 8, 5)) {
    const auto i = component_label(sys(), lab(), z);
    ASSERT_TRUE(i.has_value());
    const auto j = image_label(sys(), lab(), *sys().forward(z));
    ASSERT_TRUE(j.has_value());
    EXPECT_EQ(*i, *j);
  }
}

TEST_F(Symbolic, ShiftEquivariance) {
  const auto points = sample_invariant_points(sys(), lab(), 100, 12, 42);
  ASSERT_EQ(points.size(), 100u);
  for (const Point2& z : points) {
    const SymbolWord w = itinerary(sys(), lab(), z, 5, 6);
    const SymbolWord v = itinerary(sys(), lab(), *sys().forward(z), 6, 5);
    EXPECT_EQ(v.to_string(), w.shifted().to_string());
  }
}

TEST_F(Symbolic, CompletenessOfForwardWords) {
  // Scan the real slice y = 0 finely; survivors of n forward steps carry
  // exactly 2^n distinct words.
  const HenonMap& F = sys().map();
  const int samples = 400000;
  for (int n = 1; n <= 6; ++n) {
    std::set<std::string> words;
    for (int i = 0; i < samples; ++i) {
      const Point2 z{-4.4 + 8.8 * (i + 0.5) / samples, 0.0};
      Point2 w = z;
      bool inside = true;
      for (int k = 0; k <= n && inside; ++k) {
        inside = sys().domain().contains(w);
        w = F.step(w);
      }
      if (!inside) continue;
      try {
        words.insert(itinerary(sys(), lab(), z, 0, n - 1).to_string());
      } catch (const UnresolvedSymbolError&) {
      }
    }
    EXPECT_EQ(words.size(), static_cast<std::size_t>(1) << n) << "n=" << n;
  }
}

TEST_F(Symbolic, RefineRecoversFixedAndTwoCycle) {
  const RefinedPoint p = refine_point(sys(), lab(), SymbolWord::periodic({1}, 10, 10));
  ASSERT_TRUE(p.converged);
  EXPECT_LT(dist(p.z, Point2{1.0 + kS11, 1.0 + kS11}), 1e-8);
  const RefinedPoint q = refine_point(sys(), lab(), SymbolWord::periodic({1, 0}, 10, 10));
  ASSERT_TRUE(q.converged);
  EXPECT_LT(dist(q.z, Point2{-1.0 + kS7, -1.0 - kS7}), 1e-8);
}

TEST_F(Symbolic, RefineInvertsItineraryOnPeriodicPoints) {
  const HenonMap& F = sys().map();
  std::set<std::string> seen;
  for (int n = 1; n <= 4; ++n) {
    for (const PeriodicPoint& pp : enumerate_periodic(F, n, sys().domain()).points) {
      if (pp.period != n) continue;
      const SymbolWord w = itinerary(sys(), lab(), pp.z, 4, 3);
      std::vector<int> block;
      for (int k = 0; k < n; ++k) block.push_back(w.at(k));
      // Distinct orbits are separated at window width 8.
      EXPECT_TRUE(seen.insert(w.to_string()).second) << w.to_string();
      const RefinedPoint r = refine_point(sys(), lab(), SymbolWord::periodic(block, 8, 8));
      ASSERT_TRUE(r.converged);
      EXPECT_LE(dist(r.z, pp.z), r.radius + 1e-9) << w.to_string();
    }
  }
}

TEST_F(Symbolic, EnclosureRadiiDecayGeometrically) {
  RefineOptions opts;
  opts.polish_periodic = false;
  std::vector<double> radii;
  for (int half = 1; half <= 6; ++half) {
    radii.push_back(refine_point(sys(), lab(), SymbolWord::parse(std::string(half, '0') + "^1" + std::string(half, '1')),
                                 opts)
                        .radius);
  }
  for (std::size_t i = 1; i < radii.size(); ++i) EXPECT_LT(radii[i] / radii[i - 1], 1.0) << i;
}

TEST_F(Symbolic, RejectsBadWords) {
  EXPECT_THROW((void)refine_point(sys(), lab(), SymbolWord::parse("0^2")), std::invalid_argument);
}

TEST(SymbolicCubic, ThreeLabels) {
  const HenonMap cubic({-30.0, 0.0, 0.0, 1.0}, 1.0);
  const HenonSystem system(cubic, Bidisc::square(escape_radius(cubic) * 1.01));
  const ComponentLabeling lab = build_labeling(system, 512);
  ASSERT_EQ(lab.roots.size(), 3u);
  // Cube roots: a conjugate pair with equal real parts (ordered by
  // imaginary part) and the real root.
  EXPECT_NEAR(lab.roots[0].real(), lab.roots[1].real(), 1e-9);
  EXPECT_LT(lab.roots[0].imag(), lab.roots[1].imag());
  EXPECT_LT(lab.roots[1].real(), lab.roots[2].real());
}

}  // namespace
}  // namespace horseshoe
