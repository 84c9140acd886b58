#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "horseshoe/invariant_sets.hpp"

namespace horseshoe {
namespace {

const HenonMap kHorseshoe = HenonMap::normal_form(1.0, -10.0);
const HenonMap kResonant = HenonMap::normal_form(1.0 / 8.0, 9.0 / 32.0);

TEST(Classify, FixedPointStaysBounded) {
  const double x = 1.0 + std::sqrt(11.0);
  const OrbitClass c = classify(kHorseshoe, Point2{x, x}, 4.5, 100);
  EXPECT_TRUE(c.bounded());
  EXPECT_EQ(c.horizon, 100);
}

TEST(Classify, ResonantEscapeRegionPoint) {
  const double R = escape_radius(kResonant) * 1.01;
  const OrbitClass c = classify(kResonant, Point2{5.0, 0.0}, R, 50);
  ASSERT_TRUE(c.forward_escape.has_value());
  EXPECT_LE(*c.forward_escape, 50);
}

TEST(Classify, OriginEscapesForHorseshoeParameters) {
  const OrbitClass c = classify(kHorseshoe, Point2{0.0, 0.0}, 4.5, 100);
  ASSERT_TRUE(c.forward_escape.has_value());
  // (0,0) -> (-10, 0): already outside the bidisc after one step.
  EXPECT_EQ(*c.forward_escape, 1);
  EXPECT_TRUE(c.forward_certified);
}

TEST(Classify, RequiresRadiusAboveR0) {
  EXPECT_THROW((void)classify(kHorseshoe, Point2{0.0, 0.0}, 4.0, 10), std::invalid_argument);
}

TEST(Classify, ForwardEscapeIsEquivariant) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-4.5, 4.5);
  int checked = 0;
  for (int i = 0; i < 3000; ++i) {
    const Point2 z{Complex{u(rng), 0.1 * u(rng)}, Complex{u(rng), 0.1 * u(rng)}};
    const OrbitClass c = classify(kHorseshoe, z, 4.5, 100);
    if (!c.forward_escape || *c.forward_escape == 0) continue;
    const OrbitClass d = classify(kHorseshoe, kHorseshoe.apply(z), 4.5, 100);
    ASSERT_TRUE(d.forward_escape.has_value());
    EXPECT_EQ(*d.forward_escape, *c.forward_escape - 1);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Classify, BoundedOrbitsLieInTheBidisc) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int i = 0; i < 5000; ++i) {
    const Point2 z{Complex{u(rng), 0.01 * u(rng)}, Complex{u(rng), 0.01 * u(rng)}};
    const OrbitClass c = classify(kHorseshoe, z, 4.5, 20);
    if (c.bounded()) EXPECT_TRUE(Bidisc::square(4.5).contains(z));
  }
}

TEST(FatouBieberbach, EscapeRegionAllEscapes) {
  const double R = escape_radius(kResonant) * 1.01;
  int tested = 0;
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 60; ++j) {
      const Complex x{-40.0 + 80.0 * (i + 0.5) / 60.0, -3.0 + 6.0 * j / 59.0};
      if (std::abs(x) <= 4.0) continue;
      const double ymax = 4.0 * std::norm(x) / 3.0;
      for (double f : {0.0, 0.5, 0.99}) {
        const Complex y = std::polar(f * ymax, 0.37 * (i + j));
        const OrbitClass c = classify(kResonant, Point2{x, y}, R, 50);
        EXPECT_TRUE(c.forward_escape.has_value()) << x << " " << y;
        ++tested;
      }
    }
  }
  EXPECT_GE(tested, 1000);
}

SliceSpec horseshoe_slice(int resolution) {
  SliceSpec spec;
  spec.plane = SlicePlane::fix_y;
  spec.fixed = 0.0;
  spec.window = PlaneWindow::around(0.0, 4.5, resolution);
  return spec;
}

TEST(RenderSlice, MatchesDirectClassification) {
  const SliceSpec spec = horseshoe_slice(40);
  // K+ has no interior here, so a short horizon keeps some pixels bounded.
  const SliceRaster r = render_slice(kHorseshoe, spec, 4.5, 1, 3);
  for (int j = 0; j < 40; ++j) {
    for (int i = 0; i < 40; ++i) {
      const OrbitClass c = classify(kHorseshoe, spec.point(i, j), 4.5, 1);
      EXPECT_EQ(r.at(i, j).forward_escape, c.forward_escape);
      EXPECT_EQ(r.at(i, j).backward_escape, c.backward_escape);
    }
  }
  EXPECT_GT(r.bounded_forward_count(), 0u);
}

TEST(RenderSlice, SmallestGrid) {
  const SliceRaster r = render_slice(kHorseshoe, horseshoe_slice(2), 4.5, 10);
  EXPECT_EQ(r.cells.size(), 4u);
}

TEST(RenderSlice, IndependentOfWorkers) {
  const SliceSpec spec = horseshoe_slice(64);
  std::ostringstream a;
  std::ostringstream b;
  write_ppm(a, render_slice(kHorseshoe, spec, 4.5, 40, 1));
  write_ppm(b, render_slice(kHorseshoe, spec, 4.5, 40, 7));
  EXPECT_EQ(a.str(), b.str());
}

TEST(RenderSlice, BoundedFractionShrinksWithHorizon) {
  const SliceSpec spec = horseshoe_slice(96);
  std::size_t prev = spec.window.width * spec.window.height + 1;
  for (int horizon : {10, 20, 40}) {
    const std::size_t n = render_slice(kHorseshoe, spec, 4.5, horizon).bounded_forward_count();
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(RenderSlice, OutputFormats) {
  const SliceRaster r = render_slice(kHorseshoe, horseshoe_slice(8), 4.5, 10);
  std::ostringstream ppm;
  write_ppm(ppm, r);
  EXPECT_EQ(ppm.str().substr(0, 11), "P6\n8 8\n255\n");
  EXPECT_EQ(ppm.str().size(), 11u + 8 * 8 * 3);
  std::ostringstream csv;
  write_csv(csv, r);
  std::string header;
  std::istringstream in(csv.str());
  std::getline(in, header);
  EXPECT_EQ(header, "re(x),im(x),re(y),im(y),fwd,bwd");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 64);
}

TEST(BoundaryMask, MarksMixedNeighborhoods) {
  const SliceRaster r = render_slice(kHorseshoe, horseshoe_slice(64), 4.5, 1);
  const auto mask = boundary_mask(r, true);
  ASSERT_EQ(mask.size(), r.cells.size());
  std::size_t marked = 0;
  for (int j = 1; j < 63; ++j) {
    for (int i = 1; i < 63; ++i) {
      if (!mask[static_cast<std::size_t>(j) * 64 + i]) continue;
      ++marked;
      const bool b = r.at(i, j).bounded_forward();
      const bool mixed = r.at(i - 1, j).bounded_forward() != b || r.at(i + 1, j).bounded_forward() != b ||
                         r.at(i, j - 1).bounded_forward() != b || r.at(i, j + 1).bounded_forward() != b;
      EXPECT_TRUE(mixed);
    }
  }
  EXPECT_GT(marked, 0u);
}

}  // namespace
}  // namespace horseshoe
