#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "horseshoe/henon_map.hpp"
#include "horseshoe/raster.hpp"

namespace horseshoe {

// Escape-time classification of one orbit relative to the bidisc of
// radius R. An escape time is the first n >= 0 with F^n(z) (or F^-n(z))
// outside the closed bidisc; nullopt means the orbit stayed inside up to
// the horizon.
struct OrbitClass {
  std::optional<int> forward_escape;
  std::optional<int> backward_escape;
  int horizon = 0;
  // Escape confirmed by the filtration |x| > R, |y| <= |x| (forward) or
  // |y| > R, |x| <= |y| (backward), or by overflow.
  bool forward_certified = false;
  bool backward_certified = false;

  [[nodiscard]] bool bounded_forward() const { return !forward_escape.has_value(); }
  [[nodiscard]] bool bounded_backward() const { return !backward_escape.has_value(); }
  // Point of K (to the horizon).
  [[nodiscard]] bool bounded() const { return bounded_forward() && bounded_backward(); }
};

// Requires R > escape_radius(map).
OrbitClass classify(const HenonMap& map, const Point2& z, double R, int horizon);

enum class SlicePlane { fix_y, fix_x, real_plane };

// A 2-real-dimensional slice of C^2 rasterized at pixel centers.
// fix_y: pixel (re, im) is x, y = fixed.   fix_x: pixel is y, x = fixed.
// real_plane: x = pixel re, y = pixel im, both real.
struct SliceSpec {
  SlicePlane plane = SlicePlane::fix_y;
  Complex fixed{};
  PlaneWindow window;

  [[nodiscard]] Point2 point(int i, int j) const;
};

struct SliceRaster {
  SliceSpec spec;
  double R = 0.0;
  int horizon = 0;
  std::vector<OrbitClass> cells;  // row-major, j * width + i

  [[nodiscard]] const OrbitClass& at(int i, int j) const {
    return cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(spec.window.width) + static_cast<std::size_t>(i)];
  }
  [[nodiscard]] std::size_t bounded_forward_count() const;
  [[nodiscard]] std::size_t bounded_count() const;
};

// Classifies every pixel center. Output is independent of `workers`.
SliceRaster render_slice(const HenonMap& map, const SliceSpec& spec, double R, int horizon, int workers = 0);

// Pixels whose 4-neighborhood mixes bounded and escaping classes: the
// resolution-limited picture of J+ (forward) or J- (backward).
std::vector<std::uint8_t> boundary_mask(const SliceRaster& raster, bool forward);

// Palette from (forward, backward) escape times to 8-bit RGB.
std::array<std::uint8_t, 3> orbit_color(const OrbitClass& c);

// Binary PPM (P6, 8-bit RGB); row 0 of the image is the top (largest im).
void write_ppm(std::ostream& out, const SliceRaster& raster);
void write_ppm(std::ostream& out, int width, int height, const std::vector<std::uint8_t>& rgb);

// CSV rows `re(x),im(x),re(y),im(y),fwd,bwd`; bounded orbits print -1.
void write_csv(std::ostream& out, const SliceRaster& raster);

}  // namespace horseshoe
