#include "horseshoe/invariant_sets.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "horseshoe/parallel.hpp"

namespace horseshoe {

namespace {

bool inside(const Point2& z, double R) { return std::abs(z.x) <= R && std::abs(z.y) <= R; }

// Follows the orbit in one direction; `step` is F or F^-1 and
// `escaping(z)` the filtration test that certifies escape.
template <typename Step, typename Escaping>
void follow(Point2 z, double R, int horizon, Step step, Escaping escaping, std::optional<int>& escape,
            bool& certified) {
  int n = 0;
  bool diverged = false;
  for (; n <= horizon; ++n) {
    if (!inside(z, R)) break;
    if (n == horizon) return;  // bounded to the horizon
    z = step(z);
    if (!z.finite()) {
      diverged = true;
      ++n;
      break;
    }
  }
  escape = n;
  if (diverged) {
    certified = true;
    return;
  }
  for (int extra = 0; extra <= horizon; ++extra) {
    if (escaping(z)) {
      certified = true;
      return;
    }
    z = step(z);
    if (!z.finite()) {
      certified = true;
      return;
    }
  }
}

}  // namespace

OrbitClass classify(const HenonMap& map, const Point2& z, double R, int horizon) {
  if (!(R > escape_radius(map))) throw std::invalid_argument("classify: R must exceed the escape radius");
  if (horizon < 0) throw std::invalid_argument("classify: negative horizon");
  if (!z.finite()) throw std::invalid_argument("classify: non-finite point");
  OrbitClass out;
  out.horizon = horizon;
  follow(
      z, R, horizon, [&](const Point2& w) { return map.step(w); },
      [R](const Point2& w) { return std::abs(w.x) > R && std::abs(w.y) <= std::abs(w.x); }, out.forward_escape,
      out.forward_certified);
  follow(
      z, R, horizon, [&](const Point2& w) { return map.step_inverse(w); },
      [R](const Point2& w) { return std::abs(w.y) > R && std::abs(w.x) <= std::abs(w.y); }, out.backward_escape,
      out.backward_certified);
  return out;
}

Point2 SliceSpec::point(int i, int j) const {
  const Complex c = window.pixel_center(i, j);
  switch (plane) {
    case SlicePlane::fix_y: return {c, fixed};
    case SlicePlane::fix_x: return {fixed, c};
    case SlicePlane::real_plane: return {Complex{c.real(), 0.0}, Complex{c.imag(), 0.0}};
  }
  return {c, fixed};
}

std::size_t SliceRaster::bounded_forward_count() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const OrbitClass& c) { return c.bounded_forward(); }));
}

std::size_t SliceRaster::bounded_count() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const OrbitClass& c) { return c.bounded(); }));
}

SliceRaster render_slice(const HenonMap& map, const SliceSpec& spec, double R, int horizon, int workers) {
  if (spec.window.width < 2 || spec.window.height < 2) throw std::invalid_argument("render_slice: resolution must be >= 2");
  if (!(spec.window.re_lo < spec.window.re_hi && spec.window.im_lo < spec.window.im_hi)) {
    throw std::invalid_argument("render_slice: empty window");
  }
  if (!(R > escape_radius(map))) throw std::invalid_argument("render_slice: R must exceed the escape radius");
  SliceRaster out;
  out.spec = spec;
  out.R = R;
  out.horizon = horizon;
  const int w = spec.window.width;
  const int h = spec.window.height;
  out.cells.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  parallel_for(h, resolve_workers(workers), [&](int j) {
    for (int i = 0; i < w; ++i) {
      out.cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(w) + static_cast<std::size_t>(i)] =
          classify(map, spec.point(i, j), R, horizon);
    }
  });
  return out;
}

std::vector<std::uint8_t> boundary_mask(const SliceRaster& raster, bool forward) {
  const int w = raster.spec.window.width;
  const int h = raster.spec.window.height;
  auto bounded = [&](int i, int j) {
    const OrbitClass& c = raster.at(i, j);
    return forward ? c.bounded_forward() : c.bounded_backward();
  };
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const bool b = bounded(i, j);
      const bool mixed = (i > 0 && bounded(i - 1, j) != b) || (i + 1 < w && bounded(i + 1, j) != b) ||
                         (j > 0 && bounded(i, j - 1) != b) || (j + 1 < h && bounded(i, j + 1) != b);
      mask[static_cast<std::size_t>(j) * static_cast<std::size_t>(w) + static_cast<std::size_t>(i)] = mixed ? 1 : 0;
    }
  }
  return mask;
}

std::array<std::uint8_t, 3> orbit_color(const OrbitClass& c) {
  auto shade = [&](const std::optional<int>& t) -> std::uint8_t {
    if (!t) return 0;
    const double s = 1.0 - std::exp(-0.25 * (*t + 1));
    return static_cast<std::uint8_t>(std::lround(55.0 + 200.0 * s));
  };
  if (c.bounded()) return {0, 0, 0};
  if (c.bounded_forward()) return {0, 0, shade(c.backward_escape)};
  if (c.bounded_backward()) return {shade(c.forward_escape), 0, 0};
  const std::uint8_t f = shade(c.forward_escape);
  const std::uint8_t b = shade(c.backward_escape);
  return {f, static_cast<std::uint8_t>((f + b) / 2), b};
}

void write_ppm(std::ostream& out, int width, int height, const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw std::invalid_argument("write_ppm: buffer size mismatch");
  }
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

void write_ppm(std::ostream& out, const SliceRaster& raster) {
  const int w = raster.spec.window.width;
  const int h = raster.spec.window.height;
  std::vector<std::uint8_t> rgb;
  rgb.reserve(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (int row = 0; row < h; ++row) {
    const int j = h - 1 - row;
    for (int i = 0; i < w; ++i) {
      const auto px = orbit_color(raster.at(i, j));
      rgb.insert(rgb.end(), px.begin(), px.end());
    }
  }
  write_ppm(out, w, h, rgb);
}

void write_csv(std::ostream& out, const SliceRaster& raster) {
  out << "re(x),im(x),re(y),im(y),fwd,bwd\n";
  const int w = raster.spec.window.width;
  const int h = raster.spec.window.height;
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const Point2 z = raster.spec.point(i, j);
      const OrbitClass& c = raster.at(i, j);
      out << format_double(z.x.real()) << ',' << format_double(z.x.imag()) << ',' << format_double(z.y.real()) << ','
          << format_double(z.y.imag()) << ',' << c.forward_escape.value_or(-1) << ','
          << c.backward_escape.value_or(-1) << '\n';
    }
  }
}

}  // namespace horseshoe
