#include "horseshoe/homoclinic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "horseshoe/periodic_orbits.hpp"
#include "horseshoe/raster.hpp"

namespace horseshoe {

namespace {

double euclid(const Point2& v) { return std::sqrt(std::norm(v.x) + std::norm(v.y)); }

Point2 unit(const Point2& v) {
  const double n = euclid(v);
  if (!(n > 0.0)) throw std::domain_error("zero vector");
  // Fix the phase so the larger component is real positive.
  const Complex big = std::abs(v.x) >= std::abs(v.y) ? v.x : v.y;
  const Complex phase = std::conj(big) / std::abs(big);
  return {phase * v.x / n, phase * v.y / n};
}

Point2 eigenvector(const Matrix2C& M, Complex ell) {
  const Point2 a{M.m01, ell - M.m00};
  const Point2 b{ell - M.m11, M.m10};
  return unit(euclid(a) >= euclid(b) ? a : b);
}

bool is_real(Complex z, double tol = 1e-12) { return std::abs(z.imag()) <= tol * (1.0 + std::abs(z.real())); }
bool is_real(const Point2& z, double tol = 1e-12) { return is_real(z.x, tol) && is_real(z.y, tol); }

bool real_map(const HenonMap& map) {
  return is_real(map.a(), 0.0) &&
         std::all_of(map.coeffs().begin(), map.coeffs().end(), [](Complex c) { return c.imag() == 0.0; });
}

Point2 iterate(const HenonMap& map, Point2 z, int steps, bool inverse = false) {
  for (int i = 0; i < steps && z.finite(); ++i) z = inverse ? map.step_inverse(z) : map.step(z);
  return z;
}

Matrix2C iterate_jacobian(const HenonMap& map, Point2 z, int steps, bool inverse = false) {
  Matrix2C J = Matrix2C::identity();
  for (int i = 0; i < steps; ++i) {
    J = (inverse ? map.jacobian_inverse(z) : map.jacobian(z)) * J;
    z = inverse ? map.step_inverse(z) : map.step(z);
  }
  return J;
}

double mobius_margin(Complex A, Complex B, Complex C, Complex D) {
  const double den = std::norm(D) - std::norm(C);
  if (!(den > 0.0)) return -std::numeric_limits<double>::infinity();
  const Complex center = (B * std::conj(D) - A * std::conj(C)) / den;
  const double radius = std::abs(A * D - B * C) / den;
  return 1.0 - (std::abs(center) + radius);
}

}  // namespace

// ---------------------------------------------------------------------------
// Saddles

SaddleData saddle_at(const HenonMap& map, const Point2& guess, int k) {
  if (k < 1) throw std::invalid_argument("saddle_at: period must be >= 1");
  const NewtonResult r = newton_periodic(map, guess, k, 1e-11, 100);
  if (!r.converged) throw NotHyperbolicError("saddle_at: Newton did not converge");
  if (minimal_period(map, r.z, k, 1e-8) != k) throw NotHyperbolicError("saddle_at: root has a smaller period");
  const Matrix2C J = iterate_jacobian(map, r.z, k);
  const auto ev = J.eigenvalues();
  if (!(std::abs(ev[0]) < 1.0 - 1e-9 && std::abs(ev[1]) > 1.0 + 1e-9)) {
    throw NotHyperbolicError("saddle_at: multipliers " + format_complex(ev[0]) + ", " + format_complex(ev[1]) +
                             " are not split by the unit circle");
  }
  SaddleData s;
  s.p = r.z;
  s.period = k;
  s.mu = ev[0];
  s.lambda = ev[1];
  s.eigvec_s = eigenvector(J, ev[0]);
  s.eigvec_u = eigenvector(J, ev[1]);
  return s;
}

std::vector<SaddleData> find_saddles(const HenonMap& map, int k, int grid) {
  if (k < 1) throw std::invalid_argument("find_saddles: period must be >= 1");
  const double R = 1.02 * escape_radius(map);
  std::vector<SaddleData> out;
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const Point2 seed{Complex{-R + (2.0 * i + 1.0) * R / grid, 1e-4 * R},
                        Complex{-R + (2.0 * j + 1.0) * R / grid, -0.7e-4 * R}};
      try {
        SaddleData s = saddle_at(map, seed, k);
        if (norm(s.p) > R) continue;
        if (is_real(s.p, 1e-10)) {
          s.p = {s.p.x.real(), s.p.y.real()};
        }
        const bool dup = std::any_of(out.begin(), out.end(), [&](const SaddleData& o) { return dist(o.p, s.p) < 1e-8; });
        if (!dup) out.push_back(s);
      } catch (const std::exception&) {
      }
    }
  }
  // Real points first, then the most expanding.
  std::sort(out.begin(), out.end(), [](const SaddleData& l, const SaddleData& r) {
    const bool lr = is_real(l.p, 1e-10);
    const bool rr = is_real(r.p, 1e-10);
    if (lr != rr) return lr;
    if (std::abs(l.lambda) != std::abs(r.lambda)) return std::abs(l.lambda) > std::abs(r.lambda);
    return std::array<double, 2>{l.p.x.real(), l.p.x.imag()} < std::array<double, 2>{r.p.x.real(), r.p.x.imag()};
  });
  // Re-polish real saddles with real data so downstream real-slice code
  // sees exactly real eigen-data.
  for (SaddleData& s : out) {
    if (is_real(s.p, 1e-10) && real_map(map)) {
      s = saddle_at(map, {s.p.x.real(), s.p.y.real()}, k);
      if (is_real(s.lambda, 1e-10) && is_real(s.mu, 1e-10)) {
        s.lambda = s.lambda.real();
        s.mu = s.mu.real();
        s.eigvec_u = {s.eigvec_u.x.real(), s.eigvec_u.y.real()};
        s.eigvec_s = {s.eigvec_s.x.real(), s.eigvec_s.y.real()};
      }
    }
  }
  return out;
}

SaddleData find_saddle(const HenonMap& map, int k) {
  auto all = find_saddles(map, k);
  if (all.empty()) throw NotHyperbolicError("find_saddle: no hyperbolic point of period " + std::to_string(k) + " found");
  return all.front();
}

// ---------------------------------------------------------------------------
// Series

Series series_mul(const Series& a, const Series& b, std::size_t order) {
  Series out(order + 1, Complex{});
  for (std::size_t i = 0; i < a.size() && i <= order; ++i) {
    if (a[i] == Complex{}) continue;
    for (std::size_t j = 0; j < b.size() && i + j <= order; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

namespace {

Series resize(Series s, std::size_t order) {
  s.resize(order + 1, Complex{});
  return s;
}

Series poly_of(const std::vector<Complex>& coeffs, const Series& x, std::size_t order) {
  Series r(order + 1, Complex{});
  r[0] = coeffs.back();
  for (std::size_t k = coeffs.size() - 1; k-- > 0;) {
    r = series_mul(r, x, order);
    r[0] += coeffs[k];
  }
  return r;
}

}  // namespace

HenonSeriesMap::HenonSeriesMap(HenonMap map, int iterates, bool inverse)
    : map_(std::move(map)), iterates_(iterates), inverse_(inverse) {
  if (iterates < 1) throw std::invalid_argument("HenonSeriesMap: iterates must be >= 1");
}

Series2 HenonSeriesMap::apply(const Series2& s, std::size_t order) const {
  Series x = resize(s.x, order);
  Series y = resize(s.y, order);
  const Complex a = map_.a();
  for (int i = 0; i < iterates_; ++i) {
    if (!inverse_) {
      Series nx = poly_of(map_.coeffs(), x, order);
      for (std::size_t n = 0; n <= order; ++n) nx[n] -= a * y[n];
      y = std::move(x);
      x = std::move(nx);
    } else {
      Series ny = poly_of(map_.coeffs(), y, order);
      for (std::size_t n = 0; n <= order; ++n) ny[n] = (ny[n] - x[n]) / a;
      x = std::move(y);
      y = std::move(ny);
    }
  }
  return {x, y};
}

Point2 HenonSeriesMap::apply(const Point2& z) const { return iterate(map_, z, iterates_, inverse_); }

Matrix2C HenonSeriesMap::jacobian(const Point2& z) const { return iterate_jacobian(map_, z, iterates_, inverse_); }

Series2 AffineSeriesMap::apply(const Series2& s, std::size_t order) const {
  Series x = resize(s.x, order);
  Series y = resize(s.y, order);
  Series nx(order + 1), ny(order + 1);
  for (std::size_t n = 0; n <= order; ++n) {
    nx[n] = A_.m00 * x[n] + A_.m01 * y[n];
    ny[n] = A_.m10 * x[n] + A_.m11 * y[n];
  }
  nx[0] += b_.x;
  ny[0] += b_.y;
  return {nx, ny};
}

// ---------------------------------------------------------------------------
// Manifolds

Point2 ManifoldParam::operator()(Complex t) const {
  Point2 r{};
  for (std::size_t k = coeffs.size(); k-- > 0;) r = Point2{r.x * t + coeffs[k].x, r.y * t + coeffs[k].y};
  return r;
}

Point2 ManifoldParam::derivative(Complex t) const {
  Point2 r{};
  for (std::size_t k = coeffs.size(); k-- > 1;) {
    const double kk = static_cast<double>(k);
    r = Point2{r.x * t + kk * coeffs[k].x, r.y * t + kk * coeffs[k].y};
  }
  return r;
}

namespace {

double functional_residual(const SeriesMap& G, const ManifoldParam& m, double r) {
  double worst = 0.0;
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    for (int k = 0; k < 32; ++k) {
      const Complex t = std::polar(frac * r, 2.0 * std::numbers::pi * k / 32.0);
      const Point2 lhs = G.apply(m(t));
      const Point2 rhs = m(m.rate * t);
      const double e = dist(lhs, rhs);
      if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, e);
    }
  }
  return worst;
}

}  // namespace

ManifoldParam parametrize(const SeriesMap& G, const Point2& p, const Point2& eigvec, Complex rate, ManifoldKind which,
                          int order, double residual_tol) {
  if (order < 1) throw std::invalid_argument("parametrize: order must be >= 1");
  const Matrix2C J = G.jacobian(p);
  ManifoldParam m;
  m.which = which;
  m.rate = rate;
  m.coeffs.assign(static_cast<std::size_t>(order) + 1, Point2{});
  m.coeffs[0] = p;
  m.coeffs[1] = eigvec;
  const double jn = std::abs(J.m00) + std::abs(J.m01) + std::abs(J.m10) + std::abs(J.m11);
  for (int n = 2; n <= order; ++n) {
    Series2 s{Series(static_cast<std::size_t>(n) + 1), Series(static_cast<std::size_t>(n) + 1)};
    for (int k = 0; k < n; ++k) {
      s.x[static_cast<std::size_t>(k)] = m.coeffs[static_cast<std::size_t>(k)].x;
      s.y[static_cast<std::size_t>(k)] = m.coeffs[static_cast<std::size_t>(k)].y;
    }
    const Series2 img = G.apply(s, static_cast<std::size_t>(n));
    const Point2 Rn{img.x[static_cast<std::size_t>(n)], img.y[static_cast<std::size_t>(n)]};
    const Complex rn = std::pow(rate, n);
    const Matrix2C A{J.m00 - rn, J.m01, J.m10, J.m11 - rn};
    if (std::abs(A.det()) < 1e-12 * std::max(1.0, (jn + std::abs(rn)) * (jn + std::abs(rn)))) {
      throw ResonanceError("resonance at order " + std::to_string(n), n);
    }
    const Point2 sol = A.inverse().apply(Rn);
    m.coeffs[static_cast<std::size_t>(n)] = {-sol.x, -sol.y};
  }
  // Rescale t so the tail coefficients are of unit size.
  double rho = 0.0;
  for (int n = std::max(2, order / 2); n <= order; ++n) {
    const double c = norm(m.coeffs[static_cast<std::size_t>(n)]);
    if (c > 0.0) rho = std::max(rho, std::pow(c, 1.0 / n));
  }
  if (rho > 0.0 && std::isfinite(rho)) {
    double f = 1.0;
    for (auto& c : m.coeffs) {
      c = Point2{c.x * f, c.y * f};
      f /= rho;
    }
  }
  // Largest radius (capped at 1) with residual below tolerance.
  double r = 1.0;
  while (r > 1e-12 && functional_residual(G, m, r) > residual_tol) r *= 0.5;
  if (r <= 1e-12) throw std::runtime_error("parametrize: no radius meets the residual tolerance");
  if (r < 1.0) {
    double lo = r;
    double hi = 2.0 * r;
    for (int it = 0; it < 30; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (functional_residual(G, m, mid) <= residual_tol) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    r = lo;
  }
  m.valid_radius = r;
  m.residual = functional_residual(G, m, r);
  return m;
}

ManifoldParam parametrize_manifold(const HenonMap& map, const SaddleData& saddle, ManifoldKind which, int order) {
  if (which == ManifoldKind::unstable) {
    const HenonSeriesMap G(map, saddle.period, false);
    return parametrize(G, saddle.p, saddle.eigvec_u, saddle.lambda, which, order);
  }
  const HenonSeriesMap G(map, saddle.period, true);
  return parametrize(G, saddle.p, saddle.eigvec_s, 1.0 / saddle.mu, which, order);
}

// ---------------------------------------------------------------------------
// Straightened chart

ManifoldChart::ManifoldChart(ManifoldParam unstable, ManifoldParam stable, Point2 p)
    : wu_(std::move(unstable)), ws_(std::move(stable)), p_(p) {
  const Point2 du = wu_.coeffs.at(1);
  const Point2 ds = ws_.coeffs.at(1);
  linear_inverse_ = Matrix2C{du.x, ds.x, du.y, ds.y}.inverse();
}

Point2 ManifoldChart::to_space(Complex u, Complex s) const { return wu_(u) + ws_(s) - p_; }

Matrix2C ManifoldChart::derivative(Complex u, Complex s) const {
  const Point2 du = wu_.derivative(u);
  const Point2 ds = ws_.derivative(s);
  return {du.x, ds.x, du.y, ds.y};
}

std::optional<Point2> ManifoldChart::to_chart(const Point2& z) const {
  Point2 c = linear_inverse_.apply(z - p_);
  const double lim_u = 1.5 * wu_.valid_radius;
  const double lim_s = 1.5 * ws_.valid_radius;
  for (int it = 0; it < 40; ++it) {
    if (!(std::abs(c.x) <= lim_u && std::abs(c.y) <= lim_s)) return std::nullopt;
    const Point2 f = to_space(c.x, c.y) - z;
    const Matrix2C J = derivative(c.x, c.y);
    if (std::abs(J.det()) == 0.0) return std::nullopt;
    const Point2 delta = J.inverse().apply(f);
    c = c - delta;
    if (norm(delta) <= 1e-15 * (1.0 + norm(c))) break;
  }
  if (!c.finite() || !(std::abs(c.x) <= lim_u && std::abs(c.y) <= lim_s)) return std::nullopt;
  if (dist(to_space(c.x, c.y), z) > 1e-11 * (1.0 + norm(z))) return std::nullopt;
  return c;
}

// ---------------------------------------------------------------------------
// Homoclinic search on the real slice

namespace {

// (signed distance, s) of a real point relative to the real stable curve,
// with sigma_s(s) the foot of the perpendicular.
std::optional<Point2> stable_coords(const ManifoldParam& ws, const Point2& z, double reach) {
  const double lim = 1.5 * ws.valid_radius;
  const Point2 v = ws.coeffs.at(1);
  const double vv = std::norm(v.x) + std::norm(v.y);
  double s = ((z.x - ws.coeffs[0].x) * std::conj(v.x) + (z.y - ws.coeffs[0].y) * std::conj(v.y)).real() / vv;
  for (int it = 0; it < 60; ++it) {
    if (!(std::abs(s) <= lim)) return std::nullopt;
    const Point2 r = z - ws(s);
    const Point2 d = ws.derivative(s);
    const double step = (r.x * std::conj(d.x) + r.y * std::conj(d.y)).real() / (std::norm(d.x) + std::norm(d.y));
    s += step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(s))) break;
  }
  if (!(std::abs(s) <= lim)) return std::nullopt;
  const Point2 r = z - ws(s);
  const Point2 d = ws.derivative(s);
  const double dist_signed = (d.x.real() * r.y.real() - d.y.real() * r.x.real()) / std::hypot(d.x.real(), d.y.real());
  if (!(std::abs(dist_signed) <= reach)) return std::nullopt;
  return Point2{dist_signed, s};
}

struct CurveScan {
  const HenonMap& map;
  const ManifoldChart& chart;
  int steps;  // F-steps applied after evaluating sigma_u
  double s_limit;
  double h_space;
  double reach;  // size of the chart region in space
  std::function<void(double, double)> on_crossing;  // (t, s)

  Point2 eval(double t) const { return iterate(map, chart.unstable()(t), steps); }

  std::optional<Point2> project(const Point2& z) const {
    return z.finite() ? stable_coords(chart.stable(), z, reach) : std::nullopt;
  }
  std::optional<Point2> coords(double t) const { return project(eval(t)); }

  void scan(double t0, double t1, std::optional<Point2> c0, std::optional<Point2> c1, const Point2& p0,
            const Point2& p1, int depth) const {
    const double len = dist(p0, p1);
    const bool far = !(len <= h_space);
    const bool gap = c0.has_value() != c1.has_value();
    // Pieces that stay away from the chart region are skipped.
    const Point2& p = chart.center();
    const bool remote = dist(p0, p) > len + reach && dist(p1, p) > len + reach;
    if (remote && !c0 && !c1) return;
    if ((far || gap) && depth < 40 && std::abs(t1 - t0) > 1e-15 * (1.0 + std::abs(t0))) {
      const double tm = 0.5 * (t0 + t1);
      const Point2 pm = eval(tm);
      const auto cm = project(pm);
      scan(t0, tm, c0, cm, p0, pm, depth + 1);
      scan(tm, t1, cm, c1, pm, p1, depth + 1);
      return;
    }
    if (!c0 || !c1) return;
    const double u0 = c0->x.real();
    const double u1 = c1->x.real();
    if ((u0 < 0.0) == (u1 < 0.0)) return;
    if (std::abs(c0->y.real()) > 1.5 * s_limit && std::abs(c1->y.real()) > 1.5 * s_limit) return;
    // Bisection on the sign of the distance.
    double a = t0;
    double b = t1;
    double ua = u0;
    for (int it = 0; it < 200 && b - a > 4e-16 * (1.0 + std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      const auto cm = coords(m);
      if (!cm) return;
      if ((cm->x.real() < 0.0) == (ua < 0.0)) {
        a = m;
        ua = cm->x.real();
      } else {
        b = m;
      }
    }
    const auto cm = coords(0.5 * (a + b));
    if (!cm || std::abs(cm->x.real()) > 1e-9 * reach) return;  // the projection jumped, not a crossing
    const double s = cm->y.real();
    if (std::abs(s) < s_limit) on_crossing(0.5 * (a + b), s);
  }

  void run(double t0, double t1, int samples) const {
    double prev_t = t0;
    Point2 prev_p = eval(t0);
    auto prev_c = project(prev_p);
    for (int i = 1; i <= samples; ++i) {
      const double t = t0 + (t1 - t0) * i / samples;
      const Point2 p = eval(t);
      const auto c = project(p);
      if (p.finite() && prev_p.finite()) scan(prev_t, t, prev_c, c, prev_p, p, 0);
      prev_t = t;
      prev_p = p;
      prev_c = c;
    }
  }
};

void require_real(const HenonMap& map, const SaddleData& saddle) {
  if (!real_map(map) || !is_real(saddle.p) || !is_real(saddle.lambda) || !is_real(saddle.mu) ||
      !is_real(saddle.eigvec_u) || !is_real(saddle.eigvec_s)) {
    throw std::invalid_argument("real-slice homoclinic search needs a real map and a real saddle");
  }
}

double space_scale(const ManifoldChart& chart) {
  const ManifoldParam& ws = chart.stable();
  return std::max(1e-12, dist(ws(ws.valid_radius), ws(-ws.valid_radius)));
}

double chart_reach(const ManifoldChart& chart) {
  const ManifoldParam& wu = chart.unstable();
  const ManifoldParam& ws = chart.stable();
  double r = 0.0;
  for (int k = 0; k < 16; ++k) {
    const Complex e = std::polar(1.5, 2.0 * std::numbers::pi * k / 16.0);
    r = std::max(r, dist(wu(e * wu.valid_radius), chart.center()) + dist(ws(e * ws.valid_radius), chart.center()));
  }
  return r;
}

}  // namespace

HomoclinicPoint find_homoclinic(const HenonMap& map, const SaddleData& saddle, bool real_slice,
                                const HomoclinicSearch& search) {
  if (!real_slice) throw std::invalid_argument("find_homoclinic: only the real-slice search is implemented");
  require_real(map, saddle);
  auto wu = parametrize_manifold(map, saddle, ManifoldKind::unstable, search.order);
  auto ws = parametrize_manifold(map, saddle, ManifoldKind::stable, search.order);
  const ManifoldChart chart(std::move(wu), std::move(ws), saddle.p);
  return find_homoclinic(map, saddle, chart, search);
}

HomoclinicPoint find_homoclinic(const HenonMap& map, const SaddleData& saddle, const ManifoldChart& chart,
                                const HomoclinicSearch& search) {
  require_real(map, saddle);
  const double lam = std::abs(saddle.lambda.real());
  const double tb = 0.9 * chart.unstable().valid_radius;
  const double ta = tb / lam;
  const double s_limit = 0.95 * chart.stable().valid_radius;
  const int k = saddle.period;

  for (int j = 1; j <= search.max_iterates; ++j) {
    std::vector<HomoclinicPoint> found;
    CurveScan scan{map, chart, k * j, s_limit, 0.02 * space_scale(chart), chart_reach(chart), {}};
    scan.on_crossing = [&](double t, double s) {
      if (std::abs(s) < 1e-6 * chart.stable().valid_radius) return;  // the saddle itself
      HomoclinicPoint h;
      h.t_u = t;
      h.iterate = j;
      h.t_s = s;
      h.q = chart.stable()(s);
      const Point2 start = chart.unstable()(t);
      const Point2 tu = iterate_jacobian(map, start, k * j).apply(chart.unstable().derivative(t));
      const Point2 ts = chart.stable().derivative(s);
      const double ax = tu.x.real(), ay = tu.y.real(), bx = ts.x.real(), by = ts.y.real();
      const double angle = std::atan2(std::abs(ax * by - ay * bx), std::abs(ax * bx + ay * by));
      h.transversality_angle = angle;
      found.push_back(h);
    };
    scan.run(ta, tb, search.samples_per_segment);
    scan.run(-tb, -ta, search.samples_per_segment);
    if (found.empty()) continue;
    const auto best = std::max_element(found.begin(), found.end(), [](const HomoclinicPoint& l, const HomoclinicPoint& r) {
      return l.transversality_angle < r.transversality_angle;
    });
    if (best->transversality_angle < search.angle_floor) {
      throw TangencySuspected("tangency suspected: best crossing angle " + format_double(best->transversality_angle));
    }
    return *best;
  }
  throw std::runtime_error("find_homoclinic: no crossing of W^u with the local W^s within " +
                           std::to_string(search.max_iterates) + " iterates");
}

std::vector<Crossing> crossing_parameters(const HenonMap& map, const SaddleData& saddle, const ManifoldChart& chart,
                                          int n, double rho_u, double rho_s) {
  require_real(map, saddle);
  const double lam_signed = saddle.lambda.real();
  const double lam = std::abs(lam_signed);
  const int k = saddle.period;
  const double r_loc = 0.95 * chart.unstable().valid_radius;
  std::vector<Crossing> out{{0.0, 0.0}};
  // Piece i covers |t| in [rho_u lam^-(i+1), rho_u lam^-i]; F^n there is
  // evaluated as F^(n - e) o sigma_u o (lambda^e t) with the largest e
  // (possibly negative) keeping lambda^e t inside the valid disc. The local
  // discs may already meet away from p, so no piece is skipped.
  // Pieces continue until F^n of the piece is a tiny arc of W^u at p.
  for (int i = 0; rho_u * std::pow(lam, n - i) >= 1e-3 * r_loc; ++i) {
    const double hi = rho_u * std::pow(lam, -i);
    const double lo = hi / lam;
    int e = static_cast<int>(std::floor(std::log(r_loc / hi) / std::log(lam)));
    while (hi * std::pow(lam, e) > r_loc) --e;
    e = std::min(e, n);
    const double scale = std::pow(lam_signed, e);
    CurveScan scan{map, chart, k * (n - e), rho_s, 0.02 * space_scale(chart), chart_reach(chart), {}};
    // Scan in tau = lambda^e t.
    scan.on_crossing = [&](double tau, double sv) { out.push_back({tau / scale, sv}); };
    scan.run(lo * std::abs(scale), hi * std::abs(scale), 200);
    scan.run(-hi * std::abs(scale), -lo * std::abs(scale), 200);
  }
  std::sort(out.begin(), out.end(), [](const Crossing& l, const Crossing& r) {
    return std::abs(l.s) != std::abs(r.s) ? std::abs(l.s) < std::abs(r.s) : l.t < r.t;
  });
  std::vector<Crossing> dedup;
  for (const Crossing& c : out) {
    const bool dup = std::any_of(dedup.begin(), dedup.end(), [&](const Crossing& o) {
      return std::abs(o.t - c.t) <= 1e-9 * std::abs(c.t) && std::abs(o.s - c.s) <= 1e-9 * std::abs(c.s) + 1e-300;
    });
    if (!dup) dedup.push_back(c);
  }
  return dedup;
}

// ---------------------------------------------------------------------------
// Chart system

ChartSystem::ChartSystem(HenonMap map, std::shared_ptr<const ManifoldChart> chart, double r_u, double r_s,
                         int iterates, int degree)
    : map_(std::move(map)),
      chart_(std::move(chart)),
      r_u_(r_u),
      r_s_(r_s),
      iterates_(iterates),
      degree_(degree),
      domain_(Bidisc::square(1.0)) {
  if (iterates < 1) throw std::invalid_argument("ChartSystem: iterates must be >= 1");
}

Point2 ChartSystem::to_space(const Point2& z) const { return chart_->to_space(r_u_ * z.x, r_s_ * z.y); }

std::optional<Point2> ChartSystem::from_space(const Point2& w) const {
  const auto c = chart_->to_chart(w);
  if (!c) return std::nullopt;
  return Point2{c->x / r_u_, c->y / r_s_};
}

std::optional<Point2> ChartSystem::forward(const Point2& z) const {
  const Point2 w = iterate(map_, to_space(z), iterates_);
  if (!w.finite()) return std::nullopt;
  return from_space(w);
}

std::optional<Point2> ChartSystem::backward(const Point2& z) const {
  const Point2 w = iterate(map_, to_space(z), iterates_, true);
  if (!w.finite()) return std::nullopt;
  return from_space(w);
}

namespace {

Matrix2C scaled(const Matrix2C& D, double ru, double rs) { return {D.m00 * ru, D.m01 * rs, D.m10 * ru, D.m11 * rs}; }

}  // namespace

std::optional<Matrix2C> ChartSystem::jacobian(const Point2& z) const {
  const Point2 w = to_space(z);
  const Matrix2C Dphi = scaled(chart_->derivative(r_u_ * z.x, r_s_ * z.y), r_u_, r_s_);
  const Matrix2C DF = iterate_jacobian(map_, w, iterates_);
  const auto c = forward(z);
  if (!c) return std::nullopt;
  const Matrix2C Dout = scaled(chart_->derivative(r_u_ * c->x, r_s_ * c->y), r_u_, r_s_);
  if (std::abs(Dout.det()) == 0.0) return std::nullopt;
  return Dout.inverse() * DF * Dphi;
}

std::optional<Matrix2C> ChartSystem::jacobian_backward(const Point2& z) const {
  const Point2 w = to_space(z);
  const Matrix2C Dphi = scaled(chart_->derivative(r_u_ * z.x, r_s_ * z.y), r_u_, r_s_);
  const Matrix2C DF = iterate_jacobian(map_, w, iterates_, true);
  const auto c = backward(z);
  if (!c) return std::nullopt;
  const Matrix2C Dout = scaled(chart_->derivative(r_u_ * c->x, r_s_ * c->y), r_u_, r_s_);
  if (std::abs(Dout.det()) == 0.0) return std::nullopt;
  return Dout.inverse() * DF * Dphi;
}

std::string ChartSystem::describe() const {
  std::ostringstream os;
  os << "chart N=" << iterates_ << " r_u=" << format_double(r_u_) << " r_s=" << format_double(r_s_) << " of "
     << map_.descriptor();
  return os.str();
}

EmbeddedBidiscChart ChartSystem::frame() const {
  EmbeddedBidiscChart f;
  f.center = chart_->center();
  f.frame_u = unit(chart_->unstable().coeffs.at(1));
  f.frame_s = unit(chart_->stable().coeffs.at(1));
  f.r_u = r_u_;
  f.r_s = r_s_;
  return f;
}

// ---------------------------------------------------------------------------
// Horseshoe assembly

namespace {

struct ChartChecks {
  bool pass = false;
  double boundary_margin = 0.0;
  double cone_margin = 0.0;
  long samples = 0;
  ComponentCount count;
  std::string failure;
};

// Radii enclosing exactly the d crossings nearest p: cuts sit at geometric
// midpoints of gaps with ratio >= 1.3 in |t| and >= 3 in |s|.
std::optional<std::pair<double, double>> choose_radii(const std::vector<Crossing>& cross, int d, double rho_u_max,
                                                      double rho_s_max) {
  std::vector<double> ts;
  for (const Crossing& c : cross) ts.push_back(std::abs(c.t));
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::optional<std::pair<double, double>> best;
  double best_score = -1.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double hi_t = i + 1 < ts.size() ? ts[i + 1] : rho_u_max * 1.3;
    if (hi_t < 1.3 * ts[i] || ts[i] * 1.15 > rho_u_max) continue;
    const double rho_u = std::min(std::sqrt(std::max(ts[i], 1e-300) * hi_t), rho_u_max);
    std::vector<double> ss;
    for (const Crossing& c : cross) {
      if (std::abs(c.t) <= ts[i]) ss.push_back(std::abs(c.s));
    }
    std::sort(ss.begin(), ss.end());
    if (static_cast<int>(ss.size()) < d) continue;
    const double inner = ss[static_cast<std::size_t>(d - 1)];
    const double outer = static_cast<int>(ss.size()) > d ? ss[static_cast<std::size_t>(d)] : 3.0 * rho_s_max;
    if (outer < 3.0 * inner || inner * 1.7 > rho_s_max) continue;
    const double rho_s = std::min(std::sqrt(inner * outer), rho_s_max);
    const double score = std::min(std::log(hi_t / ts[i]) / std::log(1.3), std::log(outer / inner) / std::log(3.0));
    if (score >= best_score) {
      best_score = score;
      best = std::pair{rho_u, rho_s};
    }
  }
  return best;
}

double outside_margin(const std::optional<Point2>& w) {
  if (!w) return 1.0;  // left the chart altogether
  return std::max(std::abs(w->x), std::abs(w->y)) - 1.0;
}

ChartChecks run_checks(const ChartSystem& sys, int d, const HorseshoeOptions& options) {
  ChartChecks out;
  // Boundary conditions: G(∂_v U) and G^-1(∂_h U) avoid the closed bidisc.
  std::vector<Complex> disc{0.0};
  for (double rad : {0.25, 0.5, 0.75, 1.0}) {
    for (int k = 0; k < 8; ++k) disc.push_back(std::polar(rad, 2.0 * std::numbers::pi * (k + 0.5 * rad) / 8.0));
  }
  double bm = std::numeric_limits<double>::infinity();
  for (int i = 0; i < options.boundary_samples; ++i) {
    const Complex e = std::polar(1.0, 2.0 * std::numbers::pi * i / options.boundary_samples);
    for (const Complex& w : disc) {
      bm = std::min(bm, outside_margin(sys.forward({e, w})));
      bm = std::min(bm, outside_margin(sys.backward({w, e})));
    }
  }
  out.boundary_margin = bm;
  if (!(bm > 0.0)) {
    out.failure = "boundary images meet the bidisc (margin " + format_double(bm) + ")";
    return out;
  }

  ComponentCountOptions cco;
  cco.resolution = options.resolution;
  cco.rings = {0.5};
  cco.refine_levels = 3;
  // Chart evaluations are costly; speckle beyond this is a failed check anyway.
  cco.max_zoom_windows = 32;
  out.count = component_count(sys, Direction::bwd, cco);
  if (!out.count.aggregate || *out.count.aggregate != d) {
    out.failure = "component count " +
                  (out.count.aggregate ? std::to_string(*out.count.aggregate) : std::string("unresolved")) +
                  ", expected " + std::to_string(d);
    return out;
  }

  // Cone samples from G^-1(U) ∩ U on a few slices; the inverse obligation
  // is checked at the images, which fill G(U) ∩ U.
  const int res = options.resolution;
  const PlaneWindow win = PlaneWindow::around(0.0, 1.0, res);
  std::vector<Point2> pts;
  for (Complex s : {Complex{0.0}, Complex{0.6}, Complex{-0.6}, Complex{0.0, 0.6}, Complex{0.0, -0.6}}) {
    for (int j = 0; j < res; ++j) {
      for (int i = 0; i < res; ++i) {
        const Point2 z{win.pixel_center(i, j), s};
        if (std::abs(z.x) > 1.0) continue;
        const auto g = sys.forward(z);
        if (g && std::abs(g->x) <= 1.0 && std::abs(g->y) <= 1.0) pts.push_back(z);
      }
    }
  }
  const std::size_t stride = std::max<std::size_t>(1, pts.size() / static_cast<std::size_t>(options.cone_samples));
  double cm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); i += stride) {
    const auto M = sys.jacobian(pts[i]);
    if (!M || std::abs(M->det()) == 0.0) continue;
    ++out.samples;
    cm = std::min(cm, mobius_margin(M->m11, M->m10, M->m01, M->m00));
    const Matrix2C Mi = M->inverse();
    cm = std::min(cm, mobius_margin(Mi.m00, Mi.m01, Mi.m10, Mi.m11));
  }
  out.cone_margin = out.samples > 0 ? cm : -1.0;
  if (!(out.cone_margin > 0.0)) {
    out.failure = "cone field not trapping at sampled points (margin " + format_double(out.cone_margin) + ")";
    return out;
  }
  out.pass = true;
  return out;
}

}  // namespace

HorseshoeResult build_horseshoe(const HenonMap& map, const SaddleData& saddle, const HomoclinicPoint& q, int d,
                                const HorseshoeOptions& options) {
  if (d < 2) throw std::invalid_argument("build_horseshoe: degree d must be >= 2");
  require_real(map, saddle);
  const auto t0 = std::chrono::steady_clock::now();
  auto wu = parametrize_manifold(map, saddle, ManifoldKind::unstable, options.order);
  auto ws = parametrize_manifold(map, saddle, ManifoldKind::stable, options.order);
  const auto chart = std::make_shared<const ManifoldChart>(std::move(wu), std::move(ws), saddle.p);
  const double r_u = chart->unstable().valid_radius;
  const double r_s = chart->stable().valid_radius;
  const double lam = std::abs(saddle.lambda);
  const int k = saddle.period;

  HorseshoeResult result;
  result.certificate.method = CertMethod::cone_sample;
  result.certificate.map = map.descriptor();
  result.certificate.gamma = 1.0;
  result.certificate.R = 1.0;
  result.certificate.verdict = Verdict::unknown;
  if (!(std::abs(q.t_s) < 0.95 * r_s)) result.diagnostics.push_back("homoclinic point outside the local stable disc");

  // D_u may reach one fundamental domain beyond the local parametrization;
  // the chart only evaluates sigma_u on D_u,m.
  const double rho_u_max = 0.9 * r_u * lam;
  // After a failed attempt D_s must shrink below the radius just tried.
  // Crossings at level n + 1 include (t, mu s) for each (t, s) at level n,
  // so a smaller D_s is eventually found at a larger n; a thinner D_s
  // keeps the straightened chart closer to a product.
  double rho_s_cap = 0.95 * r_s;
  std::vector<std::optional<std::vector<Crossing>>> levels(static_cast<std::size_t>(options.max_n) + 1);
  auto elapsed_s = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  bool out_of_time = false;
  for (int attempt = 0; attempt <= options.shrink_attempts && !out_of_time; ++attempt) {
    // Smallest n admitting radii (rho_u, rho_s) that enclose exactly d
    // crossings with clear gaps on both axes: crossings just outside D_u
    // or D_s would poke into U through its boundary.
    int n = 0;
    double rho_u = 0.0;
    double rho_s = 0.0;
    for (int cand = 1; cand <= options.max_n && n == 0 && !out_of_time; ++cand) {
      out_of_time = elapsed_s() > options.time_budget_s;
      auto& cross = levels[static_cast<std::size_t>(cand)];
      if (!cross) cross = crossing_parameters(map, saddle, *chart, cand, rho_u_max, 0.95 * r_s);
      const auto cut = choose_radii(*cross, d, rho_u_max, rho_s_cap);
      if (!cut) continue;
      n = cand;
      rho_u = cut->first;
      rho_s = cut->second;
    }
    if (out_of_time) {
      result.diagnostics.push_back("time budget of " + format_double(options.time_budget_s) + " s exhausted");
      break;
    }
    if (n == 0) {
      result.diagnostics.push_back("no n <= " + std::to_string(options.max_n) + " with d well-separated crossings and rho_s <= " +
                                   format_double(rho_s_cap));
      break;
    }
    rho_s_cap = 0.5 * rho_s;
    int m_min = 1;
    while (rho_u * std::pow(lam, -m_min) > 0.9 * r_u) ++m_min;
    for (int m = m_min; m <= std::min(options.max_m, m_min + options.extra_m); ++m) {
      if (elapsed_s() > options.time_budget_s) {
        result.diagnostics.push_back("time budget of " + format_double(options.time_budget_s) + " s exhausted");
        out_of_time = true;
        break;
      }
      const double ru_m = rho_u * std::pow(lam, -m);
      auto sys = std::make_shared<const ChartSystem>(map, chart, ru_m, rho_s, k * (n + m), d);
      const ChartChecks checks = run_checks(*sys, d, options);
      if (!checks.pass) {
        result.diagnostics.push_back("n=" + std::to_string(n) + " m=" + std::to_string(m) + " rho_u=" +
                                     format_double(rho_u) + " rho_s=" + format_double(rho_s) + ": " + checks.failure);
        // The vertical strips only get thinner with m; once the raster
        // loses them, shrink the unstable disc instead.
        if (checks.count.aggregate && *checks.count.aggregate < d) break;
        continue;
      }
      result.n = n;
      result.m = m;
      result.N = n + m;
      result.system = sys;
      result.chart = sys->frame();
      result.count = checks.count;
      result.cone_margin = checks.cone_margin;
      result.boundary_margin = checks.boundary_margin;
      result.certificate.margin = std::min(checks.cone_margin, checks.boundary_margin);
      result.certificate.verdict = Verdict::yes;
      result.certificate.work.boxes = checks.samples;
      result.certificate.work.max_depth = result.N;
      result.certificate.R = rho_s;
      result.certificate.wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      return result;
    }
  }
  result.certificate.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace horseshoe
