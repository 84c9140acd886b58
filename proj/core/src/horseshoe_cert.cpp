#include "horseshoe/horseshoe_cert.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "horseshoe/parallel.hpp"
#include "horseshoe/polynomial.hpp"
#include "horseshoe/raster.hpp"

namespace horseshoe {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double add_up(double a, double b) { return Interval::up(a + b); }
double mul_up(double a, double b) { return Interval::up(a * b); }
double div_up(double a, double b) { return Interval::up(a / b); }

// Image of the closed unit disc under t -> (A t + B) / (C t + D) lies in
// the open unit disc, with `slack` to spare. Poles in the closed disc fail.
bool mobius_maps_disc_inside(Complex A, Complex B, Complex C, Complex D, double slack = 0.0) {
  const double den = std::norm(D) - std::norm(C);
  if (!(den > 0.0)) return false;
  const Complex center = (B * std::conj(D) - A * std::conj(C)) / den;
  const double radius = std::abs(A * D - B * C) / den;
  return std::abs(center) + radius < 1.0 - slack;
}

// Same quantity as a signed margin: 1 - (|center| + radius), or -inf.
double mobius_margin(Complex A, Complex B, Complex C, Complex D) {
  const double den = std::norm(D) - std::norm(C);
  if (!(den > 0.0)) return -std::numeric_limits<double>::infinity();
  const Complex center = (B * std::conj(D) - A * std::conj(C)) / den;
  const double radius = std::abs(A * D - B * C) / den;
  return 1.0 - (std::abs(center) + radius);
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("cone aperture gamma must lie in (0, 1]");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.5) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must exceed 1/2");
}

double bidisc_alpha(const HenonMap& map, const Bidisc& B) {
  const double R = std::max(B.r1, B.r2);
  return R / (2.0 * escape_radius(map));
}

}  // namespace

ConeField::ConeField(double gamma) : gamma_(gamma) { check_gamma(gamma); }

double ConeField::derivative_bound(double abs_a) const { return add_up(gamma_, div_up(abs_a, gamma_)); }

bool ConeField::maps_horizontal_inside(const Matrix2C& M) const {
  // Slope t = gamma v / u on the unit disc.
  return mobius_maps_disc_inside(M.m11, gamma_ * M.m10, M.m01 / gamma_, M.m00);
}

bool ConeField::maps_vertical_inside(const Matrix2C& M) const {
  // Slope t = u / (gamma v) on the unit disc.
  return mobius_maps_disc_inside(M.m00, M.m01 / gamma_, gamma_ * M.m10, M.m11);
}

std::string to_string(CertMethod m) {
  switch (m) {
    case CertMethod::inequality: return "inequality";
    case CertMethod::cone_sweep: return "cone_sweep";
    case CertMethod::component_count: return "component_count";
    case CertMethod::cone_sample: return "cone_sample";
  }
  return "inequality";
}

std::string Certificate::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = horseshoe::to_string(method);
  j["map"] = map;
  j["R"] = R;
  j["alpha"] = alpha;
  j["gamma"] = gamma;
  j["margin"] = std::isfinite(margin) ? nlohmann::ordered_json(margin) : nlohmann::ordered_json(nullptr);
  j["verdict"] = horseshoe::to_string(verdict);
  j["boxes"] = work.boxes;
  j["depth"] = work.max_depth;
  j["wall_ms"] = wall_ms;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Closed-form inequality

double inequality_radius(double abs_a, double abs_c, double alpha) {
  const double s = 1.0 + abs_a;
  return alpha * (s + std::sqrt(s * s + 4.0 * abs_c));
}

double inequality_margin(double abs_a, double abs_c, double gamma, double alpha) {
  check_gamma(gamma);
  // Upper bound on R, lower bound on |c| - R (1 + |a|), lower bound on the
  // square root, upper bound on the cone requirement.
  const Interval s = Interval{1.0} + Interval{abs_a};
  const Interval disc = s * s + Interval{4.0} * Interval{abs_c};
  const Interval R = Interval{alpha} * (s + sqrt(disc));
  const Interval gap = Interval{abs_c} - R * s;
  const double root = sqrt_down(gap.lo());
  const double lhs = Interval::down(2.0 * root);
  const double need = add_up(gamma, div_up(abs_a, gamma));
  return Interval::down(lhs - need);
}

double certified_threshold(double abs_a, double gamma, double alpha) {
  check_gamma(gamma);
  check_alpha(alpha);
  double lo = 0.0;
  double hi = 1.0;
  while (!(inequality_margin(abs_a, hi, gamma, alpha) > 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi) || hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (inequality_margin(abs_a, mid, gamma, alpha) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

Certificate certify_inequality(const HenonMap& map, double gamma, double alpha) {
  if (map.degree() != 2 || !map.is_normal_form()) {
    throw std::invalid_argument("certify_inequality requires the quadratic normal form x^2 + c - a y; use the cone sweep");
  }
  check_gamma(gamma);
  check_alpha(alpha);
  const auto t0 = Clock::now();
  Certificate cert;
  cert.method = CertMethod::inequality;
  cert.map = map.descriptor();
  cert.alpha = alpha;
  cert.gamma = gamma;
  const double abs_a = std::abs(map.a());
  const double abs_c = std::abs(map.c());
  cert.R = inequality_radius(abs_a, abs_c, alpha);
  cert.margin = inequality_margin(abs_a, abs_c, gamma, alpha);
  cert.verdict = cert.margin > 0.0 ? Verdict::yes : Verdict::no;
  cert.wall_ms = elapsed_ms(t0);
  return cert;
}

// ---------------------------------------------------------------------------
// Aperture search

namespace {

// Maximizes f over [lo, hi] assuming unimodality near the bracket.
template <typename F>
double golden_max(F f, double lo, double hi, int iterations = 80) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

// Grid search then alternating golden-section refinement of score(gamma, alpha).
template <typename Score>
std::pair<double, double> search_aperture(const ApertureSearch& s, Score score) {
  const double alpha_lo = kDefaultAlpha;
  const double alpha_hi = std::max(s.alpha_max, alpha_lo * 1.01);
  const double gamma_lo = s.restrict_gamma_to_one ? 1.0 : s.gamma_min;
  const int ng = s.restrict_gamma_to_one ? 1 : std::max(2, s.gamma_grid);
  const int na = std::max(2, s.alpha_grid);
  double best = -std::numeric_limits<double>::infinity();
  double bg = 1.0;
  double ba = alpha_lo;
  for (int i = 0; i < ng; ++i) {
    const double g = ng == 1 ? 1.0 : gamma_lo + (1.0 - gamma_lo) * i / (ng - 1);
    for (int k = 0; k < na; ++k) {
      const double al = alpha_lo + (alpha_hi - alpha_lo) * k / (na - 1);
      const double v = score(g, al);
      if (v > best) {
        best = v;
        bg = g;
        ba = al;
      }
    }
  }
  const double dg = ng == 1 ? 0.0 : (1.0 - gamma_lo) / (ng - 1);
  const double da = (alpha_hi - alpha_lo) / (na - 1);
  for (int round = 0; round < 4; ++round) {
    if (ng > 1) {
      const double glo = std::max(gamma_lo, bg - dg);
      const double ghi = std::min(1.0, bg + dg);
      const double g = golden_max([&](double x) { return score(x, ba); }, glo, ghi);
      if (score(g, ba) > score(bg, ba)) bg = g;
      // The ends of the bracket are not visited by golden section.
      for (double e : {glo, ghi}) {
        if (score(e, ba) > score(bg, ba)) bg = e;
      }
    }
    const double alo = std::max(alpha_lo, ba - da);
    const double ahi = std::min(alpha_hi, ba + da);
    const double al = golden_max([&](double x) { return score(bg, x); }, alo, ahi);
    if (score(bg, al) > score(bg, ba)) ba = al;
    for (double e : {alo, ahi}) {
      if (score(bg, e) > score(bg, ba)) ba = e;
    }
  }
  return {bg, ba};
}

}  // namespace

ApertureResult optimize_aperture(const HenonMap& map, const ApertureSearch& search) {
  if (map.degree() != 2 || !map.is_normal_form()) {
    throw std::invalid_argument("optimize_aperture requires the quadratic normal form");
  }
  const double abs_a = std::abs(map.a());
  const double abs_c = std::abs(map.c());
  const auto [g, al] = search_aperture(search, [&](double gamma, double alpha) {
    return inequality_margin(abs_a, abs_c, gamma, alpha);
  });
  ApertureResult out;
  out.gamma = g;
  out.alpha = al;
  out.threshold = certified_threshold(abs_a, g, al);
  out.certificate = certify_inequality(map, g, al);
  return out;
}

ApertureResult minimize_threshold(double abs_a, const ApertureSearch& search) {
  const auto [g, al] = search_aperture(search, [&](double gamma, double alpha) {
    return -certified_threshold(abs_a, gamma, alpha);
  });
  ApertureResult out;
  out.gamma = g;
  out.alpha = al;
  out.threshold = certified_threshold(abs_a, g, al);
  const HenonMap at_threshold = HenonMap::normal_form(abs_a, -out.threshold);
  out.certificate = certify_inequality(at_threshold, g, al);
  return out;
}

// ---------------------------------------------------------------------------
// Interval cone sweep

namespace {

struct SweepContext {
  const HenonMap& map;
  const Bidisc& B;
  const ConeField& cones;
  ComplexRect a;
  ComplexRect c1, c2;
  ComplexRect a_c2;
  double r1_up, r2_up, abs_a_r2_up;
  double need;
  int max_splits;
  std::size_t max_cells;
};

struct SubtreeResult {
  WorkCounters work;
  Verdict verdict = Verdict::yes;
  double margin = std::numeric_limits<double>::infinity();
  std::vector<Box2> undecided;
};

bool meets_disc(const ComplexRect& z, const ComplexRect& center, double r_up) {
  return (z - center).abs_lower() <= r_up;
}

// Exact test at the center of a cell; a definite failure of cone
// invariance at a point where the obligation holds refutes the field.
double point_violation(const SweepContext& ctx, const Point2& z) {
  double worst = std::numeric_limits<double>::infinity();
  if (!ctx.B.contains(z)) return worst;
  const double g = ctx.cones.gamma();
  const Point2 f = ctx.map.step(z);
  if (f.finite() && ctx.B.contains(f)) {
    const Matrix2C M = ctx.map.jacobian(z);
    worst = std::min(worst, mobius_margin(M.m11, g * M.m10, M.m01 / g, M.m00));
  }
  const Point2 b = ctx.map.step_inverse(z);
  if (b.finite() && ctx.B.contains(b)) {
    const Matrix2C M = ctx.map.jacobian_inverse(z);
    worst = std::min(worst, mobius_margin(M.m00, M.m01 / g, g * M.m10, M.m11));
  }
  return worst;
}

void sweep(const SweepContext& ctx, const Box2& root, int root_splits, SubtreeResult& out) {
  struct Item {
    Box2 box;
    int splits;
  };
  std::vector<Item> stack{{root, root_splits}};
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    ++out.work.boxes;
    out.work.max_depth = std::max(out.work.max_depth, (item.splits + 3) / 4);
    const Box2& box = item.box;
    // Outside the closed bidisc.
    if (!meets_disc(box.x, ctx.c1, ctx.r1_up) || !meets_disc(box.y, ctx.c2, ctx.r2_up)) {
      ++out.work.excluded;
      continue;
    }
    const ComplexRect px = ctx.map.p(box.x);
    const ComplexRect py = ctx.map.p(box.y);
    // Forward obligation: F(cell) may meet B. F = (p(x) - a y, x).
    const ComplexRect fx = px - ctx.a * box.y;
    const bool fwd = meets_disc(fx, ctx.c1, ctx.r1_up) && meets_disc(box.x, ctx.c2, ctx.r2_up);
    // Backward obligation: F^-1(cell) may meet B. F^-1 = (y, (p(y) - x) / a).
    const ComplexRect bx = py - box.x - ctx.a_c2;
    const bool bwd = meets_disc(box.y, ctx.c1, ctx.r1_up) && bx.abs_lower() <= ctx.abs_a_r2_up;
    bool fwd_ok = !fwd;
    bool bwd_ok = !bwd;
    double cell_margin = std::numeric_limits<double>::infinity();
    if (fwd) {
      const double m = ctx.map.dp(box.x).abs_lower() - ctx.need;
      fwd_ok = m > 0.0;
      cell_margin = std::min(cell_margin, m);
    }
    if (bwd) {
      const double m = ctx.map.dp(box.y).abs_lower() - ctx.need;
      bwd_ok = m > 0.0;
      cell_margin = std::min(cell_margin, m);
    }
    if (fwd_ok && bwd_ok) {
      if (!fwd && !bwd) {
        ++out.work.excluded;
      } else {
        ++out.work.proved;
        out.margin = std::min(out.margin, cell_margin);
      }
      continue;
    }
    const double v = point_violation(ctx, box.mid());
    if (v < -1e-9) {
      out.verdict = Verdict::no;
      out.margin = v;
      return;
    }
    if (item.splits >= ctx.max_splits) {
      ++out.work.undecided;
      out.verdict = meet(out.verdict, Verdict::unknown);
      if (out.undecided.size() < ctx.max_cells) out.undecided.push_back(box);
      continue;
    }
    const auto halves = box.bisect(box.widest_axis());
    // Push the upper half first so the lower half is processed first.
    stack.push_back({halves[1], item.splits + 1});
    stack.push_back({halves[0], item.splits + 1});
  }
}

}  // namespace

Certificate certify_cone_sweep(const HenonMap& map, const Bidisc& B, const ConeField& cones,
                               const SweepOptions& options) {
  if (options.max_depth < 0) throw std::invalid_argument("certify_cone_sweep: negative depth");
  const auto t0 = Clock::now();
  Certificate cert;
  cert.method = CertMethod::cone_sweep;
  cert.map = map.descriptor();
  cert.R = std::max(B.r1, B.r2);
  cert.alpha = bidisc_alpha(map, B);
  cert.gamma = cones.gamma();

  const HenonLikeCheck like = check_quasi_henon_like(map, B, Orientation::horizontal);
  if (like.verdict != Verdict::yes) {
    cert.verdict = like.verdict;
    cert.margin = like.verdict == Verdict::no ? std::min(like.margin, 0.0) : 0.0;
    cert.note = "bidisc is not certified quasi-Henon-like";
    cert.wall_ms = elapsed_ms(t0);
    return cert;
  }

  SweepContext ctx{map,
                   B,
                   cones,
                   ComplexRect{map.a()},
                   ComplexRect{B.c1},
                   ComplexRect{B.c2},
                   ComplexRect{map.a()} * ComplexRect{B.c2},
                   Interval::up(B.r1),
                   Interval::up(B.r2),
                   mul_up(hypot_up(std::fabs(map.a().real()), std::fabs(map.a().imag())), B.r2),
                   cones.derivative_bound(hypot_up(std::fabs(map.a().real()), std::fabs(map.a().imag()))),
                   4 * options.max_depth,
                   options.max_reported_cells};

  // Seed cells: a fixed number of single-axis splits, processed in parallel.
  const int seed_splits = std::min(8, ctx.max_splits);
  std::vector<Box2> seeds{B.bounding_box()};
  for (int s = 0; s < seed_splits; ++s) {
    std::vector<Box2> next;
    next.reserve(seeds.size() * 2);
    for (const Box2& b : seeds) {
      const auto h = b.bisect(b.widest_axis());
      next.push_back(h[0]);
      next.push_back(h[1]);
    }
    seeds = std::move(next);
  }
  std::vector<SubtreeResult> results(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), resolve_workers(), [&](int i) {
    sweep(ctx, seeds[static_cast<std::size_t>(i)], seed_splits, results[static_cast<std::size_t>(i)]);
  });

  Verdict verdict = Verdict::yes;
  double margin = std::numeric_limits<double>::infinity();
  double worst_violation = 0.0;
  for (const auto& r : results) {
    verdict = meet(verdict, r.verdict);
    cert.work.boxes += r.work.boxes;
    cert.work.excluded += r.work.excluded;
    cert.work.proved += r.work.proved;
    cert.work.undecided += r.work.undecided;
    cert.work.max_depth = std::max(cert.work.max_depth, r.work.max_depth);
    if (r.verdict == Verdict::no) worst_violation = std::min(worst_violation, r.margin);
    if (r.verdict == Verdict::yes) margin = std::min(margin, r.margin);
    for (const Box2& b : r.undecided) {
      if (cert.undecided_cells.size() < options.max_reported_cells) cert.undecided_cells.push_back(b);
    }
  }
  cert.verdict = verdict;
  if (verdict == Verdict::yes) {
    // Every cell was excluded or proved; the margin is the weakest proof.
    cert.margin = std::isfinite(margin) ? std::min(margin, like.margin) : like.margin;
  } else if (verdict == Verdict::no) {
    cert.margin = worst_violation;
  } else {
    cert.margin = 0.0;
    cert.note = std::to_string(cert.work.undecided) + " undecided cells at depth " + std::to_string(options.max_depth);
  }
  cert.wall_ms = elapsed_ms(t0);
  return cert;
}

// ---------------------------------------------------------------------------
// Critical values

CriticalValueCheck critical_values_check(const HenonMap& map, const Bidisc& B) {
  std::vector<Complex> critical;
  if (map.is_normal_form()) {
    critical.push_back(0.0);
  } else {
    const auto dcoeffs = derivative(map.coeffs());
    critical = polynomial_roots(dcoeffs);
  }
  const Complex a = map.a();
  double margin = std::numeric_limits<double>::infinity();
  for (const Complex& xi : critical) {
    const Complex v = map.p(xi);
    // x -> p(x) - a y over y in D2: values fill the disc around p(xi) - a c2.
    margin = std::min(margin, std::abs(v - a * B.c2 - B.c1) - std::abs(a) * B.r2 - B.r1);
    // y -> (p(y) - x) / a over x in D1.
    margin = std::min(margin, std::abs((v - B.c1) / a - B.c2) - B.r1 / std::abs(a) - B.r2);
  }
  return {margin > 0.0, margin};
}

bool critical_values_escape(const HenonMap& map, const Bidisc& B) { return critical_values_check(map, B).escape; }

// ---------------------------------------------------------------------------
// Component counting

namespace {

std::vector<Complex> slice_positions(Complex center, double radius, const std::vector<double>& rings) {
  std::vector<Complex> out{center};
  for (double rho : rings) {
    for (int k = 0; k < 8; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 8.0;
      out.push_back(center + std::polar(rho * radius, t));
    }
  }
  return out;
}

bool stays(const PlanarSystem& s, Point2 z, int steps, bool forward) {
  const Bidisc& B = s.domain();
  if (!B.contains(z)) return false;
  for (int m = 0; m < steps; ++m) {
    const auto w = forward ? s.forward(z) : s.backward(z);
    if (!w || !B.contains(*w)) return false;
    z = *w;
  }
  return true;
}

// Raster count on one slice with optional zooming into candidate regions.
struct SliceCounter {
  const PlanarSystem& system;
  const Bidisc::Slice& slice;
  bool forward;  // test G(z) in B (bwd count) or G^-1(z) in B (fwd count)
  int free_axis;  // 0: x varies along the slice, 1: y varies
  const ComponentCountOptions& options;
  int workers;
  mutable int zooms = 0;
  mutable bool exhausted = false;

  // 0: image outside, 1: image inside, 2: outside but possibly meets B
  // within half a pixel diagonal.
  std::uint8_t classify(const Point2& z, double h) const {
    const Bidisc& B = system.domain();
    if (!B.contains(z)) return 0;
    const auto w = forward ? system.forward(z) : system.backward(z);
    if (!w) return 0;
    if (B.contains(*w)) return 1;
    if (options.refine_levels == 0) return 0;
    const auto J = forward ? system.jacobian(z) : system.jacobian_backward(z);
    if (!J) return 0;
    const Complex dx = free_axis == 0 ? J->m00 : J->m01;
    const Complex dy = free_axis == 0 ? J->m10 : J->m11;
    const bool near_x = std::abs(w->x - B.c1) - std::abs(dx) * h <= B.r1;
    const bool near_y = std::abs(w->y - B.c2) - std::abs(dy) * h <= B.r2;
    return near_x && near_y ? 2 : 0;
  }

  // Components of the mask inside `window` whose centroid satisfies `owns`,
  // each represented by its mask pixel nearest the centroid.
  void collect(const PlaneWindow& window, const std::function<bool(Complex)>& owns, int level,
               std::vector<Complex>& out) const {
    const int w = window.width;
    const int hgt = window.height;
    const double h = 0.75 * std::hypot(window.dx(), window.dy());
    std::vector<std::uint8_t> cls(static_cast<std::size_t>(w) * static_cast<std::size_t>(hgt), 0);
    parallel_for(hgt, workers, [&](int j) {
      for (int i = 0; i < w; ++i) {
        cls[static_cast<std::size_t>(j) * static_cast<std::size_t>(w) + static_cast<std::size_t>(i)] =
            classify(slice.at(window.pixel_center(i, j)), h);
      }
    });
    std::vector<std::uint8_t> mask(cls.size());
    std::vector<std::uint8_t> cand(cls.size());
    for (std::size_t k = 0; k < cls.size(); ++k) {
      mask[k] = cls[k] == 1;
      cand[k] = cls[k] != 0;
    }
    const Labeling2D mlab = label_components(mask, window);
    auto representative = [&](const Component& c) {
      double best = std::numeric_limits<double>::infinity();
      Complex rep = c.centroid;
      for (int j = c.j_min; j <= c.j_max; ++j) {
        for (int i = c.i_min; i <= c.i_max; ++i) {
          if (mlab.labels[static_cast<std::size_t>(j) * static_cast<std::size_t>(w) + static_cast<std::size_t>(i)] !=
              c.label) {
            continue;
          }
          const Complex q = window.pixel_center(i, j);
          if (std::abs(q - c.centroid) < best) {
            best = std::abs(q - c.centroid);
            rep = q;
          }
        }
      }
      return rep;
    };
    if (options.refine_levels == 0 || level >= options.refine_levels) {
      for (const Component& c : mlab.components) {
        if (owns(c.centroid)) out.push_back(representative(c));
      }
      return;
    }
    // Candidate regions wide enough are read off here; thin ones are zoomed.
    const Labeling2D clab = label_components(cand, window);
    for (std::size_t ci = 0; ci < clab.components.size(); ++ci) {
      const Component& c = clab.components[ci];
      auto in_region = [&, ci](Complex z) {
        const int i = static_cast<int>(std::floor((z.real() - window.re_lo) / window.dx()));
        const int j = static_cast<int>(std::floor((z.imag() - window.im_lo) / window.dy()));
        if (i < 0 || j < 0 || i >= w || j >= hgt) return false;
        return clab.labels[static_cast<std::size_t>(j) * static_cast<std::size_t>(w) + static_cast<std::size_t>(i)] ==
                   static_cast<int>(ci) &&
               owns(z);
      };
      const bool wide = c.i_max - c.i_min >= 8 && c.j_max - c.j_min >= 8;
      if (wide) {
        for (const Component& m : mlab.components) {
          if (in_region(m.centroid)) out.push_back(representative(m));
        }
        continue;
      }
      if (++zooms > options.max_zoom_windows) {
        exhausted = true;
        return;
      }
      const double side = std::max(c.i_max - c.i_min + 3, c.j_max - c.j_min + 3) * std::max(window.dx(), window.dy());
      const Complex mid{window.re_lo + 0.5 * (c.i_min + c.i_max + 1) * window.dx(),
                        window.im_lo + 0.5 * (c.j_min + c.j_max + 1) * window.dy()};
      collect(PlaneWindow::around(mid, 0.5 * side, options.zoom_resolution), in_region, level + 1, out);
    }
  }
};

}  // namespace

ComponentCount component_count(const PlanarSystem& system, Direction direction, const ComponentCountOptions& options) {
  if (options.resolution < 4) throw std::invalid_argument("component_count: resolution must be >= 4");
  const Bidisc& B = system.domain();
  ComponentCount out;
  out.direction = direction;
  // fwd: F(B) ∩ B sliced along V_x (free y); bwd: F^-1(B) ∩ B along H_y (free x).
  const bool free_y = direction == Direction::fwd;
  const Complex fixed_center = free_y ? B.c1 : B.c2;
  const double fixed_radius = free_y ? B.r1 : B.r2;
  const auto positions = slice_positions(fixed_center, fixed_radius, options.rings);
  const Bidisc::Slice proto = free_y ? B.vertical_slice(0.0) : B.horizontal_slice(0.0);
  const PlaneWindow window = PlaneWindow::around(proto.center, proto.radius, options.resolution);
  const int workers = resolve_workers(options.workers);

  out.slices.resize(positions.size());
  for (std::size_t s = 0; s < positions.size(); ++s) {
    const Bidisc::Slice slice = free_y ? B.vertical_slice(positions[s]) : B.horizontal_slice(positions[s]);
    const SliceCounter counter{system, slice, direction == Direction::bwd, free_y ? 1 : 0, options, workers};
    std::vector<Complex> reps;
    counter.collect(window, [](Complex) { return true; }, 0, reps);
    out.slices[s] = {positions[s], counter.exhausted ? -1 : static_cast<int>(reps.size())};
  }

  std::map<int, int> votes;
  for (const auto& s : out.slices) ++votes[s.count];
  const int majority = std::max_element(votes.begin(), votes.end(), [](const auto& l, const auto& r) {
                         return l.second < r.second;
                       })->first;
  for (std::size_t s = 0; s < out.slices.size(); ++s) {
    if (out.slices[s].count != majority) out.offending.push_back(s);
  }
  if (out.offending.empty() && majority >= 0) out.aggregate = majority;

  if (options.coarse_4d_resolution > 0) {
    const int n = options.coarse_4d_resolution;
    const Box2 box = B.bounding_box();
    auto coord = [&](int k, int i) {
      const Interval& ax = box.axis(k);
      return ax.lo() + (i + 0.5) * (ax.hi() - ax.lo()) / n;
    };
    const std::size_t n1 = static_cast<std::size_t>(n);
    std::vector<std::uint8_t> mask(n1 * n1 * n1 * n1, 0);
    parallel_for(n, workers, [&](int i3) {
      for (int i2 = 0; i2 < n; ++i2) {
        for (int i1 = 0; i1 < n; ++i1) {
          for (int i0 = 0; i0 < n; ++i0) {
            const Point2 z{{coord(0, i0), coord(1, i1)}, {coord(2, i2), coord(3, i3)}};
            const std::size_t idx = ((static_cast<std::size_t>(i3) * n1 + static_cast<std::size_t>(i2)) * n1 +
                                     static_cast<std::size_t>(i1)) * n1 + static_cast<std::size_t>(i0);
            mask[idx] = stays(system, z, 1, direction == Direction::bwd) ? 1 : 0;
          }
        }
      }
    });
    out.coarse_4d = count_components_4d(mask, {n, n, n, n});
  }
  return out;
}

std::vector<Complex> slice_components(const PlanarSystem& system, Direction direction, Complex fixed,
                                      const ComponentCountOptions& options) {
  if (options.resolution < 4) throw std::invalid_argument("slice_components: resolution must be >= 4");
  const Bidisc& B = system.domain();
  const bool free_y = direction == Direction::fwd;
  const Bidisc::Slice slice = free_y ? B.vertical_slice(fixed) : B.horizontal_slice(fixed);
  const PlaneWindow window = PlaneWindow::around(slice.center, slice.radius, options.resolution);
  const SliceCounter counter{system, slice, !free_y, free_y ? 1 : 0, options, resolve_workers(options.workers)};
  std::vector<Complex> reps;
  counter.collect(window, [](Complex) { return true; }, 0, reps);
  if (counter.exhausted) throw std::runtime_error("slice_components: zoom budget exhausted");
  return reps;
}

ComponentCount component_count(const HenonMap& map, const Bidisc& B, Direction direction, int resolution) {
  const HenonSystem system(map, B);
  ComponentCountOptions options;
  options.resolution = resolution;
  return component_count(system, direction, options);
}

// ---------------------------------------------------------------------------
// Fiber diameters

FiberDecay fiber_diameter_decay(const PlanarSystem& system, int depth, const FiberDecayOptions& options) {
  if (depth < 1) throw std::invalid_argument("fiber_diameter_decay: depth must be >= 1");
  if (options.resolution < 8) throw std::invalid_argument("fiber_diameter_decay: resolution must be >= 8");
  const Bidisc& B = system.domain();
  std::vector<Complex> ys = options.slices;
  if (ys.empty()) ys = {B.c2, B.c2 + 0.5 * B.r2, B.c2 + Complex{0.0, 0.5 * B.r2}};
  const int res = options.resolution;
  const int workers = resolve_workers(options.workers);

  FiberDecay out;
  out.diameters.assign(static_cast<std::size_t>(depth), 0.0);
  out.component_counts.assign(static_cast<std::size_t>(depth), 0);
  int resolved = depth;

  for (std::size_t s = 0; s < ys.size(); ++s) {
    const Bidisc::Slice slice = B.horizontal_slice(ys[s]);
    // Each window carries the parent's extent so pieces of neighbouring
    // components seen through an overlapping window are dropped.
    struct Window {
      PlaneWindow w;
      Complex parent_lo, parent_hi;
      double parent_dx;
      bool root;
    };
    std::vector<Window> windows{{PlaneWindow::around(slice.center, slice.radius, res), {}, {}, 0.0, true}};
    for (int n = 1; n <= std::min(depth, resolved); ++n) {
      std::vector<std::vector<Component>> found(windows.size());
      std::vector<std::uint8_t> failed(windows.size(), 0);
      struct Extent {
        Complex lo, hi;
        double dx;
      };
      std::vector<std::vector<Extent>> extents(windows.size());
      parallel_for(static_cast<int>(windows.size()), workers, [&](int wi) {
        const Window& win = windows[static_cast<std::size_t>(wi)];
        auto& comps = found[static_cast<std::size_t>(wi)];
        // Children closer than a few pixels merge; refine the window
        // until it shows at least d pieces or the budget runs out.
        for (int r = res; r <= 4 * res; r *= 2) {
          PlaneWindow pw = win.w;
          pw.width = pw.height = r;
          std::vector<std::uint8_t> mask(static_cast<std::size_t>(r) * static_cast<std::size_t>(r), 0);
          for (int j = 0; j < r; ++j) {
            for (int i = 0; i < r; ++i) {
              mask[static_cast<std::size_t>(j) * static_cast<std::size_t>(r) + static_cast<std::size_t>(i)] =
                  stays(system, slice.at(pw.pixel_center(i, j)), n, true) ? 1 : 0;
            }
          }
          const Labeling2D lab = label_components(mask, pw);
          comps.clear();
          bool bad = false;
          for (const Component& c : lab.components) {
            if (!win.root) {
              // The parent box joins pixel centers; its set reaches a pixel further.
              const double tol = 1.5 * win.parent_dx;
              if (c.centroid.real() < win.parent_lo.real() - tol || c.centroid.real() > win.parent_hi.real() + tol ||
                  c.centroid.imag() < win.parent_lo.imag() - tol || c.centroid.imag() > win.parent_hi.imag() + tol) {
                continue;
              }
              if (c.touches_border) bad = true;
            }
            if (c.pixels < 4) bad = true;
            // Extents in plane coordinates; the grid may have been refined.
            const Complex lo = pw.pixel_center(c.i_min, c.j_min);
            const Complex hi = pw.pixel_center(c.i_max, c.j_max);
            comps.push_back(c);
            extents[static_cast<std::size_t>(wi)].push_back({lo, hi, pw.dx()});
          }
          failed[static_cast<std::size_t>(wi)] = bad ? 1 : 0;
          if (win.root || static_cast<int>(comps.size()) >= system.degree()) break;
          extents[static_cast<std::size_t>(wi)].clear();
        }
      });
      if (std::any_of(failed.begin(), failed.end(), [](std::uint8_t f) { return f != 0; })) {
        resolved = n - 1;
        out.note = "component resolution failed at depth " + std::to_string(n);
        break;
      }
      long count = 0;
      double diam = 0.0;
      std::vector<Window> next;
      for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        for (std::size_t ci = 0; ci < found[wi].size(); ++ci) {
          ++count;
          diam = std::max(diam, found[wi][ci].diameter);
          const Extent& e = extents[wi][ci];
          const double half = 0.5 * std::max(e.hi.real() - e.lo.real(), e.hi.imag() - e.lo.imag()) + 3.0 * e.dx;
          next.push_back({PlaneWindow::around(0.5 * (e.lo + e.hi), half, res), e.lo, e.hi, e.dx, false});
        }
      }
      const std::size_t k = static_cast<std::size_t>(n - 1);
      out.diameters[k] = std::max(out.diameters[k], diam);
      if (s == 0) out.component_counts[k] = count;
      windows = std::move(next);
    }
  }
  out.resolved_depth = resolved;
  out.truncated = resolved < depth;
  out.diameters.resize(static_cast<std::size_t>(resolved));
  out.component_counts.resize(static_cast<std::size_t>(resolved));
  return out;
}

FiberDecay fiber_diameter_decay(const HenonMap& map, const Bidisc& B, int depth) {
  const HenonSystem system(map, B);
  return fiber_diameter_decay(system, depth);
}

}  // namespace horseshoe
