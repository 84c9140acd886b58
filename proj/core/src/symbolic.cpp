#include "horseshoe/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "horseshoe/horseshoe_cert.hpp"
#include "horseshoe/periodic_orbits.hpp"
#include "horseshoe/raster.hpp"

namespace horseshoe {

namespace {

char symbol_char(int s) {
  if (s < 0 || s >= 36) throw std::invalid_argument("symbol out of range");
  return s < 10 ? static_cast<char>('0' + s) : static_cast<char>('a' + (s - 10));
}

int char_symbol(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'z') return c - 'a' + 10;
  throw std::invalid_argument(std::string("bad symbol '") + c + "'");
}

}  // namespace

SymbolWord SymbolWord::shifted() const {
  if (symbols.size() < 2 || offset + 1 >= static_cast<int>(symbols.size())) {
    throw std::invalid_argument("shifted: word too short");
  }
  SymbolWord w = *this;
  w.offset = offset + 1;
  return w;
}

std::string SymbolWord::to_string() const {
  std::string out;
  out.reserve(symbols.size() + 1);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (static_cast<int>(i) == offset) out.push_back('^');
    out.push_back(symbol_char(symbols[i]));
  }
  return out;
}

SymbolWord SymbolWord::parse(std::string_view text) {
  SymbolWord w;
  bool caret = false;
  for (char c : text) {
    if (c == '^') {
      if (caret) throw std::invalid_argument("word has two carets");
      caret = true;
      w.offset = static_cast<int>(w.symbols.size());
      continue;
    }
    w.symbols.push_back(char_symbol(c));
  }
  if (w.symbols.empty()) throw std::invalid_argument("empty word");
  if (w.offset >= static_cast<int>(w.symbols.size())) throw std::invalid_argument("caret after the last symbol");
  return w;
}

SymbolWord SymbolWord::periodic(const std::vector<int>& block, int before, int after) {
  if (block.empty() || before < 0 || after < 0) throw std::invalid_argument("periodic: bad arguments");
  const int p = static_cast<int>(block.size());
  SymbolWord w;
  w.offset = before;
  w.period = p;
  for (int k = -before; k <= after; ++k) w.symbols.push_back(block[static_cast<std::size_t>(((k % p) + p) % p)]);
  return w;
}

// ---------------------------------------------------------------------------

std::optional<Complex> continue_root(const PlanarSystem& system, Complex x0, Complex w0, Complex y0, Complex w1,
                                     Complex y1) {
  Complex x = x0;
  double t = 0.0;
  double h = 1.0;
  const Complex dw = w1 - w0;
  const Complex dy = y1 - y0;
  for (int guard = 0; guard < 20000 && t < 1.0; ++guard) {
    h = std::min(h, 1.0 - t);
    const double tn = t + h;
    const Complex yt = y0 + t * dy;
    const Complex yn = y0 + tn * dy;
    const Complex wn = w0 + tn * dw;
    const auto J = system.jacobian({x, yt});
    bool ok = false;
    Complex xc{};
    Complex xp{};
    if (J && J->m00 != Complex{}) {
      xp = x + (h * dw - J->m01 * h * dy) / J->m00;
      xc = xp;
      for (int it = 0; it < 8; ++it) {
        const auto f = system.forward({xc, yn});
        const auto Jc = system.jacobian({xc, yn});
        if (!f || !Jc || Jc->m00 == Complex{}) break;
        const Complex step = (f->x - wn) / Jc->m00;
        xc -= step;
        if (!is_finite(xc)) break;
        if (std::abs(step) <= 1e-14 * (1.0 + std::abs(xc))) {
          ok = true;
          break;
        }
      }
    }
    // Reject corrections large against the predicted move: a sign of
    // jumping to another preimage branch.
    if (ok && std::abs(xc - xp) <= 0.25 * std::abs(xp - x) + 1e-10 * (1.0 + std::abs(x))) {
      x = xc;
      t = tn;
      h *= 2.0;
    } else {
      h *= 0.5;
      if (h < 1e-12) return std::nullopt;
    }
  }
  if (t < 1.0) return std::nullopt;
  return x;
}

ComponentLabeling build_labeling(const PlanarSystem& system, int resolution) {
  if (resolution < 8) throw std::invalid_argument("build_labeling: resolution must be >= 8");
  const Bidisc& B = system.domain();
  ComponentCountOptions options;
  options.resolution = resolution;
  options.refine_levels = 3;
  std::vector<Complex> reps = slice_components(system, Direction::bwd, B.c2, options);
  const int d = system.degree();
  if (static_cast<int>(reps.size()) != d) {
    throw std::runtime_error("build_labeling: found " + std::to_string(reps.size()) +
                             " components of G^-1(B) on the slice y = c2, expected " + std::to_string(d));
  }
  std::sort(reps.begin(), reps.end(), [](Complex l, Complex r) {
    if (l.real() != r.real()) return l.real() < r.real();
    return l.imag() < r.imag();
  });
  ComponentLabeling out;
  out.degree = d;
  out.c1 = B.c1;
  out.c2 = B.c2;
  for (const Complex& start : reps) {
    const auto g = system.forward({start, B.c2});
    const auto root = g ? continue_root(system, start, g->x, B.c2, B.c1, B.c2) : std::nullopt;
    if (!root) throw std::runtime_error("build_labeling: could not locate the reference root of a component");
    out.roots.push_back(*root);
  }
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.roots.size(); ++i) {
    for (std::size_t j = i + 1; j < out.roots.size(); ++j) sep = std::min(sep, std::abs(out.roots[i] - out.roots[j]));
  }
  if (!(sep > 1e-9 * (1.0 + B.r1))) throw std::runtime_error("build_labeling: reference roots coincide");
  out.guard = std::min(1e-6 * (1.0 + B.r1), 0.25 * sep);
  return out;
}

std::optional<int> component_label(const PlanarSystem& system, const ComponentLabeling& labeling, const Point2& z) {
  const Bidisc& B = system.domain();
  if (!B.contains(z)) return std::nullopt;
  const auto g = system.forward(z);
  if (!g || !B.contains(*g)) return std::nullopt;
  const auto end = continue_root(system, z.x, g->x, z.y, labeling.c1, labeling.c2);
  if (!end) return std::nullopt;
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < labeling.roots.size(); ++i) {
    const double dd = std::abs(*end - labeling.roots[i]);
    if (dd < bd) {
      bd = dd;
      best = static_cast<int>(i);
    }
  }
  if (best < 0 || bd > labeling.guard) return std::nullopt;
  return best;
}

std::optional<int> image_label(const PlanarSystem& system, const ComponentLabeling& labeling, const Point2& z) {
  if (!system.domain().contains(z)) return std::nullopt;
  const auto w = system.backward(z);
  if (!w) return std::nullopt;
  return component_label(system, labeling, *w);
}

SymbolWord itinerary(const PlanarSystem& system, const ComponentLabeling& labeling, const Point2& z, int n_back,
                     int n_fwd) {
  if (n_back < 0 || n_fwd < 0) throw std::invalid_argument("itinerary: negative window");
  const Bidisc& B = system.domain();
  // orbit[i] = G^(i - n_back)(z), i = 0 .. n_back + n_fwd + 1
  std::vector<Point2> orbit(static_cast<std::size_t>(n_back + n_fwd + 2));
  orbit[static_cast<std::size_t>(n_back)] = z;
  for (int k = 1; k <= n_back; ++k) {
    const auto w = system.backward(orbit[static_cast<std::size_t>(n_back - k + 1)]);
    if (!w || !B.contains(*w)) throw NotInKError("not in K to requested depth: backward iterate " + std::to_string(k));
    orbit[static_cast<std::size_t>(n_back - k)] = *w;
  }
  if (!B.contains(z)) throw NotInKError("not in K to requested depth: point outside B");
  for (int k = 1; k <= n_fwd + 1; ++k) {
    const auto w = system.forward(orbit[static_cast<std::size_t>(n_back + k - 1)]);
    if (!w || !B.contains(*w)) throw NotInKError("not in K to requested depth: forward iterate " + std::to_string(k));
    orbit[static_cast<std::size_t>(n_back + k)] = *w;
  }
  SymbolWord word;
  word.offset = n_back;
  for (int k = -n_back; k <= n_fwd; ++k) {
    const auto s = component_label(system, labeling, orbit[static_cast<std::size_t>(k + n_back)]);
    if (!s) throw UnresolvedSymbolError("unresolved symbol at index " + std::to_string(k), k);
    word.symbols.push_back(*s);
  }
  return word;
}

// ---------------------------------------------------------------------------

namespace {

struct Chain {
  std::vector<Complex> x, y;
  std::vector<Complex> wsol, ysol;  // x[i] solves pi_1 G(x[i], ysol[i]) = wsol[i]
};

// Sweeps until the chain stops moving. Returns the number of sweeps, or
// -1 on failure.
int solve_chain(const PlanarSystem& system, Chain& ch, Complex xbc, Complex ybc, const RefineOptions& options) {
  const std::size_t L = ch.x.size();
  ch.y[0] = ybc;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double change = 0.0;
    double scale = 1.0;
    for (std::size_t r = 0; r < L; ++r) {
      const std::size_t i = L - 1 - r;
      const Complex target = i + 1 == L ? xbc : ch.x[i + 1];
      const auto xn = continue_root(system, ch.x[i], ch.wsol[i], ch.ysol[i], target, ch.y[i]);
      if (!xn) return -1;
      change = std::max(change, std::abs(*xn - ch.x[i]));
      scale = std::max(scale, std::abs(*xn));
      ch.x[i] = *xn;
      ch.wsol[i] = target;
      ch.ysol[i] = ch.y[i];
    }
    for (std::size_t i = 0; i + 1 < L; ++i) {
      const auto g = system.forward({ch.x[i], ch.y[i]});
      if (!g) return -1;
      change = std::max(change, std::abs(g->y - ch.y[i + 1]));
      scale = std::max(scale, std::abs(g->y));
      ch.y[i + 1] = g->y;
    }
    if (change <= options.tol * scale) return sweep;
  }
  return -1;
}

}  // namespace

RefinedPoint refine_point(const PlanarSystem& system, const ComponentLabeling& labeling, const SymbolWord& word,
                          const RefineOptions& options) {
  if (word.symbols.empty()) throw std::invalid_argument("refine_point: empty word");
  for (int s : word.symbols) {
    if (s < 0 || s >= labeling.degree) throw std::invalid_argument("refine_point: symbol out of range");
  }
  const Bidisc& B = system.domain();
  const std::size_t L = word.symbols.size();
  Chain base;
  base.x.resize(L);
  base.y.assign(L, B.c2);
  base.wsol.assign(L, labeling.c1);
  base.ysol.assign(L, labeling.c2);
  for (std::size_t i = 0; i < L; ++i) base.x[i] = labeling.roots[static_cast<std::size_t>(word.symbols[i])];

  RefinedPoint out;
  Chain center = base;
  const int sweeps = solve_chain(system, center, B.c1, B.c2, options);
  const auto o = static_cast<std::size_t>(word.offset);
  out.z = {center.x[o], center.y[o]};
  out.sweeps = sweeps;
  out.converged = sweeps > 0;
  if (!out.converged) {
    out.note = "crossed-mapping iteration did not converge";
    return out;
  }

  double spread = 0.0;
  const int n = options.boundary_samples;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Complex xbc = B.c1 + std::polar(B.r1, 2.0 * std::numbers::pi * a / n);
      const Complex ybc = B.c2 + std::polar(B.r2, 2.0 * std::numbers::pi * (b + 0.5) / n);
      Chain ch = center;
      if (solve_chain(system, ch, xbc, ybc, options) < 0) {
        out.note = "boundary solve failed; radius is a lower estimate";
        continue;
      }
      spread = std::max(spread, dist(Point2{ch.x[o], ch.y[o]}, out.z));
    }
  }
  out.radius = 1.1 * spread;
  if (out.radius > 0.5 * std::min(B.r1, B.r2)) out.note = "enclosure did not shrink";

  if (word.period > 0 && options.polish_periodic) {
    const NewtonResult r = newton_periodic(system, out.z, word.period, 1e-12, 60);
    if (r.converged && dist(r.z, out.z) <= std::max(10.0 * out.radius, 1e-9 * (1.0 + norm(out.z)))) {
      out.z = r.z;
      out.polished = true;
    }
  }
  return out;
}

std::vector<Point2> sample_invariant_points(const PlanarSystem& system, const ComponentLabeling& labeling,
                                            std::size_t count, int half_width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RefineOptions opt;
  opt.boundary_samples = 0;
  std::vector<Point2> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    SymbolWord w;
    w.offset = half_width;
    for (int k = -half_width; k <= half_width; ++k) {
      w.symbols.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(labeling.degree)));
    }
    const RefinedPoint r = refine_point(system, labeling, w, opt);
    if (r.converged) out.push_back(r.z);
  }
  return out;
}

}  // namespace horseshoe
