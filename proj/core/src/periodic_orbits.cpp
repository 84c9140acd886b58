#include "horseshoe/periodic_orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "horseshoe/parallel.hpp"

namespace horseshoe {

namespace {

BigInt power(int d, int n) {
  BigInt r = 1;
  for (int i = 0; i < n; ++i) r *= d;
  return r;
}

void check_dn(int d, int n) {
  if (d < 2) throw std::invalid_argument("count_cycles: degree must be >= 2");
  if (n < 1) throw std::invalid_argument("count_cycles: period must be >= 1");
}

double max_norm(const Point2& v) { return std::max(std::abs(v.x), std::abs(v.y)); }

// Singular values of a 2x2 complex matrix.
std::array<double, 2> singular_values(const Matrix2C& M) {
  const double f = std::norm(M.m00) + std::norm(M.m01) + std::norm(M.m10) + std::norm(M.m11);
  const double det = std::abs(M.det());
  const double disc = std::sqrt(std::max(0.0, f * f - 4.0 * det * det));
  const double s1 = std::sqrt(0.5 * (f + disc));
  const double s2 = s1 > 0.0 ? det / s1 : 0.0;
  return {s2, s1};
}

}  // namespace

int mobius(int n) {
  if (n < 1) throw std::invalid_argument("mobius: n must be >= 1");
  int result = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      result = -result;
    }
  }
  if (n > 1) result = -result;
  return result;
}

std::vector<int> divisors(int n) {
  std::vector<int> out;
  for (int m = 1; m <= n; ++m) {
    if (n % m == 0) out.push_back(m);
  }
  return out;
}

CycleCount count_cycles(int d, int n) {
  check_dn(d, n);
  BigInt points = 0;
  for (int m : divisors(n)) {
    const int mu = mobius(n / m);
    if (mu > 0) points += power(d, m);
    if (mu < 0) points -= power(d, m);
  }
  return {n, points, points / n};
}

CycleCount count_cycles_recursive(int d, int n) {
  check_dn(d, n);
  std::vector<BigInt> exact(static_cast<std::size_t>(n) + 1);
  for (int k = 1; k <= n; ++k) {
    BigInt v = power(d, k);
    for (int m : divisors(k)) {
      if (m < k) v -= exact[static_cast<std::size_t>(m)];
    }
    exact[static_cast<std::size_t>(k)] = v;
  }
  const BigInt& p = exact[static_cast<std::size_t>(n)];
  return {n, p, p / n};
}

std::size_t Enumeration::count_with_period(int period) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [&](const PeriodicPoint& p) { return p.period == period; }));
}

std::optional<IterateJet> iterate_jet(const PlanarSystem& system, const Point2& z, int n) {
  IterateJet jet{z, Matrix2C::identity()};
  for (int k = 0; k < n; ++k) {
    const auto J = system.jacobian(jet.value);
    const auto next = system.forward(jet.value);
    if (!J || !next) return std::nullopt;
    jet.jacobian = *J * jet.jacobian;
    jet.value = *next;
  }
  return jet;
}

std::optional<IterateJet> iterate_jet(const HenonMap& map, const Point2& z, int n) {
  IterateJet jet{z, Matrix2C::identity()};
  for (int k = 0; k < n; ++k) {
    jet.jacobian = map.jacobian(jet.value) * jet.jacobian;
    jet.value = map.step(jet.value);
    if (!jet.value.finite()) return std::nullopt;
  }
  if (!std::isfinite(std::abs(jet.jacobian.m00) + std::abs(jet.jacobian.m01) + std::abs(jet.jacobian.m10) +
                     std::abs(jet.jacobian.m11))) {
    return std::nullopt;
  }
  return jet;
}

namespace {

template <typename Jet>
NewtonResult newton_impl(Jet jet_of, Point2 z, double tol, int max_iterations) {
  NewtonResult out;
  out.z = z;
  auto g_of = [&](const Point2& w) -> std::optional<std::pair<Point2, Matrix2C>> {
    const auto jet = jet_of(w);
    if (!jet) return std::nullopt;
    return std::pair{jet->value - w, jet->jacobian - Matrix2C::identity()};
  };
  auto cur = g_of(z);
  if (!cur) return out;
  double res = max_norm(cur->first);
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it;
    const Matrix2C& DG = cur->second;
    if (std::abs(DG.det()) == 0.0) break;
    const Point2 step = DG.inverse().apply(cur->first);
    // Backtracking: halve the step until the residual decreases.
    double t = 1.0;
    bool moved = false;
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      const Point2 trial{z.x - t * step.x, z.y - t * step.y};
      auto next = g_of(trial);
      if (next) {
        const double r = max_norm(next->first);
        if (r < res || (res <= tol && r <= res * 1.0000001)) {
          z = trial;
          cur = next;
          const bool tiny = max_norm(Point2{t * step.x, t * step.y}) <= 1e-15 * (1.0 + max_norm(z));
          res = r;
          moved = true;
          if (res <= tol && tiny) it = max_iterations;
          break;
        }
      }
    }
    if (!moved) break;
    if (res <= tol * 1e-3) break;
  }
  out.z = z;
  out.residual = res;
  out.converged = res <= tol;
  const auto sv = singular_values(cur->second);
  out.min_singular_ratio = sv[1] > 0.0 ? sv[0] / sv[1] : 0.0;
  return out;
}

}  // namespace

NewtonResult newton_periodic(const PlanarSystem& system, Point2 z, int n, double tol, int max_iterations) {
  if (n < 1) throw std::invalid_argument("newton_periodic: period must be >= 1");
  return newton_impl([&](const Point2& w) { return iterate_jet(system, w, n); }, z, tol, max_iterations);
}

NewtonResult newton_periodic(const HenonMap& map, Point2 z, int n, double tol, int max_iterations) {
  if (n < 1) throw std::invalid_argument("newton_periodic: period must be >= 1");
  return newton_impl([&](const Point2& w) { return iterate_jet(map, w, n); }, z, tol, max_iterations);
}

int minimal_period(const HenonMap& map, const Point2& z, int n, double tol) {
  for (int m : divisors(n)) {
    if (m == n) return n;
    const auto jet = iterate_jet(map, z, m);
    if (jet && max_norm(jet->value - z) <= tol) return m;
  }
  return n;
}

Enumeration enumerate_periodic(const HenonMap& map, int n, const Bidisc& B, const EnumerationOptions& options) {
  if (n < 1) throw std::invalid_argument("enumerate_periodic: period must be >= 1");
  if (options.grid < 1) throw std::invalid_argument("enumerate_periodic: grid must be >= 1");
  if (!(options.tol > 0.0)) throw std::invalid_argument("enumerate_periodic: tol must be positive");
  const int g = options.grid;
  const double dedup = std::max(10.0 * options.tol, 1e-8);
  // Imaginary offsets let Newton leave the real plane when the roots are complex.
  const double off_x = 1e-3 * B.r1 * 0.7548776662466927;
  const double off_y = 1e-3 * B.r2 * 0.5698402909980532;

  std::vector<std::optional<PeriodicPoint>> found(static_cast<std::size_t>(g) * static_cast<std::size_t>(g));
  parallel_for(g, resolve_workers(options.workers), [&](int j) {
    for (int i = 0; i < g; ++i) {
      const double u = -1.0 + (2.0 * i + 1.0) / g;
      const double v = -1.0 + (2.0 * j + 1.0) / g;
      const Point2 seed{B.c1 + Complex{u * B.r1, off_x}, B.c2 + Complex{v * B.r2, off_y}};
      const NewtonResult r = newton_periodic(map, seed, n, options.tol, options.max_iterations);
      if (!r.converged || !B.contains(r.z, 1e-9 * std::max(B.r1, B.r2))) continue;
      PeriodicPoint p;
      p.z = r.z;
      p.residual = r.residual;
      p.multiple_suspect = r.min_singular_ratio < 1e-8;
      found[static_cast<std::size_t>(j) * static_cast<std::size_t>(g) + static_cast<std::size_t>(i)] = p;
    }
  });

  Enumeration out;
  out.n = n;
  out.seeds = static_cast<long>(g) * g;
  std::vector<PeriodicPoint> roots;
  for (auto& f : found) {
    if (f) roots.push_back(*f);
  }
  out.converged = static_cast<long>(roots.size());
  auto key = [](const PeriodicPoint& p) {
    return std::array<double, 4>{p.z.x.real(), p.z.x.imag(), p.z.y.real(), p.z.y.imag()};
  };
  std::sort(roots.begin(), roots.end(), [&](const PeriodicPoint& l, const PeriodicPoint& r) { return key(l) < key(r); });
  for (const PeriodicPoint& p : roots) {
    bool dup = false;
    for (auto it = out.points.rbegin(); it != out.points.rend(); ++it) {
      if (p.z.x.real() - it->z.x.real() > dedup) break;
      if (dist(p.z, it->z) <= dedup) {
        dup = true;
        // Keep the better-converged representative.
        if (p.residual < it->residual) *it = p;
        break;
      }
    }
    if (!dup) out.points.push_back(p);
  }
  for (PeriodicPoint& p : out.points) {
    p.period = minimal_period(map, p.z, n, dedup);
    const auto jet = iterate_jet(map, p.z, p.period);
    if (jet) p.eigenvalues = jet->jacobian.eigenvalues();
    if (p.multiple_suspect) ++out.flagged;
  }
  return out;
}

void write_cycles_csv(std::ostream& out, int d, int max_period) {
  out << "period,points,cycles\n";
  for (int n = 1; n <= max_period; ++n) {
    const CycleCount c = count_cycles(d, n);
    out << n << ',' << c.points << ',' << c.cycles << '\n';
  }
}

void write_periodic_csv(std::ostream& out, const Enumeration& e) {
  out << "period,re(x),im(x),re(y),im(y),residual,re(mu),im(mu),re(lambda),im(lambda),multiple\n";
  for (const PeriodicPoint& p : e.points) {
    out << p.period << ',' << format_double(p.z.x.real()) << ',' << format_double(p.z.x.imag()) << ','
        << format_double(p.z.y.real()) << ',' << format_double(p.z.y.imag()) << ',' << format_double(p.residual) << ','
        << format_double(p.eigenvalues[0].real()) << ',' << format_double(p.eigenvalues[0].imag()) << ','
        << format_double(p.eigenvalues[1].real()) << ',' << format_double(p.eigenvalues[1].imag()) << ','
        << (p.multiple_suspect ? 1 : 0) << '\n';
  }
}

}  // namespace horseshoe
