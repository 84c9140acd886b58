#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "horseshoe/henon_map.hpp"
#include "horseshoe/system.hpp"

namespace horseshoe {

using BigInt = boost::multiprecision::cpp_int;

struct CycleCount {
  int period = 1;
  BigInt points;  // points of exact period, with multiplicity
  BigInt cycles;  // points / period
};

// Exact counts for a degree-d Hénon map via Möbius inversion of
// sum_{m | n} P(m) = d^n.
CycleCount count_cycles(int d, int n);
// The same numbers from the recursion P(n) = d^n - sum_{m | n, m < n} P(m).
CycleCount count_cycles_recursive(int d, int n);

int mobius(int n);
std::vector<int> divisors(int n);

struct PeriodicPoint {
  Point2 z;
  int period = 1;  // minimal
  double residual = 0.0;  // max-norm of F^period(z) - z
  std::array<Complex, 2> eigenvalues{};  // of d(F^period), ascending modulus
  // Jacobian of F^n - Id nearly singular at the root: multiplicity unknown.
  bool multiple_suspect = false;

  [[nodiscard]] bool is_saddle() const {
    return std::abs(eigenvalues[0]) < 1.0 && std::abs(eigenvalues[1]) > 1.0;
  }
};

struct EnumerationOptions {
  int grid = 160;  // seeds per real axis
  double tol = 1e-10;
  int max_iterations = 80;
  int workers = 0;
};

struct Enumeration {
  int n = 1;
  std::vector<PeriodicPoint> points;  // period divides n; sorted lexicographically
  long seeds = 0;
  long converged = 0;
  long flagged = 0;

  [[nodiscard]] std::size_t count_with_period(int period) const;
};

// Damped Newton on F^n(z) - z from grid x grid seeds over the real square
// spanned by B (plus a small fixed imaginary offset), keeping roots in B.
Enumeration enumerate_periodic(const HenonMap& map, int n, const Bidisc& B, const EnumerationOptions& options = {});

// F^n and its derivative along the orbit; nullopt on overflow.
struct IterateJet {
  Point2 value;
  Matrix2C jacobian;
};
std::optional<IterateJet> iterate_jet(const PlanarSystem& system, const Point2& z, int n);
std::optional<IterateJet> iterate_jet(const HenonMap& map, const Point2& z, int n);

struct NewtonResult {
  Point2 z;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double min_singular_ratio = 0.0;  // smallest / largest singular value of DG at the end
};

// Damped Newton for G(z) = F^n(z) - z.
NewtonResult newton_periodic(const PlanarSystem& system, Point2 z, int n, double tol = 1e-10,
                             int max_iterations = 80);
NewtonResult newton_periodic(const HenonMap& map, Point2 z, int n, double tol = 1e-10, int max_iterations = 80);

// Smallest divisor m of n with |F^m(z) - z| <= tol.
int minimal_period(const HenonMap& map, const Point2& z, int n, double tol);

void write_cycles_csv(std::ostream& out, int d, int max_period);
void write_periodic_csv(std::ostream& out, const Enumeration& e);

}  // namespace horseshoe
