#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "horseshoe/henon_map.hpp"
#include "horseshoe/horseshoe_cert.hpp"
#include "horseshoe/system.hpp"

namespace horseshoe {

// Hyperbolic periodic point p of period k with multipliers |mu| < 1 < |lambda|
// of d(F^k)(p) and the matching eigenvectors (unit length).
struct SaddleData {
  Point2 p;
  int period = 1;
  Complex mu;
  Complex lambda;
  Point2 eigvec_s;
  Point2 eigvec_u;
};

class NotHyperbolicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validates a candidate: Newton-polishes F^k(z) = z and rejects
// non-hyperbolic or non-minimal-period roots.
SaddleData saddle_at(const HenonMap& map, const Point2& guess, int k);

// All hyperbolic points of minimal period k found by Newton from a seed grid,
// real ones first, then by re(x).
std::vector<SaddleData> find_saddles(const HenonMap& map, int k, int grid = 48);

// The first entry of find_saddles; throws when none exists.
SaddleData find_saddle(const HenonMap& map, int k);

// Truncated power series in one variable.
using Series = std::vector<Complex>;
struct Series2 {
  Series x;
  Series y;
};

Series series_mul(const Series& a, const Series& b, std::size_t order);

// A holomorphic map of C^2 that can be applied to power series.
class SeriesMap {
 public:
  virtual ~SeriesMap() = default;
  [[nodiscard]] virtual Series2 apply(const Series2& s, std::size_t order) const = 0;
  [[nodiscard]] virtual Point2 apply(const Point2& z) const = 0;
  [[nodiscard]] virtual Matrix2C jacobian(const Point2& z) const = 0;
};

// F^k or F^-k for a Hénon map.
class HenonSeriesMap final : public SeriesMap {
 public:
  HenonSeriesMap(HenonMap map, int iterates, bool inverse);
  [[nodiscard]] Series2 apply(const Series2& s, std::size_t order) const override;
  [[nodiscard]] Point2 apply(const Point2& z) const override;
  [[nodiscard]] Matrix2C jacobian(const Point2& z) const override;

 private:
  HenonMap map_;
  int iterates_;
  bool inverse_;
};

// z -> A z + b.
class AffineSeriesMap final : public SeriesMap {
 public:
  AffineSeriesMap(Matrix2C A, Point2 b) : A_(A), b_(b) {}
  [[nodiscard]] Series2 apply(const Series2& s, std::size_t order) const override;
  [[nodiscard]] Point2 apply(const Point2& z) const override { return A_.apply(z) + b_; }
  [[nodiscard]] Matrix2C jacobian(const Point2&) const override { return A_; }

 private:
  Matrix2C A_;
  Point2 b_;
};

enum class ManifoldKind { stable, unstable };

class ResonanceError : public std::runtime_error {
 public:
  ResonanceError(const std::string& what, int order) : std::runtime_error(what), order_(order) {}
  [[nodiscard]] int order() const { return order_; }

 private:
  int order_;
};

// sigma(t) = sum_n coeffs[n] t^n with G(sigma(t)) = sigma(rate * t), where
// G = F^k, rate = lambda for the unstable manifold and G = F^-k,
// rate = 1/mu for the stable one.
struct ManifoldParam {
  ManifoldKind which = ManifoldKind::unstable;
  std::vector<Point2> coeffs;
  Complex rate;
  double valid_radius = 0.0;
  double residual = 0.0;  // largest functional-equation residual on |t| <= valid_radius

  [[nodiscard]] Point2 operator()(Complex t) const;
  [[nodiscard]] Point2 derivative(Complex t) const;
};

// Solves (DG(p) - rate^n I) sigma_n = -R_n order by order. The eigenvector
// is rescaled so the coefficients neither grow nor decay geometrically.
ManifoldParam parametrize(const SeriesMap& G, const Point2& p, const Point2& eigvec, Complex rate,
                          ManifoldKind which, int order, double residual_tol = 1e-9);
ManifoldParam parametrize_manifold(const HenonMap& map, const SaddleData& saddle, ManifoldKind which,
                                   int order = 30);

// Straightened coordinates near p: phi(u, s) = sigma_u(u) + sigma_s(s) - p.
class ManifoldChart {
 public:
  ManifoldChart(ManifoldParam unstable, ManifoldParam stable, Point2 p);
  [[nodiscard]] Point2 to_space(Complex u, Complex s) const;
  [[nodiscard]] Matrix2C derivative(Complex u, Complex s) const;  // columns d/du, d/ds
  // (u, s) with phi(u, s) = z; nullopt outside the region where Newton
  // converges inside the valid radii.
  [[nodiscard]] std::optional<Point2> to_chart(const Point2& z) const;
  [[nodiscard]] const ManifoldParam& unstable() const { return wu_; }
  [[nodiscard]] const ManifoldParam& stable() const { return ws_; }
  [[nodiscard]] const Point2& center() const { return p_; }

 private:
  ManifoldParam wu_;
  ManifoldParam ws_;
  Point2 p_;
  Matrix2C linear_inverse_;
};

struct HomoclinicPoint {
  Point2 q;
  double t_u = 0.0;  // W^u parameter before iteration
  int iterate = 0;   // q = F^(k * iterate)(sigma_u(t_u))
  double t_s = 0.0;  // q = sigma_s(t_s)
  double transversality_angle = 0.0;  // radians
};

class TangencySuspected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HomoclinicSearch {
  int max_iterates = 40;
  int samples_per_segment = 400;
  double angle_floor = 1e-3;
  int order = 30;
};

// Real-slice search (real map, real saddle).
HomoclinicPoint find_homoclinic(const HenonMap& map, const SaddleData& saddle, bool real_slice = true,
                                const HomoclinicSearch& search = {});
HomoclinicPoint find_homoclinic(const HenonMap& map, const SaddleData& saddle, const ManifoldChart& chart,
                                const HomoclinicSearch& search = {});

// A crossing F^(k n)(sigma_u(t)) = sigma_s(s) on the real slice.
struct Crossing {
  double t = 0.0;
  double s = 0.0;
};

// Crossings of F^(k n)(sigma_u([-rho_u, rho_u])) with sigma_s((-rho_s, rho_s)),
// sorted by |s|; the saddle itself (t = s = 0) is included.
std::vector<Crossing> crossing_parameters(const HenonMap& map, const SaddleData& saddle, const ManifoldChart& chart,
                                          int n, double rho_u, double rho_s);

// Chart frame of the horseshoe domain U = D_u,m x D_s: unit bidisc
// coordinates (u, s) map to phi(r_u u, r_s s).
struct EmbeddedBidiscChart {
  Point2 center;
  Point2 frame_u;  // d phi / du at 0, unit length
  Point2 frame_s;
  double r_u = 0.0;
  double r_s = 0.0;
};

// G = phi^-1 F^(kN) phi on the unit bidisc.
class ChartSystem final : public PlanarSystem {
 public:
  ChartSystem(HenonMap map, std::shared_ptr<const ManifoldChart> chart, double r_u, double r_s, int iterates,
              int degree);

  [[nodiscard]] std::optional<Point2> forward(const Point2& z) const override;
  [[nodiscard]] std::optional<Point2> backward(const Point2& z) const override;
  [[nodiscard]] std::optional<Matrix2C> jacobian(const Point2& z) const override;
  [[nodiscard]] std::optional<Matrix2C> jacobian_backward(const Point2& z) const override;
  [[nodiscard]] const Bidisc& domain() const override { return domain_; }
  [[nodiscard]] int degree() const override { return degree_; }
  [[nodiscard]] std::string describe() const override;

  [[nodiscard]] Point2 to_space(const Point2& z) const;
  [[nodiscard]] std::optional<Point2> from_space(const Point2& w) const;
  [[nodiscard]] int iterates() const { return iterates_; }
  [[nodiscard]] EmbeddedBidiscChart frame() const;

 private:
  HenonMap map_;
  std::shared_ptr<const ManifoldChart> chart_;
  double r_u_;
  double r_s_;
  int iterates_;
  int degree_;
  Bidisc domain_;
};

struct HorseshoeOptions {
  int max_n = 30;
  int max_m = 16;
  int extra_m = 6;  // m tried beyond the smallest admissible one
  int shrink_attempts = 8;
  int resolution = 256;
  int cone_samples = 4000;
  int boundary_samples = 48;
  int order = 30;
  double time_budget_s = 300.0;
};

struct HorseshoeResult {
  int n = 0;
  int m = 0;
  int N = 0;  // iterates of F^k
  EmbeddedBidiscChart chart;
  Certificate certificate;
  ComponentCount count;
  std::shared_ptr<const ChartSystem> system;
  std::vector<std::string> diagnostics;
  double cone_margin = 0.0;
  double boundary_margin = 0.0;
};

// Assembles U = D_u,m x D_s and N = n + m so that F^(kN) is a horseshoe of
// degree d on U; checks cones (sampled) and components in chart coordinates.
HorseshoeResult build_horseshoe(const HenonMap& map, const SaddleData& saddle, const HomoclinicPoint& q, int d,
                                const HorseshoeOptions& options = {});

}  // namespace horseshoe
