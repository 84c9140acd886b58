#pragma once

#include <optional>
#include <string>
#include <vector>

#include "horseshoe/henon_map.hpp"
#include "horseshoe/system.hpp"
#include "horseshoe/verdict.hpp"

namespace horseshoe {

// Constant cone field of aperture gamma in (0, 1]:
//   horizontal cones  { (u, v) : gamma |v| < |u| },
//   vertical cones    { (u, v) : |u| < gamma |v| }.
// gamma = 1 gives the unit cones |v| < |u| and |u| < |v|.
class ConeField {
 public:
  explicit ConeField(double gamma = 1.0);
  [[nodiscard]] double gamma() const { return gamma_; }

  // Sufficient bound on |p'| for a Hénon map x -> p(x) - a y: with
  // |p'(x)| > gamma + |a| / gamma the derivative maps horizontal cones
  // strictly into horizontal cones, and the same bound on |p'(y)| maps
  // vertical cones into vertical cones under the inverse.
  [[nodiscard]] double derivative_bound(double abs_a) const;

  // Exact tests on one linear map: the horizontal cone is mapped strictly
  // inside itself by M / the vertical cone by M.
  [[nodiscard]] bool maps_horizontal_inside(const Matrix2C& M) const;
  [[nodiscard]] bool maps_vertical_inside(const Matrix2C& M) const;

 private:
  double gamma_;
};

enum class CertMethod { inequality, cone_sweep, component_count, cone_sample };
std::string to_string(CertMethod m);

struct WorkCounters {
  long boxes = 0;       // cells processed
  int max_depth = 0;    // deepest bisection level reached
  long excluded = 0;    // cells discharged because the image misses the bidisc
  long proved = 0;      // cells discharged by the cone inequality
  long undecided = 0;
};

struct Certificate {
  CertMethod method = CertMethod::inequality;
  std::string map;  // descriptor
  double R = 0.0;
  double alpha = 0.0;
  double gamma = 1.0;
  double margin = 0.0;
  Verdict verdict = Verdict::unknown;
  WorkCounters work;
  double wall_ms = 0.0;
  std::vector<Box2> undecided_cells;  // capped list for diagnostics
  std::string note;

  // JSON with fixed key order: method, map, R, alpha, gamma, margin,
  // verdict, boxes, depth, wall_ms.
  [[nodiscard]] std::string to_json() const;
};

// Default alpha: slightly above 1/2 so fixed points on |x| = R0 are interior.
inline constexpr double kDefaultAlpha = 0.5 * (1.0 + 1e-9);

// R = alpha (1 + |a| + sqrt((1 + |a|)^2 + 4|c|)).
double inequality_radius(double abs_a, double abs_c, double alpha);

// Margin of the closed-form trapping inequality for x^2 + c - a y on the
// bidisc of radius R(alpha):
//   2 sqrt(|c| - R (1 + |a|)) - (gamma + |a| / gamma),
// the square root read as 0 when its argument is negative. Positive
// means both constant cone fields are trapping. Computed with outward
// rounding so a positive value is a proof.
double inequality_margin(double abs_a, double abs_c, double gamma, double alpha);

// Smallest |c| for which inequality_margin > 0 at the given (gamma, alpha).
double certified_threshold(double abs_a, double gamma, double alpha);

// Closed-form certificate; requires the quadratic normal form.
Certificate certify_inequality(const HenonMap& map, double gamma = 1.0, double alpha = kDefaultAlpha);

struct ApertureSearch {
  bool restrict_gamma_to_one = false;
  int gamma_grid = 64;
  int alpha_grid = 32;
  double alpha_max = 2.0;
  double gamma_min = 1e-3;
};

struct ApertureResult {
  double gamma = 1.0;
  double alpha = kDefaultAlpha;
  // Smallest |c| certified at (gamma, alpha) for this |a|.
  double threshold = 0.0;
  Certificate certificate;
};

// Grid plus golden-section search over (gamma, alpha) maximizing the
// inequality margin of `map`.
ApertureResult optimize_aperture(const HenonMap& map, const ApertureSearch& search = {});

// Same search minimizing the certified |c| threshold for a given |a|.
ApertureResult minimize_threshold(double abs_a, const ApertureSearch& search = {});

struct SweepOptions {
  int max_depth = 12;
  std::size_t max_reported_cells = 64;
};

// Adaptive interval sweep of the bidisc proving that the cone fields are
// F- and F^-1-trapping. Depth counts single-axis bisections of the
// bounding box of B.
Certificate certify_cone_sweep(const HenonMap& map, const Bidisc& B, const ConeField& cones,
                               const SweepOptions& options = {});

struct CriticalValueCheck {
  bool escape = false;
  // Smallest distance by which a critical value clears the relevant disc.
  double margin = 0.0;
};

// Critical values of x -> p(x) - a y (y in D2) avoid D1 and those of
// y -> (p(y) - x) / a (x in D1) avoid D2.
CriticalValueCheck critical_values_check(const HenonMap& map, const Bidisc& B);
bool critical_values_escape(const HenonMap& map, const Bidisc& B);

enum class Direction { fwd, bwd };

struct SliceCount {
  Complex fixed;  // the frozen coordinate of the slice
  int count = 0;  // -1: unresolved (zoom budget exhausted)
};

struct ComponentCount {
  Direction direction = Direction::fwd;
  std::vector<SliceCount> slices;
  // Common count when every slice agrees.
  std::optional<int> aggregate;
  std::vector<std::size_t> offending;  // slices disagreeing with the majority
  // Optional face-adjacency count on a coarse 4-real-dimensional raster.
  std::optional<int> coarse_4d;
};

struct ComponentCountOptions {
  int resolution = 512;
  // Slice positions on rings of these relative radii, 8 angles each,
  // plus the center.
  std::vector<double> rings{0.5, 0.95};
  int coarse_4d_resolution = 0;  // 0 disables
  // Zoom levels for components thinner than a pixel: pixels whose
  // linearized image may meet B are re-rastered at zoom_resolution.
  int refine_levels = 0;
  int zoom_resolution = 64;
  // Zoom windows per slice; a slice needing more is left unresolved.
  int max_zoom_windows = 256;
  int workers = 0;
};

// Raster oracle for the number of connected components of
//   fwd: F(B) ∩ B = { z in B : G^-1(z) in B }   (sliced along V_x)
//   bwd: F^-1(B) ∩ B = { z in B : G(z) in B }   (sliced along H_y)
ComponentCount component_count(const PlanarSystem& system, Direction direction,
                               const ComponentCountOptions& options = {});
ComponentCount component_count(const HenonMap& map, const Bidisc& B, Direction direction, int resolution);

// Components on the single slice through `fixed` (y = fixed for bwd,
// x = fixed for fwd), each represented by its pixel nearest the centroid.
std::vector<Complex> slice_components(const PlanarSystem& system, Direction direction, Complex fixed,
                                      const ComponentCountOptions& options = {});

struct FiberDecay {
  // diameters[n-1] = max diameter over sampled slices of the components of
  // H_y ∩ (points staying in B for n iterates).
  std::vector<double> diameters;
  std::vector<long> component_counts;  // per depth, per slice (first slice)
  int resolved_depth = 0;
  bool truncated = false;
  std::string note;
};

struct FiberDecayOptions {
  int resolution = 128;
  std::vector<Complex> slices{};  // defaults to the center of D2 and two more
  int workers = 0;
};

FiberDecay fiber_diameter_decay(const PlanarSystem& system, int depth, const FiberDecayOptions& options = {});
FiberDecay fiber_diameter_decay(const HenonMap& map, const Bidisc& B, int depth);

}  // namespace horseshoe
