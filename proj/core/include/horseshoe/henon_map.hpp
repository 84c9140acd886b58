#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "horseshoe/complex_rect.hpp"
#include "horseshoe/verdict.hpp"

namespace horseshoe {

// Raised when an evaluation leaves the finite doubles.
class DivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Generalized Hénon map F(x, y) = (p(x) - a*y, x), with inverse
// F^-1(x, y) = (y, (p(y) - x) / a).
class HenonMap {
 public:
  // coeffs[k] multiplies x^k; the last entry is the leading coefficient.
  HenonMap(std::vector<Complex> coeffs, Complex a);

  // Quadratic (or degree-d) normal form x^d + c - a*y.
  static HenonMap normal_form(Complex a, Complex c, int degree = 2);

  // Parses `henon d=2 a=1+0i c=-10+0i` or `poly [c0,c1,...,cd] a=1+0i`.
  static HenonMap parse(std::string_view descriptor);

  [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  [[nodiscard]] Complex a() const { return a_; }
  [[nodiscard]] const std::vector<Complex>& coeffs() const { return coeffs_; }
  [[nodiscard]] Complex leading() const { return coeffs_.back(); }
  // Constant coefficient; the parameter c of the normal form.
  [[nodiscard]] Complex c() const { return coeffs_.front(); }
  // True when p(x) = x^d + c.
  [[nodiscard]] bool is_normal_form() const;
  // Canonical descriptor, round-trips through parse() exactly.
  [[nodiscard]] std::string descriptor() const;

  [[nodiscard]] Complex p(Complex x) const;
  [[nodiscard]] Complex dp(Complex x) const;
  [[nodiscard]] ComplexRect p(const ComplexRect& x) const;
  [[nodiscard]] ComplexRect dp(const ComplexRect& x) const;

  // Point evaluation; throws DivergedError on a non-finite result.
  [[nodiscard]] Point2 apply(const Point2& z) const;
  [[nodiscard]] Point2 apply_inverse(const Point2& z) const;
  // Unchecked variants for inner loops; caller inspects finite().
  [[nodiscard]] Point2 step(const Point2& z) const { return {p(z.x) - a_ * z.y, z.x}; }
  [[nodiscard]] Point2 step_inverse(const Point2& z) const { return {z.y, (p(z.y) - z.x) / a_}; }

  // Outward enclosures of the image of a box.
  [[nodiscard]] Box2 apply(const Box2& b) const;
  [[nodiscard]] Box2 apply_inverse(const Box2& b) const;

  // [[p'(x), -a], [1, 0]].
  [[nodiscard]] Matrix2C jacobian(const Point2& z) const;
  [[nodiscard]] Matrix2Rect jacobian(const Box2& b) const;
  [[nodiscard]] Matrix2C jacobian_inverse(const Point2& z) const;

 private:
  std::vector<Complex> coeffs_;
  Complex a_;
};

// Bidisc D1 x D2 with D1 = D(c1, r1), D2 = D(c2, r2).
struct Bidisc {
  Complex c1{};
  Complex c2{};
  double r1 = 1.0;
  double r2 = 1.0;

  Bidisc() = default;
  Bidisc(Complex center1, Complex center2, double radius1, double radius2);
  static Bidisc square(double radius) { return {0.0, 0.0, radius, radius}; }

  // Closed bidisc membership with an absolute slack.
  [[nodiscard]] bool contains(const Point2& z, double slack = 0.0) const {
    return std::abs(z.x - c1) <= r1 + slack && std::abs(z.y - c2) <= r2 + slack;
  }
  [[nodiscard]] Box2 bounding_box() const {
    return {ComplexRect::around(c1, r1), ComplexRect::around(c2, r2)};
  }
  // Horizontal slice H_y = D1 x {y} and vertical slice V_x = {x} x D2.
  struct Slice {
    Complex center;  // center of the free disc
    double radius;
    Complex fixed;  // the frozen coordinate
    bool horizontal;
    [[nodiscard]] Point2 at(Complex free) const {
      return horizontal ? Point2{free, fixed} : Point2{fixed, free};
    }
  };
  [[nodiscard]] Slice horizontal_slice(Complex y) const { return {c1, r1, y, true}; }
  [[nodiscard]] Slice vertical_slice(Complex x) const { return {c2, r2, x, false}; }
};

enum class Orientation { horizontal, vertical };

// Smallest admissible radius R0 = (1 + |a| + sqrt((1 + |a|)^2 + 4|c|)) / 2.
// Any bidisc radius strictly larger than R0 makes the map Hénon-like.
// For a general polynomial, |c| is replaced by the sum of the
// non-leading coefficient moduli and R0 is raised until the escape
// inequality |p(x)| - |a| R > R holds on |x| = R.
double escape_radius(const HenonMap& map);

struct HenonLikeCheck {
  Verdict verdict = Verdict::unknown;
  // Minimum separation between boundary images and the closed bidisc.
  double margin = 0.0;
  // Winding degree of the horizontal slice maps (horizontal orientation only).
  int degree = -1;
};

// Boundary-disjointness test for the quasi-Hénon-like conditions on B,
// using `samples` boundary arcs with rigorous arc enclosures.
HenonLikeCheck check_quasi_henon_like(const HenonMap& map, const Bidisc& B, Orientation orientation,
                                      int samples = 4096);

// Winding number of x -> p(x) - a*y - c1 around 0 as x traverses the
// boundary circle of D1.
int boundary_degree(const HenonMap& map, const Bidisc& B, Complex y, int samples = 4096);

// Complex literal in `re+imi` form (also accepts `re`, `imi`, `-imi`).
Complex parse_complex(std::string_view text);
std::string format_complex(Complex z);
std::string format_double(double v);

}  // namespace horseshoe
