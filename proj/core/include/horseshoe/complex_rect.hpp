#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "horseshoe/interval.hpp"

namespace horseshoe {

using Complex = std::complex<double>;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// A point of C^2.
struct Point2 {
  Complex x;
  Complex y;

  [[nodiscard]] bool finite() const { return is_finite(x) && is_finite(y); }
  friend bool operator==(const Point2&, const Point2&) = default;
  friend Point2 operator+(const Point2& a, const Point2& b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(const Point2& a, const Point2& b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(Complex s, const Point2& a) { return {s * a.x, s * a.y}; }
};

// Max-norm in C^2: max(|x|, |y|).
inline double dist(const Point2& a, const Point2& b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}
inline double norm(const Point2& a) { return std::max(std::abs(a.x), std::abs(a.y)); }

// 2x2 complex matrix, row-major.
struct Matrix2C {
  Complex m00, m01, m10, m11;

  [[nodiscard]] Complex det() const { return m00 * m11 - m01 * m10; }
  [[nodiscard]] Complex trace() const { return m00 + m11; }
  [[nodiscard]] Point2 apply(const Point2& v) const {
    return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
  }
  [[nodiscard]] Matrix2C inverse() const {
    const Complex d = det();
    if (d == Complex{}) throw std::domain_error("singular 2x2 matrix");
    return {m11 / d, -m01 / d, -m10 / d, m00 / d};
  }
  [[nodiscard]] std::array<Complex, 2> eigenvalues() const;
  static Matrix2C identity() { return {1.0, 0.0, 0.0, 1.0}; }
  friend Matrix2C operator*(const Matrix2C& a, const Matrix2C& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
  }
  friend Matrix2C operator-(const Matrix2C& a, const Matrix2C& b) {
    return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
  }
};

// Eigenvalues sorted by ascending modulus. Uses the cancellation-free form
// of the quadratic formula.
inline std::array<Complex, 2> Matrix2C::eigenvalues() const {
  const Complex t = trace();
  const Complex d = det();
  const Complex disc = std::sqrt(t * t - 4.0 * d);
  const Complex q = std::real(std::conj(t) * disc) >= 0.0 ? -0.5 * (t + disc) : -0.5 * (t - disc);
  Complex l1;
  Complex l2;
  if (q == Complex{}) {
    l1 = l2 = 0.5 * t;
  } else {
    l1 = -q;  // the large root
    l2 = d / l1;
  }
  if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);
  return {l2, l1};
}

// Rectangle in C: product of a real interval and an imaginary interval.
// All arithmetic encloses the exact image set.
struct ComplexRect {
  Interval re;
  Interval im;

  ComplexRect() = default;
  ComplexRect(Interval r, Interval i) : re(r), im(i) {}
  ComplexRect(Complex z) : re(z.real()), im(z.imag()) {}  // NOLINT
  static ComplexRect from_bounds(double re_lo, double re_hi, double im_lo, double im_hi) {
    return {Interval{re_lo, re_hi}, Interval{im_lo, im_hi}};
  }
  // Square of half-side r around c; contains the closed disc of radius r.
  static ComplexRect around(Complex c, double r) {
    return {Interval{Interval::down(c.real() - r), Interval::up(c.real() + r)},
            Interval{Interval::down(c.imag() - r), Interval::up(c.imag() + r)}};
  }

  [[nodiscard]] Complex mid() const { return {re.mid(), im.mid()}; }
  [[nodiscard]] double max_width() const { return std::max(re.width(), im.width()); }
  [[nodiscard]] bool contains(Complex z) const { return re.contains(z.real()) && im.contains(z.imag()); }
  [[nodiscard]] bool is_finite() const { return re.is_finite() && im.is_finite(); }

  // Lower bound of |z| over the rectangle.
  [[nodiscard]] double abs_lower() const { return hypot_down(re.mig(), im.mig()); }
  // Upper bound of |z| over the rectangle.
  [[nodiscard]] double abs_upper() const { return hypot_up(re.mag(), im.mag()); }

  friend ComplexRect operator+(const ComplexRect& a, const ComplexRect& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend ComplexRect operator-(const ComplexRect& a, const ComplexRect& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend ComplexRect operator-(const ComplexRect& a) { return {-a.re, -a.im}; }
  friend ComplexRect operator*(const ComplexRect& a, const ComplexRect& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
};

inline ComplexRect sqr(const ComplexRect& z) {
  return {sqr(z.re) - sqr(z.im), Interval{2.0} * z.re * z.im};
}

// Rectangle in C^2.
struct Box2 {
  ComplexRect x;
  ComplexRect y;

  [[nodiscard]] Point2 mid() const { return {x.mid(), y.mid()}; }
  [[nodiscard]] bool contains(const Point2& z) const { return x.contains(z.x) && y.contains(z.y); }
  [[nodiscard]] bool is_finite() const { return x.is_finite() && y.is_finite(); }

  // Real-coordinate access in the fixed order x.re, x.im, y.re, y.im.
  [[nodiscard]] const Interval& axis(int k) const {
    switch (k) {
      case 0: return x.re;
      case 1: return x.im;
      case 2: return y.re;
      default: return y.im;
    }
  }
  Interval& axis(int k) {
    switch (k) {
      case 0: return x.re;
      case 1: return x.im;
      case 2: return y.re;
      default: return y.im;
    }
  }
  // Widest axis; ties resolved by the axis order above.
  [[nodiscard]] int widest_axis() const {
    int best = 0;
    for (int k = 1; k < 4; ++k) {
      if (axis(k).width() > axis(best).width()) best = k;
    }
    return best;
  }
  [[nodiscard]] std::array<Box2, 2> bisect(int k) const {
    std::array<Box2, 2> halves{*this, *this};
    const Interval& a = axis(k);
    const double m = a.mid();
    halves[0].axis(k) = Interval{a.lo(), m};
    halves[1].axis(k) = Interval{m, a.hi()};
    return halves;
  }
};

// 2x2 matrix of complex rectangles (Jacobian enclosure).
struct Matrix2Rect {
  ComplexRect m00, m01, m10, m11;
};

}  // namespace horseshoe
