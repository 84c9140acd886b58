#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace horseshoe {

// Closed real interval with outward rounding. Every arithmetic result is
// widened by one ulp on each side, which covers the half-ulp error of
// round-to-nearest for + - * / and sqrt.
class Interval {
 public:
  constexpr Interval() = default;
  constexpr Interval(double point) : lo_(point), hi_(point) {}  // NOLINT
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) throw std::invalid_argument("Interval: lo > hi or NaN bound");
  }

  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const { return hi_; }
  [[nodiscard]] double mid() const { return 0.5 * lo_ + 0.5 * hi_; }
  [[nodiscard]] double width() const { return hi_ - lo_; }
  [[nodiscard]] double rad() const { return 0.5 * width(); }
  [[nodiscard]] bool contains(double v) const { return lo_ <= v && v <= hi_; }
  [[nodiscard]] bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  [[nodiscard]] bool contains_zero() const { return lo_ <= 0.0 && 0.0 <= hi_; }
  [[nodiscard]] bool is_finite() const { return std::isfinite(lo_) && std::isfinite(hi_); }

  // Smallest |v| for v in the interval.
  [[nodiscard]] double mig() const {
    if (contains_zero()) return 0.0;
    return std::min(std::fabs(lo_), std::fabs(hi_));
  }
  // Largest |v| for v in the interval.
  [[nodiscard]] double mag() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }

  static Interval hull(double a, double b) { return {std::min(a, b), std::max(a, b)}; }
  static Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_)};
  }

  friend Interval operator+(const Interval& a, const Interval& b) {
    return widened(a.lo_ + b.lo_, a.hi_ + b.hi_);
  }
  friend Interval operator-(const Interval& a, const Interval& b) {
    return widened(a.lo_ - b.hi_, a.hi_ - b.lo_);
  }
  friend Interval operator-(const Interval& a) { return raw(-a.hi_, -a.lo_); }
  friend Interval operator*(const Interval& a, const Interval& b) {
    const double p1 = a.lo_ * b.lo_;
    const double p2 = a.lo_ * b.hi_;
    const double p3 = a.hi_ * b.lo_;
    const double p4 = a.hi_ * b.hi_;
    return widened(std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4}));
  }
  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator-=(const Interval& o) { return *this = *this - o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  static Interval raw(double lo, double hi) {
    Interval r;
    r.lo_ = lo;
    r.hi_ = hi;
    return r;
  }
  static Interval widened(double lo, double hi) {
    return raw(down(lo), up(hi));
  }

 public:
  static double down(double v) { return std::nextafter(v, -std::numeric_limits<double>::infinity()); }
  static double up(double v) { return std::nextafter(v, std::numeric_limits<double>::infinity()); }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

// x^2 is tighter than x*x when the interval straddles zero.
inline Interval sqr(const Interval& x) {
  const double m = x.mig();
  const double M = x.mag();
  return {m == 0.0 ? 0.0 : Interval::down(m * m), Interval::up(M * M)};
}

inline Interval sqrt(const Interval& x) {
  if (x.hi() < 0.0) throw std::domain_error("sqrt of negative interval");
  const double lo = x.lo() <= 0.0 ? 0.0 : std::max(0.0, Interval::down(std::sqrt(x.lo())));
  return {lo, Interval::up(std::sqrt(x.hi()))};
}

// Rounded-down / rounded-up scalar helpers for one-off bounds.
inline double sqrt_down(double v) { return v <= 0.0 ? 0.0 : std::max(0.0, Interval::down(std::sqrt(v))); }
inline double sqrt_up(double v) { return v <= 0.0 ? 0.0 : Interval::up(std::sqrt(v)); }
inline double hypot_down(double a, double b) {
  return sqrt_down(Interval::down(Interval::down(a * a) + Interval::down(b * b)));
}
inline double hypot_up(double a, double b) {
  return sqrt_up(Interval::up(Interval::up(a * a) + Interval::up(b * b)));
}

}  // namespace horseshoe
