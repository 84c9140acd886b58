#include "horseshoe/henon_map.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <regex>
#include <sstream>

namespace horseshoe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Rectangle enclosing the arc of the circle (center, radius) between
// angles t0 < t1: endpoint hull inflated by the sagitta.
ComplexRect arc_enclosure(Complex center, double radius, double t0, double t1) {
  const Complex e0 = center + std::polar(radius, t0);
  const Complex e1 = center + std::polar(radius, t1);
  const double half = 0.5 * (t1 - t0);
  const double sagitta = radius * (1.0 - std::cos(half)) * 1.01 + 4.0 * std::numeric_limits<double>::epsilon() * (radius + std::abs(center));
  return ComplexRect::from_bounds(Interval::down(std::min(e0.real(), e1.real()) - sagitta),
                                  Interval::up(std::max(e0.real(), e1.real()) + sagitta),
                                  Interval::down(std::min(e0.imag(), e1.imag()) - sagitta),
                                  Interval::up(std::max(e0.imag(), e1.imag()) + sagitta));
}

Box2 checked(const Box2& b) {
  if (!b.is_finite()) throw DivergedError("box image diverged");
  return b;
}

double abs_up(Complex z) { return hypot_up(z.real(), z.imag()); }

}  // namespace

HenonMap::HenonMap(std::vector<Complex> coeffs, Complex a) : coeffs_(std::move(coeffs)), a_(a) {
  while (coeffs_.size() > 1 && coeffs_.back() == Complex{}) coeffs_.pop_back();
  if (coeffs_.size() < 3) throw std::invalid_argument("HenonMap: polynomial degree must be at least 2");
  if (a_ == Complex{}) throw std::invalid_argument("HenonMap: a must be nonzero");
  for (const Complex& k : coeffs_) {
    if (!is_finite(k)) throw std::invalid_argument("HenonMap: non-finite coefficient");
  }
  if (!is_finite(a_)) throw std::invalid_argument("HenonMap: non-finite a");
}

HenonMap HenonMap::normal_form(Complex a, Complex c, int degree) {
  if (degree < 2) throw std::invalid_argument("HenonMap: polynomial degree must be at least 2");
  std::vector<Complex> k(static_cast<std::size_t>(degree) + 1, Complex{});
  k.front() = c;
  k.back() = 1.0;
  return {std::move(k), a};
}

bool HenonMap::is_normal_form() const {
  if (leading() != Complex{1.0, 0.0}) return false;
  for (std::size_t k = 1; k + 1 < coeffs_.size(); ++k) {
    if (coeffs_[k] != Complex{}) return false;
  }
  return true;
}

std::string HenonMap::descriptor() const {
  std::ostringstream out;
  if (is_normal_form()) {
    out << "henon d=" << degree() << " a=" << format_complex(a_) << " c=" << format_complex(c());
    return out.str();
  }
  out << "poly [";
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (k) out << ',';
    out << format_complex(coeffs_[k]);
  }
  out << "] a=" << format_complex(a_);
  return out.str();
}

Complex HenonMap::p(Complex x) const {
  Complex r = coeffs_.back();
  for (std::size_t k = coeffs_.size() - 1; k-- > 0;) r = r * x + coeffs_[k];
  return r;
}

Complex HenonMap::dp(Complex x) const {
  const std::size_t d = coeffs_.size() - 1;
  Complex r = static_cast<double>(d) * coeffs_[d];
  for (std::size_t k = d - 1; k >= 1; --k) r = r * x + static_cast<double>(k) * coeffs_[k];
  return r;
}

ComplexRect HenonMap::p(const ComplexRect& x) const {
  if (is_normal_form() && degree() == 2) return sqr(x) + ComplexRect{c()};
  ComplexRect r{coeffs_.back()};
  for (std::size_t k = coeffs_.size() - 1; k-- > 0;) r = r * x + ComplexRect{coeffs_[k]};
  return r;
}

ComplexRect HenonMap::dp(const ComplexRect& x) const {
  const std::size_t d = coeffs_.size() - 1;
  ComplexRect r{static_cast<double>(d) * coeffs_[d]};
  for (std::size_t k = d - 1; k >= 1; --k) {
    r = r * x + ComplexRect{static_cast<double>(k) * coeffs_[k]};
  }
  return r;
}

Point2 HenonMap::apply(const Point2& z) const {
  if (!z.finite()) throw std::invalid_argument("apply: non-finite input");
  const Point2 r = step(z);
  if (!r.finite()) throw DivergedError("apply: orbit diverged");
  return r;
}

Point2 HenonMap::apply_inverse(const Point2& z) const {
  if (!z.finite()) throw std::invalid_argument("apply_inverse: non-finite input");
  const Point2 r = step_inverse(z);
  if (!r.finite()) throw DivergedError("apply_inverse: orbit diverged");
  return r;
}

Box2 HenonMap::apply(const Box2& b) const {
  return checked({p(b.x) - ComplexRect{a_} * b.y, b.x});
}

Box2 HenonMap::apply_inverse(const Box2& b) const {
  // (p(y) - x) / a = (p(y) - x) * (1/a); 1/a enclosed by a tiny rectangle.
  const Complex inv = 1.0 / a_;
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(inv);
  const ComplexRect inv_rect = ComplexRect::around(inv, slack);
  return checked({b.y, (p(b.y) - b.x) * inv_rect});
}

Matrix2C HenonMap::jacobian(const Point2& z) const { return {dp(z.x), -a_, 1.0, 0.0}; }

Matrix2Rect HenonMap::jacobian(const Box2& b) const {
  return {dp(b.x), ComplexRect{-a_}, ComplexRect{Complex{1.0}}, ComplexRect{Complex{0.0}}};
}

Matrix2C HenonMap::jacobian_inverse(const Point2& z) const {
  return {0.0, 1.0, -1.0 / a_, dp(z.y) / a_};
}

Bidisc::Bidisc(Complex center1, Complex center2, double radius1, double radius2)
    : c1(center1), c2(center2), r1(radius1), r2(radius2) {
  if (!(r1 > 0.0 && r2 > 0.0)) throw std::invalid_argument("Bidisc: radii must be positive");
}

double escape_radius(const HenonMap& map) {
  const double abs_a = std::abs(map.a());
  auto formula = [&](double c) { return 0.5 * (1.0 + abs_a + std::sqrt((1.0 + abs_a) * (1.0 + abs_a) + 4.0 * c)); };
  if (map.is_normal_form()) return formula(std::abs(map.c()));

  const auto& k = map.coeffs();
  const int d = map.degree();
  double lower_sum = 0.0;
  for (int i = 0; i < d; ++i) lower_sum += std::abs(k[static_cast<std::size_t>(i)]);
  const double lead = std::abs(map.leading());
  // g(R) > 0 guarantees |p(x)| - |a| R > R on |x| = R.
  auto g = [&](double R) {
    double s = 0.0;
    double pw = 1.0;
    for (int i = 0; i < d; ++i) {
      s += std::abs(k[static_cast<std::size_t>(i)]) * pw;
      pw *= R;
    }
    return lead * pw - s - (1.0 + abs_a) * R;
  };
  const double hi = 1.0 + (lower_sum + 1.0 + abs_a) / lead;
  double last_negative = 0.0;
  constexpr int kScan = 4000;
  for (int i = 0; i <= kScan; ++i) {
    const double R = hi * i / kScan;
    if (g(R) <= 0.0) last_negative = R;
  }
  double lo = last_negative;
  double up = std::min(hi, last_negative + hi / kScan);
  for (int it = 0; it < 200 && up - lo > 1e-15 * up; ++it) {
    const double m = 0.5 * (lo + up);
    (g(m) <= 0.0 ? lo : up) = m;
  }
  return std::max(formula(lower_sum), up);
}

namespace {

// Lower bound of |p(x) - c1 - a*c2| - |a| r2 - r1 over an arc rectangle:
// positive means no point of F(arc x D2) has first coordinate in D1.
double slice_separation(const HenonMap& map, const Bidisc& B, const ComplexRect& arc) {
  const ComplexRect v = map.p(arc) - ComplexRect{B.c1 + map.a() * B.c2};
  return Interval::down(Interval::down(v.abs_lower() - abs_up(map.a()) * B.r2) - B.r1);
}

double slice_separation_point(const HenonMap& map, const Bidisc& B, Complex x) {
  return std::abs(map.p(x) - B.c1 - map.a() * B.c2) - std::abs(map.a()) * B.r2 - B.r1;
}

HenonLikeCheck check_horizontal(const HenonMap& map, const Bidisc& B, int samples) {
  HenonLikeCheck out;
  double margin = std::numeric_limits<double>::infinity();
  bool definite_fail = false;
  bool undecided = false;
  const double tol = 1e-12 * (1.0 + B.r1 + B.r2);
  for (int k = 0; k < samples; ++k) {
    const double t0 = kTwoPi * k / samples;
    const double t1 = kTwoPi * (k + 1) / samples;
    const double tm = 0.5 * (t0 + t1);
    // F(dD1 x D2) avoids the closed bidisc.
    {
      const double sep = slice_separation(map, B, arc_enclosure(B.c1, B.r1, t0, t1));
      margin = std::min(margin, sep);
      if (sep <= 0.0) {
        if (slice_separation_point(map, B, B.c1 + std::polar(B.r1, tm)) < -tol) {
          definite_fail = true;
        } else {
          undecided = true;
        }
      }
    }
    // F(closed B) avoids D1 x dD2: x on dD2 inside D1 needs |pi1 F| > r1.
    {
      const ComplexRect arc = arc_enclosure(B.c2, B.r2, t0, t1);
      const double outside_d1 = Interval::down((arc - ComplexRect{B.c1}).abs_lower() - B.r1);
      const double sep = std::max(outside_d1, slice_separation(map, B, arc));
      margin = std::min(margin, sep);
      if (sep <= 0.0) {
        const Complex x = B.c2 + std::polar(B.r2, tm);
        if (std::abs(x - B.c1) < B.r1 - tol && slice_separation_point(map, B, x) < -tol) {
          definite_fail = true;
        } else {
          undecided = true;
        }
      }
    }
  }
  out.margin = margin;
  if (definite_fail) {
    out.verdict = Verdict::no;
    return out;
  }
  if (undecided) {
    out.verdict = Verdict::unknown;
    return out;
  }
  out.degree = boundary_degree(map, B, B.c2, samples);
  out.verdict = out.degree == map.degree() ? Verdict::yes : Verdict::no;
  return out;
}

// Vertical orientation: B ∩ F(D1 x dD2) = ∅ and F(B) ∩ (dD1 x D2) = ∅.
// The x-disc is tiled with rectangles; y runs over boundary arcs or the
// full disc D2 (exactly, through its center and radius).
HenonLikeCheck check_vertical(const HenonMap& map, const Bidisc& B, int samples) {
  HenonLikeCheck out;
  const int tiles = 64;
  const int arcs = std::max(16, samples / 16);
  const double abs_a = std::abs(map.a());
  double margin = std::numeric_limits<double>::infinity();
  bool undecided = false;
  bool definite_fail = false;
  double global_lo = std::numeric_limits<double>::infinity();
  double global_hi = 0.0;
  bool seen_inside = false;
  bool seen_outside = false;
  const double tol = 1e-12 * (1.0 + B.r1 + B.r2);
  for (int i = 0; i < tiles; ++i) {
    for (int j = 0; j < tiles; ++j) {
      const double re0 = B.c1.real() - B.r1 + 2.0 * B.r1 * i / tiles;
      const double im0 = B.c1.imag() - B.r1 + 2.0 * B.r1 * j / tiles;
      const ComplexRect cell = ComplexRect::from_bounds(re0, re0 + 2.0 * B.r1 / tiles, im0, im0 + 2.0 * B.r1 / tiles);
      if ((cell - ComplexRect{B.c1}).abs_lower() > B.r1) continue;
      if ((cell - ComplexRect{B.c2}).abs_lower() > B.r2) continue;  // second coordinate of F leaves D2
      const ComplexRect px = map.p(cell) - ComplexRect{B.c1};
      for (int k = 0; k < arcs; ++k) {
        const ComplexRect arc = arc_enclosure(B.c2, B.r2, kTwoPi * k / arcs, kTwoPi * (k + 1) / arcs);
        const double sep = Interval::down((px - ComplexRect{map.a()} * arc).abs_lower() - B.r1);
        margin = std::min(margin, sep);
        if (sep <= 0.0) {
          const Complex x = cell.mid();
          const Complex y = B.c2 + std::polar(B.r2, kTwoPi * (k + 0.5) / arcs);
          if (std::abs(x - B.c1) < B.r1 - tol && std::abs(x - B.c2) < B.r2 - tol &&
              std::abs(map.p(x) - map.a() * y - B.c1) < B.r1 - tol) {
            definite_fail = true;
          } else {
            undecided = true;
          }
        }
      }
      const Complex center_val = map.p(cell.mid()) - B.c1 - map.a() * B.c2;
      global_lo = std::min(global_lo, Interval::down((px - ComplexRect{map.a() * B.c2}).abs_lower() - abs_a * B.r2));
      global_hi = std::max(global_hi, (px - ComplexRect{map.a() * B.c2}).abs_upper() + abs_a * B.r2);
      if (std::abs(cell.mid() - B.c1) < B.r1 && std::abs(cell.mid() - B.c2) < B.r2) {
        if (std::abs(center_val) < B.r1 - tol) seen_inside = true;
        if (std::abs(center_val) > B.r1 + tol) seen_outside = true;
      }
    }
  }
  // |pi1 F| must never equal r1 on the connected set (D1 ∩ D2) x D2.
  if (global_lo > B.r1 || global_hi < B.r1) {
    margin = std::min(margin, std::max(global_lo - B.r1, B.r1 - global_hi));
  } else if (seen_inside && seen_outside) {
    definite_fail = true;
  } else {
    undecided = true;
  }
  out.margin = margin;
  out.verdict = definite_fail ? Verdict::no : (undecided ? Verdict::unknown : Verdict::yes);
  return out;
}

}  // namespace

HenonLikeCheck check_quasi_henon_like(const HenonMap& map, const Bidisc& B, Orientation orientation,
                                      int samples) {
  if (samples < 8) throw std::invalid_argument("check_quasi_henon_like: too few samples");
  return orientation == Orientation::horizontal ? check_horizontal(map, B, samples)
                                                : check_vertical(map, B, samples);
}

int boundary_degree(const HenonMap& map, const Bidisc& B, Complex y, int samples) {
  const double scale = std::abs(map.p(B.c1 + B.r1)) + std::abs(map.a() * y) + B.r1;
  for (int n = samples; n <= (1 << 20); n *= 2) {
    bool resample = false;
    double total = 0.0;
    Complex prev = map.p(B.c1 + B.r1) - map.a() * y - B.c1;
    if (std::abs(prev) < 1e-9 * scale) resample = true;
    for (int k = 1; k <= n && !resample; ++k) {
      const Complex x = B.c1 + std::polar(B.r1, kTwoPi * k / n);
      const Complex cur = map.p(x) - map.a() * y - B.c1;
      if (std::abs(cur) < 1e-9 * scale) {
        resample = true;
        break;
      }
      const double step = std::arg(cur / prev);
      if (std::fabs(step) > 0.5 * std::numbers::pi) {
        resample = true;
        break;
      }
      total += step;
      prev = cur;
    }
    if (!resample) return static_cast<int>(std::lround(total / kTwoPi));
  }
  throw std::runtime_error("boundary_degree: boundary image passes through the base point");
}

Complex parse_complex(std::string_view text) {
  static const std::regex kFull(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([+-]\s*(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)\s*i\s*$)");
  static const std::regex kReal(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*$)");
  static const std::regex kImag(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)\s*i\s*$)");
  const std::string s(text);
  std::smatch m;
  auto to_double = [](std::string t) {
    t.erase(std::remove(t.begin(), t.end(), ' '), t.end());
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return std::stod(t);
  };
  if (std::regex_match(s, m, kFull)) return {to_double(m[1].str()), to_double(m[2].str())};
  if (std::regex_match(s, m, kReal)) return {to_double(m[1].str()), 0.0};
  if (std::regex_match(s, m, kImag)) return {0.0, to_double(m[1].str())};
  throw std::invalid_argument("malformed complex literal: '" + s + "'");
}

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  // Shortest representation that round-trips.
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string format_complex(Complex z) {
  const double im = z.imag() == 0.0 ? 0.0 : z.imag();
  std::string out = format_double(z.real());
  out += std::signbit(im) ? "-" : "+";
  out += format_double(std::fabs(im));
  out += 'i';
  return out;
}

HenonMap HenonMap::parse(std::string_view descriptor) {
  const std::string s(descriptor);
  std::istringstream in(s);
  std::string kind;
  in >> kind;
  if (kind == "henon") {
    int d = 2;
    Complex a{1.0, 0.0};
    Complex c{};
    bool have_a = false;
    bool have_c = false;
    std::string tok;
    while (in >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("malformed map descriptor token: " + tok);
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "d") {
        d = std::stoi(val);
      } else if (key == "a") {
        a = parse_complex(val);
        have_a = true;
      } else if (key == "c") {
        c = parse_complex(val);
        have_c = true;
      } else {
        throw std::invalid_argument("unknown map descriptor key: " + key);
      }
    }
    if (!have_a || !have_c) throw std::invalid_argument("henon descriptor needs a= and c=");
    return normal_form(a, c, d);
  }
  if (kind == "poly") {
    const auto open = s.find('[');
    const auto close = s.find(']');
    if (open == std::string::npos || close == std::string::npos || close < open) {
      throw std::invalid_argument("poly descriptor needs [c0,...,cd]");
    }
    std::vector<Complex> coeffs;
    std::string list = s.substr(open + 1, close - open - 1);
    std::stringstream items(list);
    std::string item;
    while (std::getline(items, item, ',')) coeffs.push_back(parse_complex(item));
    const std::string rest = s.substr(close + 1);
    const auto apos = rest.find("a=");
    if (apos == std::string::npos) throw std::invalid_argument("poly descriptor needs a=");
    std::string aval = rest.substr(apos + 2);
    aval = aval.substr(0, aval.find(' '));
    return {std::move(coeffs), parse_complex(aval)};
  }
  throw std::invalid_argument("unknown map descriptor kind: '" + kind + "'");
}

}  // namespace horseshoe
