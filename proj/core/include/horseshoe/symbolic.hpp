#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "horseshoe/system.hpp"

namespace horseshoe {

// Finite window of a bi-infinite word over {0, ..., d-1}. symbols[offset]
// is the symbol at index 0. period > 0 marks a periodic word whose block
// is symbols[offset .. offset + period).
struct SymbolWord {
  std::vector<int> symbols;
  int offset = 0;
  int period = 0;

  [[nodiscard]] int first_index() const { return -offset; }
  [[nodiscard]] int last_index() const { return static_cast<int>(symbols.size()) - offset - 1; }
  [[nodiscard]] int at(int k) const { return symbols.at(static_cast<std::size_t>(offset + k)); }
  [[nodiscard]] bool has(int k) const { return k >= first_index() && k <= last_index(); }

  // Left shift: index k of the result is index k + 1 of this word.
  [[nodiscard]] SymbolWord shifted() const;

  // `1011^0110`: symbols before the caret sit at negative indices.
  [[nodiscard]] std::string to_string() const;
  static SymbolWord parse(std::string_view text);

  // Repeats `block` to cover indices -before .. after; index 0 starts the block.
  static SymbolWord periodic(const std::vector<int>& block, int before, int after);

  friend bool operator==(const SymbolWord&, const SymbolWord&) = default;
};

class NotInKError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnresolvedSymbolError : public std::runtime_error {
 public:
  UnresolvedSymbolError(const std::string& what, int index) : std::runtime_error(what), index_(index) {}
  [[nodiscard]] int index() const { return index_; }

 private:
  int index_;
};

// Labels of the d components U_0, ..., U_{d-1} of G^-1(B) ∩ B. Each U_i
// meets the slice y = c2 in one disc containing exactly one root rho_i of
// pi_1 G(x, c2) = c1; the roots are ordered by real part, ties by
// imaginary part. The component of G(B) ∩ B labelled i is G(U_i).
struct ComponentLabeling {
  int degree = 2;
  Complex c1{};
  Complex c2{};
  std::vector<Complex> roots;
  // Largest allowed mismatch between a continued point and its root.
  double guard = 0.0;
};

ComponentLabeling build_labeling(const PlanarSystem& system, int resolution = 512);

// Label of z in G^-1(B) ∩ B; nullopt when z or G(z) leaves B or the
// continuation does not end at a reference root.
std::optional<int> component_label(const PlanarSystem& system, const ComponentLabeling& labeling, const Point2& z);
// Label of z in G(B) ∩ B, i.e. the label of G^-1(z).
std::optional<int> image_label(const PlanarSystem& system, const ComponentLabeling& labeling, const Point2& z);

// Symbols at indices -n_back .. n_fwd. Throws NotInKError when an iterate
// leaves B (index n_fwd also needs G^(n_fwd + 1)(z) in B) and
// UnresolvedSymbolError when a label cannot be decided.
SymbolWord itinerary(const PlanarSystem& system, const ComponentLabeling& labeling, const Point2& z, int n_back,
                     int n_fwd);

struct RefineOptions {
  int max_sweeps = 200;
  double tol = 1e-14;
  int boundary_samples = 8;  // per circle of the distinguished torus
  bool polish_periodic = true;
};

struct RefinedPoint {
  Point2 z;
  // Spread of z over boundary conditions on the distinguished torus.
  double radius = 0.0;
  bool converged = false;
  bool polished = false;
  int sweeps = 0;
  std::string note;
};

// The point whose orbit follows `word`: solves x_k = X_{s_k}(x_{k+1}, y_k),
// y_{k+1} = pi_2 G(x_k, y_k) with free ends x_(last+1) and y_first.
RefinedPoint refine_point(const PlanarSystem& system, const ComponentLabeling& labeling, const SymbolWord& word,
                          const RefineOptions& options = {});

// Points of K drawn by refining random words of half-width `half_width`.
std::vector<Point2> sample_invariant_points(const PlanarSystem& system, const ComponentLabeling& labeling,
                                            std::size_t count, int half_width, std::uint64_t seed);

// Root x of pi_1 G(x, y1) = w1 continued from a solution x0 of
// pi_1 G(x0, y0) = w0 along the straight path; nullopt on failure.
std::optional<Complex> continue_root(const PlanarSystem& system, Complex x0, Complex w0, Complex y0, Complex w1,
                                     Complex y1);

}  // namespace horseshoe
