#pragma once

#include <span>
#include <vector>

#include "horseshoe/complex_rect.hpp"

namespace horseshoe {

// All complex roots of sum_k coeffs[k] x^k (leading coefficient nonzero),
// from the companion-matrix eigenvalues followed by Newton polishing.
std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs);

// Coefficients of the derivative.
std::vector<Complex> derivative(std::span<const Complex> coeffs);

Complex evaluate(std::span<const Complex> coeffs, Complex x);

}  // namespace horseshoe
