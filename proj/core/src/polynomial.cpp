#include "horseshoe/polynomial.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace horseshoe {

Complex evaluate(std::span<const Complex> coeffs, Complex x) {
  Complex r{};
  for (std::size_t k = coeffs.size(); k-- > 0;) r = r * x + coeffs[k];
  return r;
}

std::vector<Complex> derivative(std::span<const Complex> coeffs) {
  std::vector<Complex> out;
  for (std::size_t k = 1; k < coeffs.size(); ++k) out.push_back(static_cast<double>(k) * coeffs[k]);
  if (out.empty()) out.push_back(0.0);
  return out;
}

std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs) {
  std::size_t n = coeffs.size();
  while (n > 0 && coeffs[n - 1] == Complex{}) --n;
  if (n < 2) return {};
  const std::size_t d = n - 1;
  const Complex lead = coeffs[d];
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 1; i < d; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d - 1)) = -coeffs[i] / lead;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("polynomial_roots: eigen solver failed");

  const std::vector<Complex> dcoeffs = derivative(coeffs.first(n));
  std::vector<Complex> roots;
  roots.reserve(d);
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    Complex x = solver.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      const Complex f = evaluate(coeffs.first(n), x);
      const Complex df = evaluate(dcoeffs, x);
      if (df == Complex{}) break;
      const Complex next = x - f / df;
      if (!is_finite(next)) break;
      if (std::abs(evaluate(coeffs.first(n), next)) >= std::abs(f)) break;
      x = next;
    }
    roots.push_back(x);
  }
  return roots;
}

}  // namespace horseshoe
