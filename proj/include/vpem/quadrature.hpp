#pragma once

#include <vector>

namespace vpem::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Physicists' Gauss-Hermite rule: sum_i w_i f(t_i) ~= integral e^{-t^2} f(t) dt.
Rule gauss_hermite(int n);

/// Gauss-Legendre rule on [a, b].
Rule gauss_legendre(int n, double a, double b);

/// Rule for averaging against a normal density with standard deviation sigma:
/// sum_i w_i f(x_i) ~= integral N(x; 0, sigma^2) f(x) dx, with sum_i w_i = 1.
Rule gaussian_average(int n, double sigma);

}  // namespace vpem::quadrature
