#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "slicegauss/integrands.hpp"
#include "slicegauss/vectors.hpp"

namespace slicegauss {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1].
QuadratureRule gauss_legendre(std::size_t order);
// Gauss-Hermite for the standard normal: sum_i w_i f(x_i) ~ E f(Z), weights sum to 1.
QuadratureRule gauss_hermite(std::size_t order);

// log( Gamma(x + h) / (Gamma(x) * x^h) ), x > 0, h >= 0. Accurate in the
// regime x >> h where the two log-Gamma terms nearly cancel.
double log_gamma_ratio_scaled(double x, double h);

struct DisintegrationCoefficients {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t gamma = 0;
  double a_nk = 1.0;
  double b_nk = 1.0;
  double log_a_nk = 0.0;
  double log_b_nk = 0.0;
};

// a_{n,k} = Gamma((n-k)/2 + (k-gamma)/2) / (Gamma((n-k)/2) ((n-k)/2)^((k-gamma)/2))
// b_{n,k} = (1 - k/n)^((k-gamma)/2)
// Requires n > k >= gamma; throws InvalidDimensions otherwise.
DisintegrationCoefficients disintegration_coefficients(std::size_t n, std::size_t k,
                                                       std::size_t gamma);

struct QuadratureOptions {
  // Refinement stops once successive estimates differ by <= tol * max(1, |I|).
  double tol = 1e-10;
  std::size_t initial_order = 8;
  std::size_t max_order = 128;
};

using BallFunction = std::function<double(std::span<const double>)>;

// Integral over B_k(a) of inner(x) * a / sqrt(a^2 - ||x||^2). The radial
// coordinate is substituted as ||x|| = a sin(phi), which cancels the boundary
// singularity. Requires N > k >= 1 and k <= 3.
double disintegrate_sphere_integral(std::size_t big_n, std::size_t k, double a,
                                    const BallFunction& inner, const QuadratureOptions& options = {});

// Normalized surface integral of f(x_1..x_k) over S^{n-1}(sqrt n) intersected
// with the orthogonal complement of the family, for families supported in
// the first k coordinates. Reduces to a (k - gamma)-dimensional ball integral
// against (1 - |y|^2/n)^((n-k-2)/2). Requires gamma <= k < n and k - gamma <= 3.
double great_circle_integral_quadrature(std::size_t n, const OrthonormalFamily& family,
                                        const Integrand& f, const QuadratureOptions& options = {});

// Orthonormal basis (columns) of the complement of span(columns) in R^rows.
Matrix orthonormal_complement(const Matrix& columns);

}  // namespace slicegauss
