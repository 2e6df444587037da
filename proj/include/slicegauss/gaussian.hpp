#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>

#include "slicegauss/integrands.hpp"
#include "slicegauss/vectors.hpp"

namespace slicegauss {

// Eigenvalues at or below this are treated as degenerate directions.
inline constexpr double kEigenvalueFloor = 1e-10;

// Gaussian measure on R^k with mean eta and a PSD, possibly singular,
// covariance L = V diag(lambda) V^T.
class GaussianSpec {
 public:
  // Throws InvalidCovariance when L is asymmetric beyond 1e-12 or has an
  // eigenvalue below -1e-10.
  GaussianSpec(Vector mean, Matrix covariance);

  std::size_t k() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  // Descending, clipped at zero.
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }
  std::size_t rank() const noexcept { return rank_; }
  // k x rank factor B with B B^T = L restricted to the support directions.
  Matrix support_factor() const;

 private:
  Vector mean_;
  Matrix covariance_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
  std::size_t rank_ = 0;
};

// Mean sum_i p_i (u_i)_(k) and covariance I_k - sum_i ||(u_i)_(k)||^2 P_{(u_i)_(k)}.
GaussianSpec covariance_from_family(const OrthonormalFamily& family, std::size_t k,
                                    std::span<const double> p);

// Top-left k x k block of sigma: the covariance of the first k coordinates.
Matrix marginal_covariance(const Matrix& sigma, std::size_t k);

// Samples [begin, end) of the logical stream for (spec, seed); one row per sample.
Matrix gaussian_sample_range(const GaussianSpec& spec, std::size_t begin, std::size_t end,
                             std::uint64_t seed);
Matrix gaussian_sample(const GaussianSpec& spec, std::size_t count, std::uint64_t seed,
                       unsigned threads = 1);

struct ClosedForm {};
struct HermiteQuadrature {
  std::size_t order = 64;
};
struct MonteCarlo {
  std::size_t count = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};
using ExpectationMethod = std::variant<ClosedForm, HermiteQuadrature, MonteCarlo>;

struct Expectation {
  double value = 0.0;
  double std_error = 0.0;  // zero for deterministic methods
};

// True when f is built only from cos_linear, gauss_bump, products and
// affine combinations.
bool has_closed_form(const Integrand& f);

// Integral of f against the Gaussian. Throws UnsupportedClosedForm,
// RankTooHighForQuadrature (rank > 3) or DimensionMismatch.
Expectation gaussian_expectation(const GaussianSpec& spec, const Integrand& f,
                                 const ExpectationMethod& method);

}  // namespace slicegauss
