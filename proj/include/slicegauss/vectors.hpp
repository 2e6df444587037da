#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace slicegauss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultOrthonormalityTolerance = 1e-8;

// An element of l2(R). Either finitely supported (explicit coordinates) or an
// explicit prefix followed by a geometric tail: coordinate j (1-based) equals
// scale * ratio^j for every j past the prefix, with |ratio| < 1.
class SequenceVector {
 public:
  static SequenceVector explicit_coords(std::vector<double> coords);
  static SequenceVector geometric(std::vector<double> prefix, double scale, double ratio);

  // 1-based coordinate access, matching the sequence indexing x_1, x_2, ...
  double coordinate(std::size_t j) const;

  double squared_norm() const noexcept { return squared_norm_; }
  double norm() const;
  // Squared norm recomputed from scratch; used to validate the cached value.
  double recompute_squared_norm() const;
  // || v - v_(n) ||^2 in closed form.
  double tail_squared_norm(std::size_t n) const;

  bool has_geometric_tail() const noexcept { return geometric_; }
  // Number of explicitly stored coordinates (coords or prefix).
  std::size_t explicit_extent() const noexcept { return coords_.size(); }
  const std::vector<double>& explicit_part() const noexcept { return coords_; }
  double scale() const noexcept { return scale_; }
  double ratio() const noexcept { return ratio_; }

  // Index of the last nonzero coordinate (0 for the zero vector); nullopt
  // when the geometric tail is nonzero.
  std::optional<std::size_t> support_length() const;

 private:
  SequenceVector() = default;

  std::vector<double> coords_;
  bool geometric_ = false;
  double scale_ = 0.0;
  double ratio_ = 0.0;
  double squared_norm_ = 0.0;
};

// Exact l2 inner product, including the cross-sum of two geometric tails.
double inner_product(const SequenceVector& a, const SequenceVector& b);

struct Truncation {
  Vector coords;
  double tail_norm = 0.0;
};

// First n coordinates x_(n) together with the closed-form tail norm.
Truncation truncate(const SequenceVector& v, std::size_t n);

class OrthonormalFamily {
 public:
  OrthonormalFamily() = default;
  // Throws InvalidFamily when some |<u_i, u_j> - delta_ij| exceeds tolerance.
  explicit OrthonormalFamily(std::vector<SequenceVector> members,
                             double tolerance = kDefaultOrthonormalityTolerance);

  std::size_t gamma() const noexcept { return members_.size(); }
  const std::vector<SequenceVector>& members() const noexcept { return members_; }
  double tolerance() const noexcept { return tolerance_; }
  double orthonormality_error() const noexcept { return error_; }

  // n x gamma matrix whose columns are the truncations u_(n).
  Matrix truncations(std::size_t n) const;

 private:
  std::vector<SequenceVector> members_;
  double tolerance_ = kDefaultOrthonormalityTolerance;
  double error_ = 0.0;
};

// Orthonormalization of the columns of `columns`, in order. Output column i
// spans the same space as input columns 0..i. Throws DegenerateFamily when
// sigma_min < 1e-10 * sigma_max.
Matrix gram_schmidt(const Matrix& columns);
std::vector<Vector> gram_schmidt(std::span<const Vector> vectors);

struct FiniteFrame {
  std::size_t dimension = 0;
  Matrix columns;  // n x gamma, the truncations
  Matrix basis;    // n x gamma, orthonormal z vectors
  Matrix r;        // gamma x gamma upper triangular, columns = basis * r
};

FiniteFrame make_frame(const Matrix& columns);

// min over i of dist(v_i, span(v_j : j != i)). A single vector gives its
// norm; an empty family gives +infinity.
double separation(const Matrix& columns);
double separation(std::span<const Vector> vectors);

// Smallest m <= m_max at which the truncations (u_i)_(m) have separation at
// least tau.
std::optional<std::size_t> min_independent_truncation(std::span<const SequenceVector> family,
                                                      double tau, std::size_t m_max);

Matrix columns_from(std::span<const Vector> vectors);

}  // namespace slicegauss
