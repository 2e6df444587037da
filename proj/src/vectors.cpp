#include "slicegauss/vectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slicegauss/errors.hpp"

namespace slicegauss {

namespace {

double geometric_tail_sq(double scale, double ratio, std::size_t from) {
  // sum_{j > from} (scale * ratio^j)^2
  const double r2 = ratio * ratio;
  return scale * scale * std::pow(r2, static_cast<double>(from + 1)) / (1.0 - r2);
}

double kahan_sum_sq(const std::vector<double>& xs, std::size_t begin) {
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = begin; i < xs.size(); ++i) {
    const double y = xs[i] * xs[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

SequenceVector SequenceVector::explicit_coords(std::vector<double> coords) {
  SequenceVector v;
  v.coords_ = std::move(coords);
  v.squared_norm_ = kahan_sum_sq(v.coords_, 0);
  return v;
}

SequenceVector SequenceVector::geometric(std::vector<double> prefix, double scale, double ratio) {
  if (!(std::abs(ratio) < 1.0)) {
    throw InvalidArgument("geometric tail requires |ratio| < 1, got " + error_number(ratio));
  }
  SequenceVector v;
  v.coords_ = std::move(prefix);
  v.geometric_ = true;
  v.scale_ = scale;
  v.ratio_ = ratio;
  v.squared_norm_ = kahan_sum_sq(v.coords_, 0) + geometric_tail_sq(scale, ratio, v.coords_.size());
  return v;
}

double SequenceVector::coordinate(std::size_t j) const {
  if (j == 0) throw InvalidArgument("sequence coordinates are 1-based");
  if (j <= coords_.size()) return coords_[j - 1];
  if (!geometric_) return 0.0;
  return scale_ * std::pow(ratio_, static_cast<double>(j));
}

double SequenceVector::norm() const { return std::sqrt(squared_norm_); }

double SequenceVector::recompute_squared_norm() const {
  double s = 0.0;
  for (double c : coords_) s += c * c;
  if (geometric_) s += geometric_tail_sq(scale_, ratio_, coords_.size());
  return s;
}

double SequenceVector::tail_squared_norm(std::size_t n) const {
  double s = n < coords_.size() ? kahan_sum_sq(coords_, n) : 0.0;
  if (geometric_) s += geometric_tail_sq(scale_, ratio_, std::max(n, coords_.size()));
  return s;
}

std::optional<std::size_t> SequenceVector::support_length() const {
  if (geometric_ && scale_ != 0.0 && ratio_ != 0.0) return std::nullopt;
  std::size_t last = 0;
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (coords_[i] != 0.0) last = i + 1;
  }
  return last;
}

double inner_product(const SequenceVector& a, const SequenceVector& b) {
  const std::size_t m = std::max(a.explicit_extent(), b.explicit_extent());
  double sum = 0.0;
  for (std::size_t j = 1; j <= m; ++j) sum += a.coordinate(j) * b.coordinate(j);
  if (a.has_geometric_tail() && b.has_geometric_tail()) {
    const double rr = a.ratio() * b.ratio();
    sum += a.scale() * b.scale() * std::pow(rr, static_cast<double>(m + 1)) / (1.0 - rr);
  }
  return sum;
}

Truncation truncate(const SequenceVector& v, std::size_t n) {
  if (n == 0) throw InvalidArgument("truncation length must be >= 1");
  Truncation out;
  out.coords = Vector::Zero(static_cast<Eigen::Index>(n));
  const auto& part = v.explicit_part();
  const std::size_t direct = std::min(n, part.size());
  for (std::size_t i = 0; i < direct; ++i) out.coords[static_cast<Eigen::Index>(i)] = part[i];
  if (v.has_geometric_tail() && n > part.size()) {
    double c = v.coordinate(part.size() + 1);
    for (std::size_t j = part.size() + 1; j <= n; ++j) {
      out.coords[static_cast<Eigen::Index>(j - 1)] = c;
      c *= v.ratio();
    }
  }
  out.tail_norm = std::sqrt(v.tail_squared_norm(n));
  return out;
}

OrthonormalFamily::OrthonormalFamily(std::vector<SequenceVector> members, double tolerance)
    : members_(std::move(members)), tolerance_(tolerance) {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    for (std::size_t j = i; j < members_.size(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      const double err = std::abs(inner_product(members_[i], members_[j]) - target);
      error_ = std::max(error_, err);
      if (!(err <= tolerance_)) {
        throw InvalidFamily("family is not orthonormal: |<u" + std::to_string(i + 1) + ", u" +
                            std::to_string(j + 1) + "> - " + (i == j ? "1" : "0") +
                            "| = " + error_number(err));
      }
    }
  }
}

Matrix OrthonormalFamily::truncations(std::size_t n) const {
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(members_.size()));
  for (std::size_t i = 0; i < members_.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = truncate(members_[i], n).coords;
  }
  return out;
}

namespace {

void require_well_conditioned(const Matrix& columns) {
  if (columns.cols() == 0) return;
  if (columns.rows() < columns.cols()) {
    throw DegenerateFamily("more vectors than dimensions: " + std::to_string(columns.cols()) +
                           " in R^" + std::to_string(columns.rows()));
  }
  Eigen::JacobiSVD<Matrix> svd(columns);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smax > 0.0) || smin < 1e-10 * smax) {
    throw DegenerateFamily("vectors are numerically dependent (sigma_min/sigma_max = " +
                           error_number(smax > 0.0 ? smin / smax : 0.0) + ")");
  }
}

// Modified Gram-Schmidt with one full re-orthogonalization pass.
FiniteFrame orthonormalize(const Matrix& columns) {
  require_well_conditioned(columns);
  const Eigen::Index cols = columns.cols();
  FiniteFrame frame;
  frame.dimension = static_cast<std::size_t>(columns.rows());
  frame.columns = columns;
  frame.basis = columns;
  frame.r = Matrix::Zero(cols, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    auto v = frame.basis.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = frame.basis.col(i).dot(v);
        frame.r(i, j) += c;
        v -= c * frame.basis.col(i);
      }
    }
    const double norm = v.norm();
    frame.r(j, j) = norm;
    v /= norm;
  }
  return frame;
}

}  // namespace

Matrix gram_schmidt(const Matrix& columns) { return orthonormalize(columns).basis; }

Matrix columns_from(std::span<const Vector> vectors) {
  if (vectors.empty()) return Matrix(0, 0);
  const Eigen::Index rows = vectors.front().size();
  Matrix m(rows, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != rows) throw DimensionMismatch("vectors must share one length");
    m.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  return m;
}

std::vector<Vector> gram_schmidt(std::span<const Vector> vectors) {
  const Matrix q = gram_schmidt(columns_from(vectors));
  std::vector<Vector> out;
  out.reserve(vectors.size());
  for (Eigen::Index i = 0; i < q.cols(); ++i) out.emplace_back(q.col(i));
  return out;
}

FiniteFrame make_frame(const Matrix& columns) { return orthonormalize(columns); }

double separation(const Matrix& columns) {
  const Eigen::Index count = columns.cols();
  if (count == 0) return std::numeric_limits<double>::infinity();
  if (count == 1) return columns.col(0).norm();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < count; ++i) {
    Matrix others(columns.rows(), count - 1);
    for (Eigen::Index j = 0, c = 0; j < count; ++j) {
      if (j != i) others.col(c++) = columns.col(j);
    }
    const Vector target = columns.col(i);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(others);
    const Vector coeffs = cod.solve(target);
    best = std::min(best, (target - others * coeffs).norm());
  }
  return best;
}

double separation(std::span<const Vector> vectors) { return separation(columns_from(vectors)); }

std::optional<std::size_t> min_independent_truncation(std::span<const SequenceVector> family,
                                                      double tau, std::size_t m_max) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  for (std::size_t m = 1; m <= m_max; ++m) {
    Matrix cols(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(family.size()));
    for (std::size_t i = 0; i < family.size(); ++i) {
      cols.col(static_cast<Eigen::Index>(i)) = truncate(family[i], m).coords;
    }
    if (separation(cols) >= tau) return m;
  }
  return std::nullopt;
}

}  // namespace slicegauss
