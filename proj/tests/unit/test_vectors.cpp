#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "slicegauss/errors.hpp"
#include "slicegauss/random_stream.hpp"
#include "slicegauss/vectors.hpp"

using namespace slicegauss;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t index) {
  NormalStream s(1234, index);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = s();
  }
  return m;
}

Vector unit(Eigen::Index n, Eigen::Index i) { return Vector::Unit(n, i); }

}  // namespace

TEST_CASE("explicit truncation reads off coordinates and the tail norm") {
  const auto v = SequenceVector::explicit_coords({1.0, 2.0, 3.0});
  const auto t = truncate(v, 2);
  REQUIRE(t.coords.size() == 2);
  CHECK(t.coords(0) == 1.0);
  CHECK(t.coords(1) == 2.0);
  CHECK(t.tail_norm == doctest::Approx(3.0).epsilon(1e-15));

  const auto full = truncate(v, 3);
  CHECK(full.tail_norm == 0.0);
  const auto padded = truncate(v, 5);
  CHECK(padded.coords(4) == 0.0);
  CHECK(padded.tail_norm == 0.0);
  CHECK(v.support_length() == std::optional<std::size_t>(3));
}

TEST_CASE("geometric truncation matches a brute-force series oracle") {
  const auto v = SequenceVector::geometric({}, 1.0, 0.5);
  const auto t = truncate(v, 2);
  CHECK(t.coords(0) == 0.5);
  CHECK(t.coords(1) == 0.25);

  // Oracle: sum of squares of coordinates 3..10^6.
  double sum = 0.0;
  double comp = 0.0;
  for (int j = 1000000; j >= 3; --j) {
    const double term = std::pow(0.25, j);
    const double y = term - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  constexpr double kFrozen = 1.0 / 48.0;  // (1/64) / (1 - 1/4)
  CHECK(sum == doctest::Approx(kFrozen).epsilon(1e-14));
  CHECK(t.tail_norm * t.tail_norm == doctest::Approx(kFrozen).epsilon(1e-14));
}

TEST_CASE("cached squared norm matches recomputation") {
  const std::vector<SequenceVector> vs{
      SequenceVector::explicit_coords({0.1, -2.0, 3.5, 1e-3}),
      SequenceVector::geometric({0.3, -0.7}, 1.7, -0.9),
      SequenceVector::geometric({}, std::sqrt(3.0), 0.5),
      SequenceVector::geometric({1.0}, 0.0, 0.5)};
  for (const auto& v : vs) {
    CHECK(std::abs(v.squared_norm() - v.recompute_squared_norm()) <= 1e-12 * v.squared_norm());
  }
  CHECK(vs[2].squared_norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(vs[3].support_length() == std::optional<std::size_t>(1));
  CHECK_FALSE(vs[1].support_length().has_value());
}

TEST_CASE("geometric vectors reject |ratio| >= 1") {
  CHECK_THROWS_AS(SequenceVector::geometric({}, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(SequenceVector::geometric({}, 1.0, -1.5), InvalidArgument);
  CHECK_THROWS_AS(truncate(SequenceVector::explicit_coords({1.0}), 0), InvalidArgument);
  CHECK_THROWS_AS(SequenceVector::explicit_coords({1.0}).coordinate(0), InvalidArgument);
}

TEST_CASE("inner products include the geometric cross tail exactly") {
  const auto a = SequenceVector::geometric({}, std::sqrt(3.0), 0.5);
  const auto b = SequenceVector::geometric({-0.5}, 3.0, 0.5);
  CHECK(std::abs(inner_product(a, b)) <= 1e-15);
  CHECK(inner_product(b, b) == doctest::Approx(1.0).epsilon(1e-15));

  const auto c = SequenceVector::geometric({}, 1.0, 0.5);
  const auto d = SequenceVector::geometric({}, 1.0, -0.25);
  // sum_j (1/2)^j (-1/4)^j = (-1/8) / (1 + 1/8)
  CHECK(inner_product(c, d) == doctest::Approx(-1.0 / 9.0).epsilon(1e-14));
  const auto e = SequenceVector::explicit_coords({1.0, 1.0, 1.0});
  CHECK(inner_product(c, e) == doctest::Approx(0.875).epsilon(1e-15));
}

TEST_CASE("orthonormal family validation") {
  CHECK_NOTHROW(OrthonormalFamily({SequenceVector::explicit_coords({0.6, 0.8})}));
  CHECK_THROWS_AS(OrthonormalFamily({SequenceVector::explicit_coords({1.0, 1.0})}), InvalidFamily);
  CHECK_THROWS_AS(OrthonormalFamily({SequenceVector::explicit_coords({1.0}),
                                     SequenceVector::explicit_coords({0.6, 0.8})}),
                  InvalidFamily);
  const OrthonormalFamily loose({SequenceVector::explicit_coords({1.0 + 1e-6})}, 1e-5);
  CHECK(loose.orthonormality_error() > 0.0);
  const OrthonormalFamily empty;
  CHECK(empty.gamma() == 0);
  CHECK(empty.truncations(4).cols() == 0);
}

TEST_CASE("gram_schmidt examples") {
  Matrix id = Matrix::Identity(2, 2);
  CHECK((gram_schmidt(id) - id).cwiseAbs().maxCoeff() <= 1e-15);

  Matrix v(2, 2);
  v << 2.0, 1.0, 0.0, 1.0;
  const Matrix q = gram_schmidt(v);
  CHECK((q - id).cwiseAbs().maxCoeff() <= 1e-15);

  const std::vector<Vector> list{Vector::Unit(2, 0) * 2.0, Vector::Ones(2)};
  const auto out = gram_schmidt(std::span<const Vector>(list));
  CHECK(out[1](1) == doctest::Approx(1.0));
}

TEST_CASE("gram_schmidt on random input matches a Householder QR oracle") {
  const Matrix a = random_matrix(5, 3, 7);
  const Matrix q = gram_schmidt(a);
  CHECK((q.transpose() * q - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix oracle = qr.householderQ() * Matrix::Identity(5, 3);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double sign = oracle.col(j).dot(q.col(j)) >= 0.0 ? 1.0 : -1.0;
    CHECK((q.col(j) - sign * oracle.col(j)).cwiseAbs().maxCoeff() <= 1e-10);
  }
  // Prefix spans agree.
  for (Eigen::Index i = 0; i < 3; ++i) {
    const Matrix zi = q.leftCols(i + 1);
    for (Eigen::Index j = 0; j <= i; ++j) {
      const Vector r = a.col(j) - zi * (zi.transpose() * a.col(j));
      CHECK(r.norm() <= 1e-10 * a.col(j).norm());
    }
  }
}

TEST_CASE("gram_schmidt rejects degenerate input") {
  Matrix dup(3, 2);
  dup << 1.0, 1.0, 0.0, 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(gram_schmidt(dup), DegenerateFamily);
  Matrix wide = Matrix::Identity(2, 3);
  CHECK_THROWS_AS(gram_schmidt(wide), DegenerateFamily);
  Matrix tiny(2, 2);
  tiny << 1.0, 1.0, 0.0, 1e-12;
  CHECK_THROWS_AS(gram_schmidt(tiny), DegenerateFamily);
}

TEST_CASE("gram_schmidt is idempotent on orthonormal input") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(8, 4, 100 + trial));
    const Matrix q = qr.householderQ() * Matrix::Identity(8, 4);
    CHECK((gram_schmidt(q) - q).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("make_frame satisfies the frame invariants") {
  const Matrix a = random_matrix(6, 3, 9);
  const FiniteFrame f = make_frame(a);
  CHECK(f.dimension == 6);
  CHECK((f.basis.transpose() * f.basis - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((f.basis * f.r - a).cwiseAbs().maxCoeff() <= 1e-12);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const Vector r = a.col(i) - f.basis * (f.basis.transpose() * a.col(i));
    CHECK(r.norm() <= 1e-10 * a.col(i).norm());
  }
}

TEST_CASE("separation examples") {
  const std::vector<Vector> e12{unit(3, 0), unit(3, 1)};
  CHECK(separation(std::span<const Vector>(e12)) == doctest::Approx(1.0));
  const std::vector<Vector> dup{unit(2, 0), unit(2, 0)};
  CHECK(separation(std::span<const Vector>(dup)) == doctest::Approx(0.0));

  const double theta = std::numbers::pi / 6.0;
  Vector w(2);
  w << std::cos(theta), std::sin(theta);
  const std::vector<Vector> pair{unit(2, 0), w};
  // Oracle: minimise |w - t e1| over a dense grid of t (and symmetrically).
  double grid_min = 1e300;
  for (int i = 0; i <= 2000000; ++i) {
    const double t = -1.0 + 2.0 * i / 2000000.0;
    grid_min = std::min(grid_min, std::hypot(w(0) - t, w(1)));
  }
  CHECK(grid_min == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(separation(std::span<const Vector>(pair)) == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<Vector> single{Vector::Constant(3, 2.0)};
  CHECK(separation(std::span<const Vector>(single)) == doctest::Approx(std::sqrt(12.0)));
  CHECK(std::isinf(separation(Matrix(3, 0))));
}

TEST_CASE("separation bounds and independence on random families") {
  for (std::uint64_t trial = 0; trial < 40; ++trial) {
    Matrix v = random_matrix(7, 4, 500 + trial);
    v.colwise().normalize();
    Eigen::JacobiSVD<Matrix> svd(v);
    const double smin = svd.singularValues()(3);
    const double sep = separation(v);
    CHECK(sep >= smin - 1e-10);
    if (sep >= 1e-6) CHECK(smin > 0.0);
  }
}

TEST_CASE("min_independent_truncation examples") {
  const double r = 1.0 / std::sqrt(2.0);
  const std::vector<SequenceVector> tilted{SequenceVector::explicit_coords({1.0}),
                                           SequenceVector::explicit_coords({r, r})};
  CHECK(min_independent_truncation(tilted, 0.1, 10) == std::optional<std::size_t>(2));

  const std::vector<SequenceVector> one{SequenceVector::explicit_coords({1.0})};
  CHECK(min_independent_truncation(one, 0.5, 10) == std::optional<std::size_t>(1));

  const std::vector<SequenceVector> axes{SequenceVector::explicit_coords({1.0}),
                                         SequenceVector::explicit_coords({0.0, 1.0}),
                                         SequenceVector::explicit_coords({0.0, 0.0, 1.0})};
  CHECK(min_independent_truncation(axes, 0.9, 10) == std::optional<std::size_t>(3));
  CHECK_FALSE(min_independent_truncation(axes, 0.9, 2).has_value());

  const std::vector<SequenceVector> same{SequenceVector::explicit_coords({1.0, 1.0}),
                                         SequenceVector::explicit_coords({1.0, 1.0})};
  CHECK_FALSE(min_independent_truncation(same, 1e-3, 50).has_value());
  CHECK_THROWS_AS(min_independent_truncation(axes, 0.0, 3), InvalidArgument);
}

TEST_CASE("separation stabilizes past the support") {
  const std::vector<SequenceVector> members{SequenceVector::explicit_coords({1.0, 2.0, 0.0, 1.0}),
                                            SequenceVector::explicit_coords({0.0, 1.0, 3.0})};
  const auto sep_at = [&](std::size_t n) {
    Matrix m(static_cast<Eigen::Index>(n), 2);
    m.col(0) = truncate(members[0], n).coords;
    m.col(1) = truncate(members[1], n).coords;
    return separation(m);
  };
  const double s4 = sep_at(4);
  for (const std::size_t n : {5, 16, 256}) CHECK(std::abs(sep_at(n) - s4) <= 1e-12);
}

TEST_CASE("truncated orthonormality improves along a doubling schedule") {
  const OrthonormalFamily family({SequenceVector::geometric({}, std::sqrt(3.0), 0.5),
                                  SequenceVector::geometric({-0.5}, 3.0, 0.5)});
  double previous = 1e300;
  for (std::size_t n = 1; n <= 128; n *= 2) {
    const Matrix u = family.truncations(n);
    const double err = (u.transpose() * u - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff();
    CHECK(err <= previous + 1e-12);
    previous = err;
  }
  CHECK(previous <= 1e-12);
}
