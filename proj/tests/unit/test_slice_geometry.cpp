#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slicegauss/errors.hpp"
#include "slicegauss/slice_geometry.hpp"

using namespace slicegauss;

namespace {

SequenceVector coords(std::vector<double> c) { return SequenceVector::explicit_coords(std::move(c)); }

OrthonormalFamily geometric_pair() {
  return OrthonormalFamily({SequenceVector::geometric({}, std::sqrt(3.0), 0.5),
                            SequenceVector::geometric({-0.5}, 3.0, 0.5)});
}

// Least-norm solution of U^T x = p via the normal equations, independent of
// the library's triangular solve.
Vector least_norm_oracle(const Matrix& u, const std::vector<double>& p) {
  const Vector pv = Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
  return u * (u.transpose() * u).ldlt().solve(pv);
}

}  // namespace

TEST_CASE("build_geometry examples") {
  const OrthonormalFamily e1({coords({1.0})});
  const SliceGeometry a = build_geometry(SliceSpec{e1, {2.0}, 100, 1});
  CHECK(a.center(0) == doctest::Approx(2.0));
  CHECK(a.center.tail(99).isZero());
  CHECK(a.radius == doctest::Approx(std::sqrt(96.0)).epsilon(1e-15));
  CHECK(a.scale_ratio == doctest::Approx(std::sqrt(0.96)).epsilon(1e-15));
  CHECK(std::abs(a.q(0)) == doctest::Approx(2.0));

  const OrthonormalFamily e12({coords({1.0}), coords({0.0, 1.0})});
  const SliceGeometry b = build_geometry(SliceSpec{e12, {1.0, 1.0}, 25, 2});
  CHECK(b.center(0) == doctest::Approx(1.0));
  CHECK(b.center(1) == doctest::Approx(1.0));
  CHECK(b.radius == doctest::Approx(std::sqrt(23.0)).epsilon(1e-15));
  CHECK(b.q.cwiseAbs().isApprox(Vector::Ones(2)));

  CHECK_THROWS_AS(build_geometry(SliceSpec{e1, {11.0}, 100, 1}), EmptySlice);
  CHECK_THROWS_AS(build_geometry(SliceSpec{e1, {10.0}, 100, 1}), EmptySlice);
}

TEST_CASE("build_geometry error paths") {
  const double r = 1.0 / std::sqrt(2.0);
  const OrthonormalFamily hidden({coords({r, 0.0, 0.0, r}), coords({r, 0.0, 0.0, -r})});
  CHECK_THROWS_AS(build_geometry(SliceSpec{hidden, {0.0, 0.0}, 3, 1}), DegenerateFrame);
  CHECK_NOTHROW(build_geometry(SliceSpec{hidden, {0.0, 0.0}, 4, 1}));

  const OrthonormalFamily e1({coords({1.0})});
  CHECK_THROWS_AS(build_geometry(SliceSpec{e1, {0.0, 1.0}, 10, 1}), DimensionMismatch);
  CHECK_THROWS_AS(build_geometry(SliceSpec{e1, {0.0}, 1, 1}), InvalidDimensions);
  CHECK_THROWS_AS(build_geometry(SliceSpec{e1, {0.0}, 10, 11}), InvalidDimensions);
  CHECK_THROWS_AS(build_geometry(SliceSpec{e1, {0.0}, kMaxAmbientDimension + 1, 1}), InvalidDimensions);
  CHECK_THROWS_AS(build_geometry(SliceSpec{e1, {0.0}, 10, 0}), InvalidDimensions);
}

TEST_CASE("geometry invariants for an infinite-support family") {
  const auto family = geometric_pair();
  const std::vector<double> p{1.5, -0.7};
  for (const std::size_t n : {3, 8, 64, 512, 4096}) {
    const SliceGeometry g = build_geometry(SliceSpec{family, p, n, 2});
    const Matrix u = family.truncations(n);
    for (Eigen::Index i = 0; i < 2; ++i) {
      CHECK(std::abs(g.center.dot(u.col(i)) - p[static_cast<std::size_t>(i)]) <=
            1e-9 * std::max(1.0, std::abs(p[static_cast<std::size_t>(i)])));
    }
    const Vector outside = g.center - g.frame.basis * (g.frame.basis.transpose() * g.center);
    CHECK(outside.norm() <= 1e-12);
    CHECK(std::abs(g.radius * g.radius + g.q.squaredNorm() - static_cast<double>(n)) <= 1e-12 * n);
    CHECK(g.scale_ratio > 0.0);
    CHECK(g.scale_ratio <= 1.0);
    CHECK((g.center - least_norm_oracle(u, p)).norm() <= 1e-12);
  }
}

TEST_CASE("summed center examples") {
  const OrthonormalFamily tilted({coords({0.6, 0.8})});
  for (const std::size_t n : {2, 10, 300}) {
    const SliceSpec spec{tilted, {1.0}, n, 2};
    const Vector theta = summed_center(spec);
    CHECK(theta(0) == doctest::Approx(0.6));
    CHECK(theta(1) == doctest::Approx(0.8));
    CHECK((theta - build_geometry(spec).center).norm() <= 1e-14);
  }

  const auto family = geometric_pair();
  const std::vector<double> p{1.0, 1.0};
  double previous = 1e300;
  for (const std::size_t n : {3, 5, 8}) {
    const SliceSpec spec{family, p, n, 2};
    const double gap = (summed_center(spec) - least_norm_oracle(family.truncations(n), p)).norm();
    CHECK(gap > 0.0);
    CHECK(gap < previous);
    previous = gap;
  }
  for (const std::size_t n : {64, 512}) {
    const SliceSpec spec{family, p, n, 2};
    CHECK((summed_center(spec) - least_norm_oracle(family.truncations(n), p)).norm() < 1e-12);
  }

  const SliceSpec zero{family, {0.0, 0.0}, 64, 2};
  CHECK(summed_center(zero).isZero());
  CHECK(build_geometry(zero).center.isZero());

  const OrthonormalFamily late({coords({0.0, 0.0, 1.0})});
  CHECK_THROWS_AS(summed_center(SliceSpec{late, {1.0}, 2, 1}), ZeroTruncation);
}

TEST_CASE("sphere_surface_area") {
  CHECK(sphere_surface_area(1, 1.0).value == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-15));
  CHECK(sphere_surface_area(2, 1.0).value == doctest::Approx(12.566371).epsilon(1e-7));
  CHECK(sphere_surface_area(2, 3.0).value == doctest::Approx(36.0 * std::numbers::pi).epsilon(1e-14));
  CHECK(sphere_surface_area(0, 5.0).value == doctest::Approx(2.0));
  CHECK(sphere_surface_area(3, 1.0).value == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi));
  const auto huge = sphere_surface_area(1000000, 1.0);
  CHECK(std::isfinite(huge.log_value));
  CHECK(huge.value == 0.0);
  const auto big_radius = sphere_surface_area(1000000, std::sqrt(1e6));
  CHECK(std::isfinite(big_radius.log_value));
  CHECK_THROWS_AS(sphere_surface_area(2, 0.0), InvalidArgument);
}

TEST_CASE("sampler residuals and determinism") {
  const auto family = geometric_pair();
  const SliceGeometry g = build_geometry(SliceSpec{family, {1.0, 2.0}, 100, 2});
  const Matrix xs = sample_slice(g, 500, 11);
  const double rn = std::sqrt(100.0);
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Vector x = xs.row(i).transpose();
    CHECK(std::abs((x - g.center).norm() - g.radius) <= 1e-9 * rn);
    CHECK(std::abs(x.dot(g.frame.columns.col(0)) - 1.0) <= 1e-8 * rn);
    CHECK(std::abs(x.dot(g.frame.columns.col(1)) - 2.0) <= 1e-8 * rn);
  }
  CHECK(sample_slice(g, 500, 11) == xs);
  CHECK(sample_slice(g, 500, 11, 4) == xs);
  CHECK_FALSE(sample_slice(g, 500, 12) == xs);
}

TEST_CASE("full sphere sampler moments") {
  const SliceGeometry g = build_geometry(SliceSpec{OrthonormalFamily(), {}, 8, 1});
  constexpr int kCount = 20000;
  const Matrix xs = sample_slice(g, kCount, 2);
  for (Eigen::Index j = 0; j < 8; ++j) CHECK(std::abs(xs.col(j).mean()) <= 4.0 * std::sqrt(1.0 / kCount));
}

TEST_CASE("slice covariance is radius^2/(n - gamma) times the complement projector") {
  constexpr std::size_t kN = 16;
  constexpr int kCount = 100000;
  const OrthonormalFamily family({coords({0.6, 0.8})});
  const SliceGeometry g = build_geometry(SliceSpec{family, {1.0}, kN, 2});
  const Matrix xs = sample_slice(g, kCount, 21);
  const Matrix centred = xs.rowwise() - g.center.transpose();
  const Matrix z = g.frame.basis;
  const Matrix expected =
      (g.radius * g.radius / (kN - 1.0)) * (Matrix::Identity(kN, kN) - z * z.transpose());
  int violations = 0;
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(kN); ++a) {
    for (Eigen::Index b = a; b < static_cast<Eigen::Index>(kN); ++b) {
      const Eigen::ArrayXd prod = centred.col(a).array() * centred.col(b).array();
      const double mean = prod.mean();
      const double se = std::sqrt((prod - mean).square().sum() / (kCount - 1.0) / kCount);
      if (std::abs(mean - expected(a, b)) > 5.0 * se + 1e-12) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("scale-translate identity") {
  const auto family = geometric_pair();
  const std::vector<double> p{1.5, -0.7};
  const SliceGeometry g = build_geometry(SliceSpec{family, p, 256, 2});
  const SliceGeometry h = build_geometry(SliceSpec{family, {0.0, 0.0}, 256, 2});
  CHECK(h.radius == doctest::Approx(16.0));
  const Matrix xs = sample_slice(h, 1000, 4);
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Vector x = g.scale_ratio * xs.row(i).transpose() + g.center;
    CHECK(std::abs((x - g.center).norm() - g.radius) <= 1e-8 * 16.0);
    for (Eigen::Index j = 0; j < 2; ++j) {
      CHECK(std::abs(x.dot(g.frame.columns.col(j)) - p[static_cast<std::size_t>(j)]) <= 1e-8 * 16.0);
    }
  }
}

TEST_CASE("slice_integral_mc examples") {
  const OrthonormalFamily tilted({coords({0.6, 0.8})});
  const auto one = slice_integral_mc(SliceSpec{tilted, {1.0}, 64, 2}, Integrand::constant_one(2), 1000, 1);
  CHECK(one.estimate == 1.0);
  CHECK(one.std_error == 0.0);
  CHECK(one.count == 1000);

  const SliceSpec sphere{OrthonormalFamily(), {}, 4096, 1};
  const auto cos = slice_integral_mc(sphere, Integrand::cos_linear({1.0}, 0.0), 200000, 2024);
  CHECK(std::abs(cos.estimate - std::exp(-0.5)) <= 3.0 * cos.std_error + 0.01);

  const auto ramp = slice_integral_mc(sphere, Integrand::ramp_indicator(1, 6.0, 0), 200000, 2024);
  CHECK(ramp.estimate >= 0.999);

  const auto bump = Integrand::gauss_bump(0.5, {0.0, 0.0});
  const auto est = slice_integral_mc(SliceSpec{tilted, {1.0}, 64, 2}, bump, 5000, 9);
  CHECK(std::abs(est.estimate) <= bump.sup_bound());

  CHECK_THROWS_AS(slice_integral_mc(sphere, Integrand::constant_one(2), 10, 1), DimensionMismatch);
  CHECK_THROWS_AS(slice_integral_mc(sphere, Integrand::constant_one(1), 0, 1), InvalidArgument);
  const OrthonormalFamily e1({coords({1.0})});
  CHECK_THROWS_AS(slice_integral_mc(SliceSpec{e1, {11.0}, 100, 1}, Integrand::constant_one(1), 10, 1),
                  EmptySlice);
}

TEST_CASE("estimates are bitwise reproducible across worker counts") {
  const OrthonormalFamily tilted({coords({0.6, 0.8})});
  const SliceSpec spec{tilted, {1.0}, 333, 2};
  const auto f = Integrand::tanh_poly(2, 0.1, {1.0, -1.0}, {});
  const auto a = slice_integral_mc(spec, f, 9999, 5, 1);
  const auto b = slice_integral_mc(spec, f, 9999, 5, 3);
  const auto c = slice_integral_mc(spec, f, 9999, 5, 8);
  CHECK(a.estimate == b.estimate);
  CHECK(a.estimate == c.estimate);
  CHECK(a.std_error == c.std_error);
}
