#include "slicegauss/slice_geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "slicegauss/errors.hpp"
#include "slicegauss/parallel.hpp"
#include "slicegauss/random_stream.hpp"

namespace slicegauss {

namespace {

void validate_spec(const SliceSpec& spec) {
  const std::size_t gamma = spec.family.gamma();
  if (spec.p.size() != gamma) {
    throw DimensionMismatch("p has " + std::to_string(spec.p.size()) +
                            " entries but the family has " + std::to_string(gamma) + " members");
  }
  if (spec.n == 0 || spec.n > kMaxAmbientDimension) {
    throw InvalidDimensions("ambient dimension n must lie in [1, 2^20], got " +
                            std::to_string(spec.n));
  }
  if (gamma >= spec.n) throw InvalidDimensions("need gamma < n");
  if (spec.k == 0 || spec.k > spec.n) throw InvalidDimensions("need 1 <= k <= n");
}

}  // namespace

SliceGeometry build_geometry(const SliceSpec& spec) {
  validate_spec(spec);
  return build_geometry(spec.family.truncations(spec.n), spec.p);
}

SliceGeometry build_geometry(const Matrix& constraints, std::span<const double> p) {
  const Eigen::Index n = constraints.rows();
  const Eigen::Index gamma = constraints.cols();
  if (static_cast<std::size_t>(gamma) != p.size()) {
    throw DimensionMismatch("one offset p_i is needed per constraint vector");
  }
  if (n == 0 || gamma >= n) throw InvalidDimensions("need gamma < n");

  SliceGeometry g;
  g.n = static_cast<std::size_t>(n);
  g.p.assign(p.begin(), p.end());
  if (gamma > 0) {
    const double sep = separation(constraints);
    if (!(sep >= 1e-10)) {
      throw DegenerateFrame("truncated constraint vectors are nearly dependent at n=" +
                            std::to_string(n) + " (separation " + error_number(sep) + ")");
    }
    try {
      g.frame = make_frame(constraints);
    } catch (const DegenerateFamily& e) {
      throw DegenerateFrame(e.what());
    }
  } else {
    g.frame.dimension = g.n;
    g.frame.columns = Matrix(n, 0);
    g.frame.basis = Matrix(n, 0);
    g.frame.r = Matrix(0, 0);
  }

  // <x, u_i> = p_i with x = Z q and U = Z R  <=>  R^T q = p.
  const Vector pv = Eigen::Map<const Vector>(p.data(), gamma);
  g.q = gamma > 0 ? Vector(g.frame.r.transpose().triangularView<Eigen::Lower>().solve(pv))
                  : Vector(0);
  g.center = gamma > 0 ? Vector(g.frame.basis * g.q) : Vector(Vector::Zero(n));

  for (Eigen::Index i = 0; i < gamma; ++i) {
    const double residual = std::abs(g.center.dot(constraints.col(i)) - pv(i));
    if (!(residual <= 1e-9 * std::max(1.0, std::abs(pv(i))))) {
      throw DegenerateFrame("least-norm center misses constraint " + std::to_string(i + 1) +
                            " by " + error_number(residual));
    }
  }

  const double radius_sq = static_cast<double>(n) - g.q.squaredNorm();
  if (!(radius_sq > 0.0)) {
    throw EmptySlice("sphere of radius sqrt(" + std::to_string(n) +
                     ") misses the affine subspace (|center|^2 = " +
                     error_number(g.q.squaredNorm()) + ")");
  }
  g.radius = std::sqrt(radius_sq);
  g.scale_ratio = g.radius / std::sqrt(static_cast<double>(n));
  return g;
}

Vector summed_center(const SliceSpec& spec) {
  validate_spec(spec);
  const Matrix u = spec.family.truncations(spec.n);
  Vector theta = Vector::Zero(u.rows());
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    const double sq = u.col(i).squaredNorm();
    if (sq == 0.0) {
      throw ZeroTruncation("truncation of family member " + std::to_string(i + 1) +
                           " vanishes at n=" + std::to_string(spec.n));
    }
    theta += (spec.p[static_cast<std::size_t>(i)] / sq) * u.col(i);
  }
  return theta;
}

SphereArea sphere_surface_area(std::size_t d, double a) {
  if (!(a > 0.0)) throw InvalidArgument("radius must be positive");
  const double half = 0.5 * static_cast<double>(d + 1);
  SphereArea out;
  out.log_value = std::numbers::ln2 + half * std::log(std::numbers::pi) - std::lgamma(half) +
                  static_cast<double>(d) * std::log(a);
  out.value = std::exp(out.log_value);
  return out;
}

void visit_slice_samples(const SliceGeometry& geometry, std::size_t begin, std::size_t end,
                         std::uint64_t seed, const SliceVisitor& visit) {
  const auto n = static_cast<Eigen::Index>(geometry.n);
  const Matrix& z = geometry.frame.basis;
  const std::uint64_t stream_seed = domain_seed(seed, StreamDomain::kSlice);
  Vector w(n);
  Vector x(n);
  Vector coeff(z.cols());
  for (std::size_t i = begin; i < end; ++i) {
    NormalStream normals(stream_seed, i);
    for (Eigen::Index j = 0; j < n; ++j) w(j) = normals();
    if (z.cols() > 0) {
      coeff.noalias() = z.transpose() * w;
      w.noalias() -= z * coeff;
    }
    x = geometry.center + (geometry.radius / w.norm()) * w;
    visit(i, std::span<const double>(x.data(), geometry.n));
  }
}

Matrix sample_slice(const SliceGeometry& geometry, std::size_t count, std::uint64_t seed,
                    unsigned threads) {
  Matrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(geometry.n));
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    visit_slice_samples(geometry, begin, end, seed, [&](std::size_t i, std::span<const double> x) {
      out.row(static_cast<Eigen::Index>(i)) =
          Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    });
  });
  return out;
}

std::vector<double> slice_integrand_values(const SliceGeometry& geometry, const Integrand& f,
                                           std::size_t count, std::uint64_t seed,
                                           unsigned threads) {
  if (f.k() > geometry.n) throw InvalidDimensions("integrand dimension k exceeds n");
  std::vector<double> values(count);
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    visit_slice_samples(geometry, begin, end, seed, [&](std::size_t i, std::span<const double> x) {
      values[i] = f(x.first(f.k()));
    });
  });
  return values;
}

SliceEstimate slice_integral_mc(const SliceGeometry& geometry, const Integrand& f,
                                std::size_t count, std::uint64_t seed, unsigned threads) {
  if (count == 0) throw InvalidArgument("sample count must be >= 1");
  const auto values = slice_integrand_values(geometry, f, count, seed, threads);
  const auto est = mean_and_std_error(values);
  return {est.mean, est.std_error, count};
}

SliceEstimate slice_integral_mc(const SliceSpec& spec, const Integrand& f, std::size_t count,
                                std::uint64_t seed, unsigned threads) {
  if (f.k() != spec.k) throw DimensionMismatch("integrand dimension must equal spec.k");
  return slice_integral_mc(build_geometry(spec), f, count, seed, threads);
}

}  // namespace slicegauss
