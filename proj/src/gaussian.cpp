#include "slicegauss/gaussian.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "slicegauss/errors.hpp"
#include "slicegauss/parallel.hpp"
#include "slicegauss/quadrature.hpp"
#include "slicegauss/random_stream.hpp"

namespace slicegauss {

GaussianSpec::GaussianSpec(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  const Eigen::Index k = mean_.size();
  if (k == 0) throw InvalidCovariance("Gaussian dimension must be >= 1");
  if (covariance_.rows() != k || covariance_.cols() != k) {
    throw DimensionMismatch("covariance must be " + std::to_string(k) + "x" + std::to_string(k));
  }
  const double asym = (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12)) {
    throw InvalidCovariance("covariance is not symmetric (max asymmetry " + error_number(asym) +
                            ")");
  }
  covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_);
  if (eig.info() != Eigen::Success) throw InvalidCovariance("eigendecomposition failed");
  // Eigen returns ascending order.
  eigenvalues_ = eig.eigenvalues().reverse();
  eigenvectors_ = eig.eigenvectors().rowwise().reverse();
  if (eigenvalues_(k - 1) < -kEigenvalueFloor) {
    throw InvalidCovariance("covariance is not positive semidefinite (min eigenvalue " +
                            error_number(eigenvalues_(k - 1)) + ")");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    if (eigenvalues_(i) < 0.0) eigenvalues_(i) = 0.0;
    if (eigenvalues_(i) > kEigenvalueFloor) ++rank_;
  }
}

Matrix GaussianSpec::support_factor() const {
  const auto r = static_cast<Eigen::Index>(rank_);
  return eigenvectors_.leftCols(r) * eigenvalues_.head(r).cwiseSqrt().asDiagonal();
}

GaussianSpec covariance_from_family(const OrthonormalFamily& family, std::size_t k,
                                    std::span<const double> p) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  if (p.size() != family.gamma()) {
    throw DimensionMismatch("p has " + std::to_string(p.size()) + " entries but the family has " +
                            std::to_string(family.gamma()) + " members");
  }
  const auto kk = static_cast<Eigen::Index>(k);
  const Matrix u = family.truncations(k);
  Vector mean = Vector::Zero(kk);
  // ||x||^2 P_x = x x^T, and the zero vector contributes nothing.
  Matrix cov = Matrix::Identity(kk, kk);
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    mean += p[static_cast<std::size_t>(i)] * u.col(i);
    cov.noalias() -= u.col(i) * u.col(i).transpose();
  }
  return GaussianSpec(std::move(mean), std::move(cov));
}

Matrix marginal_covariance(const Matrix& sigma, std::size_t k) {
  const auto kk = static_cast<Eigen::Index>(k);
  if (k == 0 || kk > sigma.rows() || sigma.rows() != sigma.cols()) {
    throw InvalidArgument("marginal_covariance needs a square matrix and 1 <= k <= m");
  }
  return sigma.topLeftCorner(kk, kk);
}

Matrix gaussian_sample_range(const GaussianSpec& spec, std::size_t begin, std::size_t end,
                             std::uint64_t seed) {
  const auto k = static_cast<Eigen::Index>(spec.k());
  const Matrix factor = spec.support_factor();
  const Eigen::Index r = factor.cols();
  const std::uint64_t stream_seed = domain_seed(seed, StreamDomain::kGaussian);
  Matrix out(static_cast<Eigen::Index>(end - begin), k);
  Vector xi(r);
  for (std::size_t i = begin; i < end; ++i) {
    NormalStream normals(stream_seed, i);
    for (Eigen::Index j = 0; j < r; ++j) xi(j) = normals();
    auto row = out.row(static_cast<Eigen::Index>(i - begin));
    row = spec.mean().transpose();
    if (r > 0) row += (factor * xi).transpose();
  }
  return out;
}

Matrix gaussian_sample(const GaussianSpec& spec, std::size_t count, std::uint64_t seed,
                       unsigned threads) {
  Matrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(spec.k()));
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    out.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) =
        gaussian_sample_range(spec, begin, end, seed);
  });
  return out;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using Complex = std::complex<double>;

// coef * exp(i <omega, x>) * exp(-curvature |x|^2 + 2 <shift, x> - offset)
struct ExpTerm {
  Complex coef{1.0, 0.0};
  Vector omega;
  double curvature = 0.0;
  Vector shift;
  double offset = 0.0;
};

ExpTerm unit_term(Eigen::Index k) {
  return ExpTerm{Complex(1.0, 0.0), Vector::Zero(k), 0.0, Vector::Zero(k), 0.0};
}

ExpTerm multiply(const ExpTerm& a, const ExpTerm& b) {
  return ExpTerm{a.coef * b.coef, a.omega + b.omega, a.curvature + b.curvature, a.shift + b.shift,
                 a.offset + b.offset};
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<ExpTerm> expand(const Integrand& f) {
  const auto k = static_cast<Eigen::Index>(f.k());
  return std::visit(
      Overloaded{
          [&](const CosLinear& g) {
            const Vector a = to_vector(g.a);
            ExpTerm plus = unit_term(k);
            ExpTerm minus = unit_term(k);
            plus.coef = 0.5 * std::exp(Complex(0.0, g.b));
            plus.omega = a;
            minus.coef = 0.5 * std::exp(Complex(0.0, -g.b));
            minus.omega = -a;
            return std::vector<ExpTerm>{plus, minus};
          },
          [&](const GaussBump& g) {
            const Vector m = to_vector(g.center);
            ExpTerm t = unit_term(k);
            t.curvature = g.c;
            t.shift = g.c * m;
            t.offset = g.c * m.squaredNorm();
            return std::vector<ExpTerm>{t};
          },
          [&](const Product& g) {
            std::vector<ExpTerm> acc{unit_term(k)};
            for (const auto& factor : g.factors) {
              const auto terms = expand(factor);
              std::vector<ExpTerm> next;
              next.reserve(acc.size() * terms.size());
              for (const auto& a : acc) {
                for (const auto& b : terms) next.push_back(multiply(a, b));
              }
              acc = std::move(next);
            }
            return acc;
          },
          [&](const AffineCombination& g) {
            std::vector<ExpTerm> out;
            if (g.constant != 0.0) {
              ExpTerm c = unit_term(k);
              c.coef = g.constant;
              out.push_back(c);
            }
            for (std::size_t i = 0; i < g.terms.size(); ++i) {
              for (auto t : expand(g.terms[i])) {
                t.coef *= g.weights[i];
                out.push_back(std::move(t));
              }
            }
            return out;
          },
          [&](const auto&) -> std::vector<ExpTerm> {
            throw UnsupportedClosedForm("no closed-form Gaussian expectation for kind '" +
                                        f.kind_name() + "'");
          },
      },
      f.kind());
}

// E exp(...) for x = eta + B xi, xi ~ N(0, I_r):
// E exp(-xi^T A xi + h^T xi) = det(I + 2A)^(-1/2) exp(h^T (I + 2A)^(-1) h / 2).
Complex term_expectation(const ExpTerm& t, const Vector& eta, const Matrix& factor) {
  using CVector = Eigen::VectorXcd;
  const Complex i(0.0, 1.0);
  Complex log_value = i * t.omega.dot(eta) - t.curvature * eta.squaredNorm() +
                      2.0 * t.shift.dot(eta) - t.offset;
  const Eigen::Index r = factor.cols();
  if (r > 0) {
    const CVector direction =
        i * t.omega.cast<Complex>() + (2.0 * t.shift - 2.0 * t.curvature * eta).cast<Complex>();
    const CVector h = factor.transpose().cast<Complex>() * direction;
    const Matrix m = Matrix::Identity(r, r) + 2.0 * t.curvature * factor.transpose() * factor;
    const Eigen::LLT<Matrix> llt(m);
    const Matrix m_inv = llt.solve(Matrix::Identity(r, r));
    const CVector solved = m_inv.cast<Complex>() * h;
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    // h^T M^{-1} h with a plain (non-conjugating) transpose.
    log_value += 0.5 * (h.transpose() * solved)(0) - 0.5 * log_det;
  }
  return t.coef * std::exp(log_value);
}

double closed_form(const GaussianSpec& spec, const Integrand& f) {
  const Matrix factor = spec.support_factor();
  Complex total(0.0, 0.0);
  for (const auto& t : expand(f)) total += term_expectation(t, spec.mean(), factor);
  return total.real();
}

double hermite_quadrature(const GaussianSpec& spec, const Integrand& f, std::size_t order) {
  const std::size_t r = spec.rank();
  if (r > 3) {
    throw RankTooHighForQuadrature("Hermite quadrature supports rank <= 3, got rank " +
                                   std::to_string(r));
  }
  const Matrix factor = spec.support_factor();
  if (r == 0) return f(std::span(spec.mean().data(), spec.k()));
  const QuadratureRule rule = gauss_hermite(order);
  const std::size_t total = static_cast<std::size_t>(std::pow(order, r));
  std::vector<double> terms(total);
  Vector xi(static_cast<Eigen::Index>(r));
  Vector x(static_cast<Eigen::Index>(spec.k()));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double w = 1.0;
    for (std::size_t d = 0; d < r; ++d) {
      const std::size_t idx = rem % order;
      rem /= order;
      xi(static_cast<Eigen::Index>(d)) = rule.nodes[idx];
      w *= rule.weights[idx];
    }
    x = spec.mean() + factor * xi;
    terms[flat] = w * f(std::span(x.data(), spec.k()));
  }
  return pairwise_sum(terms);
}

Expectation monte_carlo(const GaussianSpec& spec, const Integrand& f, const MonteCarlo& mc) {
  if (mc.count == 0) throw InvalidArgument("Monte Carlo count must be >= 1");
  std::vector<double> values(mc.count);
  parallel_for(mc.count, mc.threads, [&](std::size_t begin, std::size_t end) {
    constexpr std::size_t kBatch = 4096;
    for (std::size_t b = begin; b < end; b += kBatch) {
      const std::size_t e = std::min(end, b + kBatch);
      const Matrix pts = gaussian_sample_range(spec, b, e, mc.seed);
      Vector row(pts.cols());
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        row = pts.row(i).transpose();
        values[b + static_cast<std::size_t>(i)] = f(std::span(row.data(), spec.k()));
      }
    }
  });
  const auto est = mean_and_std_error(values);
  return {est.mean, est.std_error};
}

}  // namespace

bool has_closed_form(const Integrand& f) {
  return std::visit(Overloaded{
                        [](const CosLinear&) { return true; },
                        [](const GaussBump&) { return true; },
                        [](const Product& g) {
                          for (const auto& h : g.factors) {
                            if (!has_closed_form(h)) return false;
                          }
                          return true;
                        },
                        [](const AffineCombination& g) {
                          for (const auto& h : g.terms) {
                            if (!has_closed_form(h)) return false;
                          }
                          return true;
                        },
                        [](const auto&) { return false; },
                    },
                    f.kind());
}

Expectation gaussian_expectation(const GaussianSpec& spec, const Integrand& f,
                                 const ExpectationMethod& method) {
  if (f.k() != spec.k()) {
    throw DimensionMismatch("integrand dimension " + std::to_string(f.k()) +
                            " does not match Gaussian dimension " + std::to_string(spec.k()));
  }
  return std::visit(Overloaded{
                        [&](const ClosedForm&) { return Expectation{closed_form(spec, f), 0.0}; },
                        [&](const HermiteQuadrature& q) {
                          return Expectation{hermite_quadrature(spec, f, q.order), 0.0};
                        },
                        [&](const MonteCarlo& mc) { return monte_carlo(spec, f, mc); },
                    },
                    method);
}

}  // namespace slicegauss
