#include "slicegauss/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "slicegauss/errors.hpp"
#include "slicegauss/parallel.hpp"

namespace slicegauss {

QuadratureRule gauss_legendre(std::size_t order) {
  if (order == 0) throw InvalidArgument("quadrature order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const std::size_t half = (order + 1) / 2;
  const double n = static_cast<double>(order);
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jj = static_cast<double>(j);
        p1 = ((2.0 * jj - 1.0) * z * p2 - (jj - 1.0) * p3) / jj;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[order - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

QuadratureRule gauss_hermite(std::size_t order) {
  if (order == 0) throw InvalidArgument("quadrature order must be >= 1");
  // Physicists' rule for exp(-t^2) by Newton iteration on the normalized
  // Hermite recurrence, then rescaled to the standard normal.
  constexpr double kPiM4 = 0.7511255444649425;  // pi^(-1/4)
  const double n = static_cast<double>(order);
  std::vector<double> x(order);
  std::vector<double> w(order);
  const std::size_t half = (order + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = kPiM4;
      double p2 = 0.0;
      for (std::size_t j = 0; j < order; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jj = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jj + 1.0)) * p2 - std::sqrt(jj / (jj + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-14) break;
    }
    x[i] = z;
    x[order - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[order - 1 - i] = w[i];
  }
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (std::size_t i = 0; i < order; ++i) {
    rule.nodes[i] = std::numbers::sqrt2 * x[order - 1 - i];
    rule.weights[i] = w[order - 1 - i] * std::numbers::inv_sqrtpi;
  }
  return rule;
}

double log_gamma_ratio_scaled(double x, double h) {
  if (!(x > 0.0) || h < 0.0) throw InvalidArgument("log_gamma_ratio_scaled needs x > 0, h >= 0");
  if (h == 0.0) return 0.0;
  if (x < 10.0) return std::lgamma(x + h) - std::lgamma(x) - h * std::log(x);
  // Stirling series for both terms; the leading parts are combined through
  // log1p so the O(x log x) pieces cancel analytically.
  static constexpr double kStirling[] = {1.0 / 12.0,   -1.0 / 360.0, 1.0 / 1260.0,
                                         -1.0 / 1680.0, 1.0 / 1188.0, -691.0 / 360360.0};
  double value = (x + h - 0.5) * std::log1p(h / x) - h;
  const double y = x + h;
  double px = 1.0 / x;
  double py = 1.0 / y;
  const double x2 = 1.0 / (x * x);
  const double y2 = 1.0 / (y * y);
  for (double c : kStirling) {
    value += c * (py - px);
    px *= x2;
    py *= y2;
  }
  return value;
}

DisintegrationCoefficients disintegration_coefficients(std::size_t n, std::size_t k,
                                                       std::size_t gamma) {
  if (!(n > k && k >= gamma)) {
    throw InvalidDimensions("need n > k >= gamma, got n=" + std::to_string(n) +
                            ", k=" + std::to_string(k) + ", gamma=" + std::to_string(gamma));
  }
  DisintegrationCoefficients c;
  c.n = n;
  c.k = k;
  c.gamma = gamma;
  const double half_gap = 0.5 * static_cast<double>(n - k);
  const double h = 0.5 * static_cast<double>(k - gamma);
  c.log_a_nk = log_gamma_ratio_scaled(half_gap, h);
  c.log_b_nk = h * std::log1p(-static_cast<double>(k) / static_cast<double>(n));
  c.a_nk = std::exp(c.log_a_nk);
  c.b_nk = std::exp(c.log_b_nk);
  return c;
}

Matrix orthonormal_complement(const Matrix& columns) {
  const Eigen::Index rows = columns.rows();
  const Eigen::Index cols = columns.cols();
  if (cols == 0) return Matrix::Identity(rows, rows);
  Eigen::HouseholderQR<Matrix> qr(columns);
  const Matrix q = qr.householderQ() * Matrix::Identity(rows, rows);
  return q.rightCols(rows - cols);
}

namespace {

// Nodes and weights on S^{d-1} in hyperspherical coordinates; weights sum to
// the surface area of S^{d-1}.
struct DirectionSet {
  Matrix points;  // d x count
  std::vector<double> weights;
};

DirectionSet sphere_directions(std::size_t d, std::size_t order) {
  DirectionSet out;
  if (d == 1) {
    out.points = Matrix(1, 2);
    out.points << 1.0, -1.0;
    out.weights = {1.0, 1.0};
    return out;
  }
  const DirectionSet inner = sphere_directions(d - 1, order);
  const QuadratureRule rule = gauss_legendre(order);
  const auto inner_count = static_cast<Eigen::Index>(inner.weights.size());
  out.points = Matrix(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(order) * inner_count);
  out.weights.reserve(order * inner.weights.size());
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < order; ++i) {
    const double psi = 0.5 * std::numbers::pi * (rule.nodes[i] + 1.0);
    const double w = 0.5 * std::numbers::pi * rule.weights[i] *
                     std::pow(std::sin(psi), static_cast<double>(d - 2));
    for (Eigen::Index j = 0; j < inner_count; ++j, ++col) {
      out.points(0, col) = std::cos(psi);
      out.points.col(col).tail(static_cast<Eigen::Index>(d - 1)) = std::sin(psi) * inner.points.col(j);
      out.weights.push_back(w * inner.weights[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

// Refines by doubling `order` until two successive estimates agree.
template <class Estimate>
double refine(const QuadratureOptions& options, const char* what, Estimate&& estimate) {
  std::size_t order = std::max<std::size_t>(1, options.initial_order);
  double previous = estimate(order);
  while (order * 2 <= options.max_order) {
    order *= 2;
    const double current = estimate(order);
    if (std::abs(current - previous) <= options.tol * std::max(1.0, std::abs(current))) {
      return current;
    }
    previous = current;
  }
  throw QuadratureNonConvergent(std::string(what) + " did not reach tolerance " +
                                error_number(options.tol) + " by order " +
                                std::to_string(options.max_order));
}

}  // namespace

double disintegrate_sphere_integral(std::size_t big_n, std::size_t k, double a,
                                    const BallFunction& inner, const QuadratureOptions& options) {
  if (!(big_n > k && k >= 1)) throw InvalidDimensions("need N > k >= 1");
  if (k > 3) throw InvalidDimensions("ball quadrature supports k <= 3");
  if (!(a > 0.0)) throw InvalidArgument("radius must be positive");
  const auto kk = static_cast<Eigen::Index>(k);
  return refine(options, "disintegration quadrature", [&](std::size_t order) {
    const QuadratureRule radial = gauss_legendre(order);
    const DirectionSet dirs = sphere_directions(k, order);
    std::vector<double> terms;
    terms.reserve(order * dirs.weights.size());
    Vector x(kk);
    for (std::size_t i = 0; i < order; ++i) {
      // ||x|| = a sin(phi), phi in [0, pi/2]; dx = (a sin phi)^(k-1) a cos(phi) dphi dw
      // and a / a_x = 1 / cos(phi).
      const double phi = 0.25 * std::numbers::pi * (radial.nodes[i] + 1.0);
      const double r = a * std::sin(phi);
      const double w_r = 0.25 * std::numbers::pi * radial.weights[i] * a *
                         std::pow(r, static_cast<double>(k - 1));
      for (std::size_t j = 0; j < dirs.weights.size(); ++j) {
        x = r * dirs.points.col(static_cast<Eigen::Index>(j));
        terms.push_back(w_r * dirs.weights[j] * inner(std::span(x.data(), k)));
      }
    }
    return pairwise_sum(terms);
  });
}

double great_circle_integral_quadrature(std::size_t n, const OrthonormalFamily& family,
                                        const Integrand& f, const QuadratureOptions& options) {
  const std::size_t k = f.k();
  const std::size_t gamma = family.gamma();
  if (!(gamma <= k && k < n)) throw InvalidDimensions("need gamma <= k < n");
  for (std::size_t i = 0; i < gamma; ++i) {
    const auto support = family.members()[i].support_length();
    if (!support || *support > k) {
      throw UnsupportedFamily("family member " + std::to_string(i + 1) +
                              " is not supported in the first " + std::to_string(k) +
                              " coordinates");
    }
  }
  const std::size_t d = k - gamma;
  if (d == 0) {
    const std::vector<double> origin(k, 0.0);
    return f(origin);
  }
  if (d > 3) throw InvalidDimensions("great-circle quadrature supports k - gamma <= 3");

  const Matrix complement = orthonormal_complement(family.truncations(k));  // k x d
  const auto coeffs = disintegration_coefficients(n, k, gamma);
  const double dd = static_cast<double>(d);
  const double prefactor = coeffs.a_nk * coeffs.b_nk / std::pow(2.0 * std::numbers::pi, 0.5 * dd);
  const double root_n = std::sqrt(static_cast<double>(n));
  const double kernel_power = static_cast<double>(n - k - 1);
  // The kernel has width ~ 1/sqrt(n) in phi; panels keep it resolved.
  const std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(root_n / 2.0)));
  const double panel_width = 0.5 * std::numbers::pi / static_cast<double>(panels);

  return refine(options, "great-circle quadrature", [&](std::size_t order) {
    const QuadratureRule radial = gauss_legendre(order);
    const DirectionSet dirs = sphere_directions(d, order);
    std::vector<double> terms;
    terms.reserve(panels * order * dirs.weights.size());
    Vector y(static_cast<Eigen::Index>(d));
    Vector x(static_cast<Eigen::Index>(k));
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = panel_width * static_cast<double>(p);
      for (std::size_t i = 0; i < order; ++i) {
        // |y| = sqrt(n) sin(phi): (1 - |y|^2/n)^((n-k-2)/2) d|y| = sqrt(n) cos^(n-k-1)(phi) dphi
        const double phi = lo + 0.5 * panel_width * (radial.nodes[i] + 1.0);
        const double r = root_n * std::sin(phi);
        const double kernel = std::exp(kernel_power * std::log(std::cos(phi)));
        const double w_r = 0.5 * panel_width * radial.weights[i] * root_n * kernel *
                           std::pow(r, dd - 1.0);
        if (w_r == 0.0) continue;
        for (std::size_t j = 0; j < dirs.weights.size(); ++j) {
          y = r * dirs.points.col(static_cast<Eigen::Index>(j));
          x = complement * y;
          terms.push_back(w_r * dirs.weights[j] * f(std::span(x.data(), k)));
        }
      }
    }
    return prefactor * pairwise_sum(terms);
  });
}

}  // namespace slicegauss
