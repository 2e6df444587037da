#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace slicegauss {

class Integrand;

// cos(<a, x> + b)
struct CosLinear {
  std::vector<double> a;
  double b = 0.0;
};

// exp(-c ||x - center||^2), c > 0
struct GaussBump {
  double c = 1.0;
  std::vector<double> center;
};

// Piecewise-linear plateau on one coordinate t = x[axis] - center:
// 1 on (-m+1, m-1), 0 outside (-m, m), linear in between.
struct RampIndicator {
  double m = 1.0;
  std::size_t axis = 0;
  double center = 0.0;
};

// tanh(constant + <linear, x> + x^T quadratic x)
struct TanhPoly {
  double constant = 0.0;
  std::vector<double> linear;
  std::vector<double> quadratic;  // k*k row-major, symmetric
};

struct Product {
  std::vector<Integrand> factors;
};

// constant + sum_i weights[i] * terms[i]
struct AffineCombination {
  std::vector<double> weights;
  std::vector<Integrand> terms;
  double constant = 0.0;
};

// A bounded continuous function R^k -> R from a closed parametric catalog.
class Integrand {
 public:
  using Kind = std::variant<CosLinear, GaussBump, RampIndicator, TanhPoly, Product, AffineCombination>;

  static Integrand cos_linear(std::vector<double> a, double b);
  static Integrand gauss_bump(double c, std::vector<double> center);
  static Integrand ramp_indicator(std::size_t k, double m, std::size_t axis, double center = 0.0);
  static Integrand tanh_poly(std::size_t k, double constant, std::vector<double> linear,
                             std::vector<double> quadratic);
  static Integrand product(std::vector<Integrand> factors);
  static Integrand affine_combination(std::vector<double> weights, std::vector<Integrand> terms,
                                      double constant = 0.0);
  // f == 1 on R^k, represented as cos(<0, x> + 0).
  static Integrand constant_one(std::size_t k);

  std::size_t k() const noexcept { return k_; }
  const Kind& kind() const noexcept { return kind_; }
  std::string kind_name() const;

  // Upper bound on sup |f|; exact for the base kinds.
  double sup_bound() const noexcept { return sup_bound_; }
  bool uniformly_continuous() const noexcept { return uniformly_continuous_; }

  // No dimension check; x must hold at least k values.
  double operator()(std::span<const double> x) const;

 private:
  Integrand(std::size_t k, Kind kind);

  std::size_t k_ = 0;
  Kind kind_;
  double sup_bound_ = 1.0;
  bool uniformly_continuous_ = true;
};

// Checked evaluation; throws DimensionMismatch when x.size() != k.
double evaluate(const Integrand& f, std::span<const double> x);

// h(x) = f(x + shift), with the catalog parameters rewritten.
Integrand translate(const Integrand& f, std::span<const double> shift);

// Canonical JSON descriptor. Vector lengths must agree with k.
Integrand integrand_from_json(const nlohmann::json& descriptor, std::size_t k);
nlohmann::json integrand_to_json(const Integrand& f);

}  // namespace slicegauss
