#include "slicegauss/integrands.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "slicegauss/errors.hpp"

namespace slicegauss {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double dot(std::span<const double> a, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
  return s;
}

void require_length(const std::vector<double>& v, std::size_t k, const char* what) {
  if (v.size() != k) {
    throw DimensionMismatch(std::string(what) + " has length " + std::to_string(v.size()) +
                            ", expected " + std::to_string(k));
  }
}

// tanh(q) is uniformly continuous when q is affine or its quadratic part is
// definite; an indefinite or semidefinite form lets the gradient grow along
// level sets of q.
bool tanh_poly_uniformly_continuous(std::size_t k, const std::vector<double>& quadratic) {
  if (std::all_of(quadratic.begin(), quadratic.end(), [](double q) { return q == 0.0; })) {
    return true;
  }
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd h = Eigen::Map<const Eigen::MatrixXd>(quadratic.data(), kk, kk);
  h = 0.5 * (h + h.transpose()).eval();
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  return ev.minCoeff() > 1e-12 * scale || ev.maxCoeff() < -1e-12 * scale;
}

double ramp(double m, double t) { return std::clamp(m - std::abs(t), 0.0, 1.0); }

}  // namespace

Integrand::Integrand(std::size_t k, Kind kind) : k_(k), kind_(std::move(kind)) {
  if (k_ == 0) throw InvalidArgument("integrand dimension k must be >= 1");
  std::visit(Overloaded{
                 [&](const CosLinear&) {},
                 [&](const GaussBump&) {},
                 [&](const RampIndicator&) {},
                 [&](const TanhPoly& t) {
                   uniformly_continuous_ = tanh_poly_uniformly_continuous(k_, t.quadratic);
                 },
                 [&](const Product& p) {
                   sup_bound_ = 1.0;
                   for (const auto& f : p.factors) {
                     sup_bound_ *= f.sup_bound();
                     uniformly_continuous_ = uniformly_continuous_ && f.uniformly_continuous();
                   }
                 },
                 [&](const AffineCombination& a) {
                   sup_bound_ = std::abs(a.constant);
                   for (std::size_t i = 0; i < a.terms.size(); ++i) {
                     sup_bound_ += std::abs(a.weights[i]) * a.terms[i].sup_bound();
                     uniformly_continuous_ =
                         uniformly_continuous_ && a.terms[i].uniformly_continuous();
                   }
                 },
             },
             kind_);
}

Integrand Integrand::cos_linear(std::vector<double> a, double b) {
  const std::size_t k = a.size();
  return Integrand(k, CosLinear{std::move(a), b});
}

Integrand Integrand::gauss_bump(double c, std::vector<double> center) {
  if (!(c > 0.0)) throw InvalidArgument("gauss_bump requires c > 0");
  const std::size_t k = center.size();
  return Integrand(k, GaussBump{c, std::move(center)});
}

Integrand Integrand::ramp_indicator(std::size_t k, double m, std::size_t axis, double center) {
  if (!(m >= 1.0)) throw InvalidArgument("ramp_indicator requires m >= 1");
  if (axis >= k) throw InvalidArgument("ramp_indicator axis out of range");
  return Integrand(k, RampIndicator{m, axis, center});
}

Integrand Integrand::tanh_poly(std::size_t k, double constant, std::vector<double> linear,
                               std::vector<double> quadratic) {
  if (linear.empty()) linear.assign(k, 0.0);
  if (quadratic.empty()) quadratic.assign(k * k, 0.0);
  require_length(linear, k, "tanh_poly linear part");
  require_length(quadratic, k * k, "tanh_poly quadratic part");
  // Store the symmetric part; x^T H x only sees it.
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double s = 0.5 * (quadratic[i * k + j] + quadratic[j * k + i]);
      quadratic[i * k + j] = s;
      quadratic[j * k + i] = s;
    }
  }
  return Integrand(k, TanhPoly{constant, std::move(linear), std::move(quadratic)});
}

Integrand Integrand::product(std::vector<Integrand> factors) {
  if (factors.empty()) throw InvalidArgument("product needs at least one factor");
  const std::size_t k = factors.front().k();
  for (const auto& f : factors) {
    if (f.k() != k) throw DimensionMismatch("product factors must share dimension k");
  }
  return Integrand(k, Product{std::move(factors)});
}

Integrand Integrand::affine_combination(std::vector<double> weights, std::vector<Integrand> terms,
                                        double constant) {
  if (terms.empty()) throw InvalidArgument("affine_combination needs at least one term");
  if (weights.size() != terms.size()) {
    throw DimensionMismatch("affine_combination weights and terms differ in length");
  }
  const std::size_t k = terms.front().k();
  for (const auto& f : terms) {
    if (f.k() != k) throw DimensionMismatch("affine_combination terms must share dimension k");
  }
  return Integrand(k, AffineCombination{std::move(weights), std::move(terms), constant});
}

Integrand Integrand::constant_one(std::size_t k) {
  return cos_linear(std::vector<double>(k, 0.0), 0.0);
}

std::string Integrand::kind_name() const {
  return std::visit(Overloaded{
                        [](const CosLinear&) { return std::string("cos_linear"); },
                        [](const GaussBump&) { return std::string("gauss_bump"); },
                        [](const RampIndicator&) { return std::string("ramp_indicator"); },
                        [](const TanhPoly&) { return std::string("tanh_poly"); },
                        [](const Product&) { return std::string("product"); },
                        [](const AffineCombination&) { return std::string("affine_combination"); },
                    },
                    kind_);
}

double Integrand::operator()(std::span<const double> x) const {
  return std::visit(
      Overloaded{
          [&](const CosLinear& f) { return std::cos(dot(f.a, x) + f.b); },
          [&](const GaussBump& f) {
            double r2 = 0.0;
            for (std::size_t i = 0; i < k_; ++i) {
              const double d = x[i] - f.center[i];
              r2 += d * d;
            }
            return std::exp(-f.c * r2);
          },
          [&](const RampIndicator& f) { return ramp(f.m, x[f.axis] - f.center); },
          [&](const TanhPoly& f) {
            double q = f.constant + dot(f.linear, x);
            for (std::size_t i = 0; i < k_; ++i) {
              q += x[i] * dot(std::span(f.quadratic).subspan(i * k_, k_), x);
            }
            return std::tanh(q);
          },
          [&](const Product& f) {
            double v = 1.0;
            for (const auto& g : f.factors) v *= g(x);
            return v;
          },
          [&](const AffineCombination& f) {
            double v = f.constant;
            for (std::size_t i = 0; i < f.terms.size(); ++i) v += f.weights[i] * f.terms[i](x);
            return v;
          },
      },
      kind_);
}

double evaluate(const Integrand& f, std::span<const double> x) {
  if (x.size() != f.k()) {
    throw DimensionMismatch("integrand expects " + std::to_string(f.k()) + " coordinates, got " +
                            std::to_string(x.size()));
  }
  return f(x);
}

Integrand translate(const Integrand& f, std::span<const double> shift) {
  if (shift.size() != f.k()) throw DimensionMismatch("shift length must equal k");
  const std::size_t k = f.k();
  return std::visit(
      Overloaded{
          [&](const CosLinear& g) { return Integrand::cos_linear(g.a, g.b + dot(g.a, shift)); },
          [&](const GaussBump& g) {
            std::vector<double> center = g.center;
            for (std::size_t i = 0; i < k; ++i) center[i] -= shift[i];
            return Integrand::gauss_bump(g.c, std::move(center));
          },
          [&](const RampIndicator& g) {
            return Integrand::ramp_indicator(k, g.m, g.axis, g.center - shift[g.axis]);
          },
          [&](const TanhPoly& g) {
            // q(x + s) = q(s) + <linear + 2 H s, x> + x^T H x
            double constant = g.constant + dot(g.linear, shift);
            std::vector<double> linear = g.linear;
            for (std::size_t i = 0; i < k; ++i) {
              const double hs = dot(std::span(g.quadratic).subspan(i * k, k), shift);
              constant += shift[i] * hs;
              linear[i] += 2.0 * hs;
            }
            return Integrand::tanh_poly(k, constant, std::move(linear), g.quadratic);
          },
          [&](const Product& g) {
            std::vector<Integrand> factors;
            for (const auto& h : g.factors) factors.push_back(translate(h, shift));
            return Integrand::product(std::move(factors));
          },
          [&](const AffineCombination& g) {
            std::vector<Integrand> terms;
            for (const auto& h : g.terms) terms.push_back(translate(h, shift));
            return Integrand::affine_combination(g.weights, std::move(terms), g.constant);
          },
      },
      f.kind());
}

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(path + "." + key, "required field is missing");
  }
  return obj.at(key);
}

double number(const json& value, const std::string& path) {
  if (!value.is_number()) throw ConfigError(path, "expected a number");
  return value.get<double>();
}

std::vector<double> number_array(const json& value, const std::string& path, std::size_t length) {
  if (!value.is_array()) throw ConfigError(path, "expected an array of numbers");
  if (value.size() != length) {
    throw ConfigError(path, "expected " + std::to_string(length) + " entries, got " +
                                std::to_string(value.size()));
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(number(value[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Integrand parse(const json& d, std::size_t k, const std::string& path) {
  if (!d.is_object()) throw ConfigError(path, "expected an integrand descriptor object");
  const json& kind_value = require(d, "kind", path);
  if (!kind_value.is_string()) throw ConfigError(path + ".kind", "expected a string");
  const auto kind = kind_value.get<std::string>();
  try {
    if (kind == "cos_linear") {
      const double b = d.contains("b") ? number(d.at("b"), path + ".b") : 0.0;
      return Integrand::cos_linear(number_array(require(d, "a", path), path + ".a", k), b);
    }
    if (kind == "gauss_bump") {
      const double c = number(require(d, "c", path), path + ".c");
      if (!(c > 0.0)) throw ConfigError(path + ".c", "must be > 0");
      std::vector<double> m = d.contains("m") ? number_array(d.at("m"), path + ".m", k)
                                              : std::vector<double>(k, 0.0);
      return Integrand::gauss_bump(c, std::move(m));
    }
    if (kind == "ramp_indicator") {
      const double m = number(require(d, "m", path), path + ".m");
      if (!(m >= 1.0)) throw ConfigError(path + ".m", "must be >= 1");
      const json& axis = d.contains("axis") ? d.at("axis") : json(0);
      if (!axis.is_number_integer() || axis.get<long long>() < 0 ||
          static_cast<std::size_t>(axis.get<long long>()) >= k) {
        throw ConfigError(path + ".axis", "must be an integer in [0, k)");
      }
      const double center = d.contains("center") ? number(d.at("center"), path + ".center") : 0.0;
      return Integrand::ramp_indicator(k, m, axis.get<std::size_t>(), center);
    }
    if (kind == "tanh_poly") {
      const double c0 = d.contains("constant") ? number(d.at("constant"), path + ".constant") : 0.0;
      std::vector<double> lin =
          d.contains("linear") ? number_array(d.at("linear"), path + ".linear", k)
                               : std::vector<double>{};
      std::vector<double> quad;
      if (d.contains("quadratic")) {
        const json& q = d.at("quadratic");
        if (!q.is_array() || q.size() != k) {
          throw ConfigError(path + ".quadratic", "expected a k x k array");
        }
        for (std::size_t i = 0; i < k; ++i) {
          auto row = number_array(q[i], path + ".quadratic[" + std::to_string(i) + "]", k);
          quad.insert(quad.end(), row.begin(), row.end());
        }
      }
      return Integrand::tanh_poly(k, c0, std::move(lin), std::move(quad));
    }
    if (kind == "product") {
      const json& factors = require(d, "factors", path);
      if (!factors.is_array() || factors.empty()) {
        throw ConfigError(path + ".factors", "expected a non-empty array");
      }
      std::vector<Integrand> fs;
      for (std::size_t i = 0; i < factors.size(); ++i) {
        fs.push_back(parse(factors[i], k, path + ".factors[" + std::to_string(i) + "]"));
      }
      return Integrand::product(std::move(fs));
    }
    if (kind == "affine_combination") {
      const json& terms = require(d, "terms", path);
      if (!terms.is_array() || terms.empty()) {
        throw ConfigError(path + ".terms", "expected a non-empty array");
      }
      auto weights = number_array(require(d, "weights", path), path + ".weights", terms.size());
      std::vector<Integrand> ts;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        ts.push_back(parse(terms[i], k, path + ".terms[" + std::to_string(i) + "]"));
      }
      const double c = d.contains("constant") ? number(d.at("constant"), path + ".constant") : 0.0;
      return Integrand::affine_combination(std::move(weights), std::move(ts), c);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".kind", "unknown integrand kind '" + kind + "'");
}

}  // namespace

Integrand integrand_from_json(const json& descriptor, std::size_t k) {
  return parse(descriptor, k, "integrand");
}

json integrand_to_json(const Integrand& f) {
  const std::size_t k = f.k();
  return std::visit(
      Overloaded{
          [](const CosLinear& g) { return json{{"kind", "cos_linear"}, {"a", g.a}, {"b", g.b}}; },
          [](const GaussBump& g) {
            return json{{"kind", "gauss_bump"}, {"c", g.c}, {"m", g.center}};
          },
          [](const RampIndicator& g) {
            return json{{"kind", "ramp_indicator"}, {"m", g.m}, {"axis", g.axis},
                        {"center", g.center}};
          },
          [k](const TanhPoly& g) {
            json rows = json::array();
            for (std::size_t i = 0; i < k; ++i) {
              rows.push_back(std::vector<double>(g.quadratic.begin() + i * k,
                                                 g.quadratic.begin() + (i + 1) * k));
            }
            return json{{"kind", "tanh_poly"}, {"constant", g.constant}, {"linear", g.linear},
                        {"quadratic", rows}};
          },
          [](const Product& g) {
            json factors = json::array();
            for (const auto& h : g.factors) factors.push_back(integrand_to_json(h));
            return json{{"kind", "product"}, {"factors", factors}};
          },
          [](const AffineCombination& g) {
            json terms = json::array();
            for (const auto& h : g.terms) terms.push_back(integrand_to_json(h));
            return json{{"kind", "affine_combination"}, {"weights", g.weights},
                        {"terms", terms}, {"constant", g.constant}};
          },
      },
      f.kind());
}

}  // namespace slicegauss
