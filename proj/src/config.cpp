#include "slicegauss/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "slicegauss/errors.hpp"

namespace slicegauss {

using nlohmann::json;

namespace {

const std::set<std::string> kAllowedFields{
    "description", "family",     "p",           "k",
    "integrand",   "n_schedule", "samples",     "seed",
    "output",      "n",          "thresholds",  "epsilons",
    "bias_budget", "reference",  "reference_samples",
    "enforce_separation", "tolerance"};

const std::vector<std::string> kRequiredFields{"family",     "p",       "k",    "integrand",
                                               "n_schedule", "samples", "seed", "output"};

std::string at_index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double finite_number(const json& value, const std::string& field) {
  if (!value.is_number()) throw ConfigError(field, "expected a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "expected a finite number");
  return x;
}

std::vector<double> number_list(const json& value, const std::string& field) {
  if (!value.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) out.push_back(finite_number(value[i], at_index(field, i)));
  return out;
}

std::uint64_t unsigned_integer(const json& value, const std::string& field, std::uint64_t minimum) {
  if (value.is_number_unsigned()) {
    const auto x = value.get<std::uint64_t>();
    if (x < minimum) throw ConfigError(field, "must be >= " + std::to_string(minimum));
    return x;
  }
  if (value.is_number_integer()) {
    // Documents built in code store non-negative literals as signed integers.
    const auto x = value.get<std::int64_t>();
    if (x < 0 || static_cast<std::uint64_t>(x) < minimum) {
      throw ConfigError(field, "must be >= " + std::to_string(minimum));
    }
    return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(field, "expected an integer");
}

SequenceVector parse_member(const json& d, const std::string& path) {
  if (!d.is_object()) throw ConfigError(path, "expected a vector descriptor object");
  if (!d.contains("kind") || !d.at("kind").is_string()) {
    throw ConfigError(path + ".kind", "expected \"explicit\" or \"geometric\"");
  }
  const auto kind = d.at("kind").get<std::string>();
  if (kind == "explicit") {
    for (const auto& [key, _] : d.items()) {
      if (key != "kind" && key != "coords") throw ConfigError(path + "." + key, "unknown field");
    }
    if (!d.contains("coords")) throw ConfigError(path + ".coords", "required field is missing");
    return SequenceVector::explicit_coords(number_list(d.at("coords"), path + ".coords"));
  }
  if (kind == "geometric") {
    for (const auto& [key, _] : d.items()) {
      if (key != "kind" && key != "prefix" && key != "scale" && key != "ratio") {
        throw ConfigError(path + "." + key, "unknown field");
      }
    }
    std::vector<double> prefix;
    if (d.contains("prefix")) prefix = number_list(d.at("prefix"), path + ".prefix");
    if (!d.contains("scale")) throw ConfigError(path + ".scale", "required field is missing");
    if (!d.contains("ratio")) throw ConfigError(path + ".ratio", "required field is missing");
    const double scale = finite_number(d.at("scale"), path + ".scale");
    const double ratio = finite_number(d.at("ratio"), path + ".ratio");
    if (!(std::abs(ratio) < 1.0)) throw ConfigError(path + ".ratio", "must satisfy |ratio| < 1");
    return SequenceVector::geometric(std::move(prefix), scale, ratio);
  }
  throw ConfigError(path + ".kind", "unknown vector kind '" + kind + "'");
}

ReferencePreference parse_reference(const json& value) {
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "auto") return ReferencePreference::kAuto;
    if (s == "closed_form") return ReferencePreference::kClosedForm;
    if (s == "quadrature") return ReferencePreference::kQuadrature;
    if (s == "monte_carlo") return ReferencePreference::kMonteCarlo;
  }
  throw ConfigError("reference",
                    "expected one of \"auto\", \"closed_form\", \"quadrature\", \"monte_carlo\"");
}

}  // namespace

OrthonormalFamily ExperimentConfig::family() const { return OrthonormalFamily(members, tolerance); }

std::size_t ExperimentConfig::target_n() const { return n ? *n : n_schedule.back(); }

std::uint64_t config_fingerprint(const json& document) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : document.dump()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

ExperimentConfig parse_config(const json& document) {
  if (!document.is_object()) throw ConfigError("<root>", "expected a JSON object");
  for (const auto& [key, _] : document.items()) {
    if (!kAllowedFields.contains(key)) throw ConfigError(key, "unknown field");
  }
  for (const auto& key : kRequiredFields) {
    if (!document.contains(key)) throw ConfigError(key, "required field is missing");
  }

  ExperimentConfig cfg;
  if (document.contains("description") && !document.at("description").is_string()) {
    throw ConfigError("description", "expected a string");
  }

  const json& family = document.at("family");
  if (!family.is_array()) throw ConfigError("family", "expected an array of vector descriptors");
  for (std::size_t i = 0; i < family.size(); ++i) {
    cfg.members.push_back(parse_member(family[i], at_index("family", i)));
  }

  cfg.p = number_list(document.at("p"), "p");
  if (cfg.p.size() != cfg.members.size()) {
    throw ConfigError("p", "has " + std::to_string(cfg.p.size()) + " entries but family has " +
                               std::to_string(cfg.members.size()) + " members");
  }

  cfg.k = unsigned_integer(document.at("k"), "k", 1);
  if (cfg.k > kMaxAmbientDimension) throw ConfigError("k", "exceeds the dimension cap 2^20");
  cfg.integrand = integrand_from_json(document.at("integrand"), cfg.k);

  const json& schedule = document.at("n_schedule");
  if (!schedule.is_array() || schedule.empty()) {
    throw ConfigError("n_schedule", "expected a non-empty array of integers");
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto n = unsigned_integer(schedule[i], at_index("n_schedule", i), 1);
    if (n > kMaxAmbientDimension) {
      throw ConfigError(at_index("n_schedule", i), "exceeds the dimension cap 2^20");
    }
    if (!cfg.n_schedule.empty() && n <= cfg.n_schedule.back()) {
      throw ConfigError("n_schedule", "must be strictly increasing");
    }
    cfg.n_schedule.push_back(n);
  }

  cfg.samples = unsigned_integer(document.at("samples"), "samples", 100);
  cfg.seed = unsigned_integer(document.at("seed"), "seed", 0);
  if (!document.at("output").is_string() || document.at("output").get<std::string>().empty()) {
    throw ConfigError("output", "expected a non-empty path string");
  }
  cfg.output = document.at("output").get<std::string>();

  if (document.contains("n")) {
    cfg.n = unsigned_integer(document.at("n"), "n", 1);
    if (*cfg.n > kMaxAmbientDimension) throw ConfigError("n", "exceeds the dimension cap 2^20");
  }
  if (document.contains("thresholds")) {
    cfg.thresholds = number_list(document.at("thresholds"), "thresholds");
    for (std::size_t i = 1; i < cfg.thresholds.size(); ++i) {
      if (!(cfg.thresholds[i] > cfg.thresholds[i - 1])) {
        throw ConfigError("thresholds", "must be strictly increasing");
      }
    }
  }
  if (document.contains("epsilons")) {
    cfg.epsilons = number_list(document.at("epsilons"), "epsilons");
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
      if (cfg.epsilons[i] < 0.0) throw ConfigError(at_index("epsilons", i), "must be >= 0");
    }
  }
  if (document.contains("bias_budget")) {
    cfg.bias_budget = finite_number(document.at("bias_budget"), "bias_budget");
    if (cfg.bias_budget < 0.0) throw ConfigError("bias_budget", "must be >= 0");
  }
  if (document.contains("reference")) cfg.reference = parse_reference(document.at("reference"));
  if (document.contains("reference_samples")) {
    cfg.reference_samples = unsigned_integer(document.at("reference_samples"), "reference_samples", 100);
  }
  if (document.contains("enforce_separation")) {
    if (!document.at("enforce_separation").is_boolean()) {
      throw ConfigError("enforce_separation", "expected a boolean");
    }
    cfg.enforce_separation = document.at("enforce_separation").get<bool>();
  }
  if (document.contains("tolerance")) {
    cfg.tolerance = finite_number(document.at("tolerance"), "tolerance");
    if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance", "must be > 0");
  }

  cfg.source = document;
  cfg.fingerprint = config_fingerprint(document);
  return cfg;
}

json read_config_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return json::parse(text.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_config_document(path));
}

}  // namespace slicegauss
