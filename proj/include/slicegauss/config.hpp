#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicegauss/harness.hpp"
#include "slicegauss/integrands.hpp"
#include "slicegauss/vectors.hpp"

namespace slicegauss {

// A parsed experiment config. Family members are kept as plain sequence
// vectors: `perturb` accepts arbitrary (even nearly dependent) bases, every
// other command asks for the validated orthonormal family.
struct ExperimentConfig {
  std::vector<SequenceVector> members;
  std::vector<double> p;
  std::size_t k = 1;
  Integrand integrand = Integrand::constant_one(1);
  std::vector<std::size_t> n_schedule;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::filesystem::path output;

  std::optional<std::size_t> n;
  std::vector<double> thresholds{2.0, 3.0, 4.0, 6.0};
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
  double bias_budget = 0.01;
  ReferencePreference reference = ReferencePreference::kAuto;
  std::size_t reference_samples = 1000000;
  bool enforce_separation = true;
  double tolerance = kDefaultOrthonormalityTolerance;

  nlohmann::json source;  // the validated document (after overrides)
  std::uint64_t fingerprint = 0;

  // Throws InvalidFamily when the members are not orthonormal within tolerance.
  OrthonormalFamily family() const;
  // The single dimension used by geometry/integrate/tails/perturb/rotate:
  // "n" when present, otherwise the last entry of n_schedule.
  std::size_t target_n() const;
};

// FNV-1a 64 of the compact dump (object keys are sorted by nlohmann::json).
std::uint64_t config_fingerprint(const nlohmann::json& document);

// Validates the document against the shipped schema rules; throws
// ConfigError naming the first offending field.
ExperimentConfig parse_config(const nlohmann::json& document);

// Reads and parses a config file. IoError when unreadable, ConfigError on
// malformed JSON or schema violations.
nlohmann::json read_config_document(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace slicegauss
