#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicegauss/errors.hpp"
#include "slicegauss/gaussian.hpp"
#include "slicegauss/integrands.hpp"
#include "slicegauss/slice_geometry.hpp"

namespace slicegauss {

enum class ReferenceMethod { kClosedForm, kQuadrature, kMonteCarlo };
enum class ReferencePreference { kAuto, kClosedForm, kQuadrature, kMonteCarlo };

std::string to_string(ReferenceMethod method);

struct GaussianReference {
  double value = 0.0;
  double std_error = 0.0;
  ReferenceMethod method = ReferenceMethod::kClosedForm;
};

// The n-independent limit: closed form when the integrand allows it, Hermite
// quadrature when rank <= 3, Monte Carlo otherwise (unless a method is forced).
GaussianReference gaussian_reference(const GaussianSpec& spec, const Integrand& f,
                                     ReferencePreference preference, std::size_t mc_samples,
                                     std::uint64_t seed, unsigned threads);

struct ConvergenceRow {
  std::size_t n = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double gaussian_ref = 0.0;
  ReferenceMethod ref_method = ReferenceMethod::kClosedForm;
  double abs_error = 0.0;
  // Set when the slice could not be built at this n (EmptySlice, DegenerateFrame, ...).
  std::optional<ExitCode> failure_code;
  std::string failure;

  bool ok() const noexcept { return !failure_code.has_value(); }
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // ascending n
  std::uint64_t fingerprint = 0;
  std::uint64_t seed = 0;
  GaussianReference reference;
  double bias_budget = 0.01;
  // abs_error at the largest n against 3 * SE + bias_budget.
  double final_tolerance = 0.0;
  bool final_pass = false;
};

struct SweepConfig {
  OrthonormalFamily family;
  std::vector<double> p;
  Integrand f = Integrand::constant_one(1);
  std::vector<std::size_t> n_schedule;
  std::size_t samples = 200000;
  std::uint64_t seed = 0;
  double bias_budget = 0.01;
  ReferencePreference reference = ReferencePreference::kAuto;
  std::size_t reference_mc_samples = 1000000;
  unsigned threads = 1;
  std::uint64_t fingerprint = 0;
};

ConvergenceReport convergence_sweep(const SweepConfig& config);

struct RotationRow {
  double epsilon = 0.0;
  double difference = 0.0;  // |a_f(v') - a_f(v)| under common random numbers
  double std_error = 0.0;
};

struct RotationReport {
  std::vector<RotationRow> rows;
  double base_separation = 0.0;
  bool monotone = true;  // nonincreasing down the list within 2 SE
};

// Perturbs the truncations v = (u_i)_(n) to v + eps * d_i with fixed random
// unit directions d_i and compares slice integrals sample by sample.
// Throws SeparationLost when a perturbation halves the separation.
RotationReport rotation_stability_study(const SliceSpec& spec, const Integrand& f,
                                        std::span<const double> epsilons, std::size_t count,
                                        std::uint64_t seed, unsigned threads = 1);

struct PerturbationRow {
  double epsilon = 0.0;
  double max_difference = 0.0;  // max_i |w_i - z_i|
  double ratio = 0.0;           // max_difference / epsilon (0 at epsilon = 0)
};

struct PerturbationReport {
  std::vector<PerturbationRow> rows;
  double base_separation = 0.0;
  double band_factor = 1.0;  // max ratio / min ratio over epsilon > 0
  bool band_ok = true;       // band_factor <= 4
};

struct PerturbationOptions {
  // When set, a base separation below 1e-3 or a perturbed family with less
  // than half the base separation raises SeparationLost.
  bool enforce_separation = true;
  // Optional explicit directions (same shape as base); random unit columns otherwise.
  std::optional<Matrix> directions;
};

PerturbationReport gs_perturbation_study(const Matrix& base, std::span<const double> epsilons,
                                         std::uint64_t seed,
                                         const PerturbationOptions& options = {});

struct TailRow {
  double threshold = 0.0;
  double fraction = 0.0;  // empirical P(|x_1| > t)
  double std_error = 0.0;
  double envelope = 0.0;  // 2 exp(-t^2/4) + 5 SE
  bool within_envelope = true;
};

struct TailReport {
  std::vector<TailRow> rows;
  bool monotone = true;
  bool all_within = true;
};

TailReport tail_study(const SliceGeometry& geometry, std::span<const double> thresholds,
                      std::size_t count, std::uint64_t seed, unsigned threads = 1);

// Shortest round-trip-safe representation at 17 significant digits,
// independent of the C locale.
std::string format_double(double value);

std::string convergence_csv(const ConvergenceReport& report);
std::string convergence_svg(const ConvergenceReport& report);
std::string rotation_csv(const RotationReport& report);
std::string perturbation_csv(const PerturbationReport& report);
std::string tail_csv(const TailReport& report);

// Writes text with LF endings; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
void emit_csv(const ConvergenceReport& report, const std::filesystem::path& path);
void emit_svg(const ConvergenceReport& report, const std::filesystem::path& path);

}  // namespace slicegauss
