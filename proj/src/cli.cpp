#include "slicegauss/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "slicegauss/checks.hpp"
#include "slicegauss/config.hpp"
#include "slicegauss/errors.hpp"
#include "slicegauss/harness.hpp"
#include "slicegauss/parallel.hpp"
#include "slicegauss/slice_geometry.hpp"

namespace slicegauss::cli {

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string output;
};

struct Context {
  ExperimentConfig config;
  std::filesystem::path output;
  unsigned threads = 1;
};

Context prepare(const CommonOptions& opts) {
  json document = read_config_document(opts.config);
  if (opts.seed) {
    if (!document.is_object()) throw ConfigError("<root>", "expected a JSON object");
    document["seed"] = *opts.seed;
  }
  Context ctx;
  ctx.config = parse_config(document);
  ctx.output = opts.output.empty() ? ctx.config.output : std::filesystem::path(opts.output);
  ctx.threads = resolve_threads(opts.threads.value_or(0));
  return ctx;
}

std::string hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) s[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
  return s;
}

std::filesystem::path svg_path(std::filesystem::path csv) { return csv.replace_extension(".svg"); }

SweepConfig sweep_config(const Context& ctx, std::vector<std::size_t> schedule) {
  const ExperimentConfig& c = ctx.config;
  SweepConfig s;
  s.family = c.family();
  s.p = c.p;
  s.f = c.integrand;
  s.n_schedule = std::move(schedule);
  s.samples = c.samples;
  s.seed = c.seed;
  s.bias_budget = c.bias_budget;
  s.reference = c.reference;
  s.reference_mc_samples = c.reference_samples;
  s.threads = ctx.threads;
  s.fingerprint = c.fingerprint;
  return s;
}

int report_sweep(const ConvergenceReport& report, std::ostream& out, std::ostream& err) {
  out << "fingerprint " << hex(report.fingerprint) << " seed " << report.seed << '\n';
  out << "reference " << format_double(report.reference.value) << " ("
      << to_string(report.reference.method) << ")\n";
  bool failed = false;
  for (const auto& row : report.rows) {
    if (!row.ok()) {
      failed = true;
      err << "error: n=" << row.n << ": " << row.failure << '\n';
      continue;
    }
    out << "n=" << row.n << " estimate " << format_double(row.estimate) << " se "
        << format_double(row.std_error) << " abs_error " << format_double(row.abs_error) << '\n';
  }
  if (report.rows.back().ok()) {
    out << "final abs_error " << format_double(report.rows.back().abs_error) << " tolerance "
        << format_double(report.final_tolerance) << (report.final_pass ? " PASS" : " FAIL") << '\n';
  }
  return failed ? static_cast<int>(ExitCode::kInfeasibleSlice) : 0;
}

int cmd_converge(const Context& ctx, std::ostream& out, std::ostream& err) {
  const auto report = convergence_sweep(sweep_config(ctx, ctx.config.n_schedule));
  emit_csv(report, ctx.output);
  emit_svg(report, svg_path(ctx.output));
  return report_sweep(report, out, err);
}

int cmd_integrate(const Context& ctx, std::ostream& out, std::ostream& err) {
  const auto report = convergence_sweep(sweep_config(ctx, {ctx.config.target_n()}));
  emit_csv(report, ctx.output);
  return report_sweep(report, out, err);
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

int cmd_geometry(const Context& ctx, std::ostream& out, std::ostream&) {
  const ExperimentConfig& c = ctx.config;
  const SliceSpec spec{c.family(), c.p, c.target_n(), c.k};
  const SliceGeometry g = build_geometry(spec);
  json doc;
  doc["n"] = g.n;
  doc["gamma"] = g.gamma();
  doc["k"] = c.k;
  doc["theta_star"] = vector_json(g.center);
  doc["q"] = vector_json(g.q);
  doc["radius"] = g.radius;
  doc["r_n"] = g.scale_ratio;
  doc["separation"] = g.gamma() > 0 ? json(separation(g.frame.columns)) : json(nullptr);
  try {
    const Vector theta_n = summed_center(spec);
    doc["theta_n"] = vector_json(theta_n);
    doc["center_discrepancy"] = (theta_n - g.center).norm();
  } catch (const ZeroTruncation& e) {
    doc["theta_n"] = nullptr;
    doc["center_discrepancy"] = nullptr;
    doc["theta_n_error"] = e.what();
  }
  out << doc.dump(2) << '\n';
  return 0;
}

int cmd_tails(const Context& ctx, std::ostream& out, std::ostream&) {
  const ExperimentConfig& c = ctx.config;
  const SliceGeometry g = build_geometry(SliceSpec{c.family(), c.p, c.target_n(), c.k});
  const auto report = tail_study(g, c.thresholds, c.samples, c.seed, ctx.threads);
  write_text_file(ctx.output, tail_csv(report));
  for (const auto& row : report.rows) {
    out << "t=" << format_double(row.threshold) << " fraction " << format_double(row.fraction)
        << " envelope " << format_double(row.envelope) << (row.within_envelope ? "" : " EXCEEDED")
        << '\n';
  }
  out << "monotone " << (report.monotone ? "yes" : "no") << '\n';
  return 0;
}

int cmd_perturb(const Context& ctx, std::ostream& out, std::ostream&) {
  const ExperimentConfig& c = ctx.config;
  const std::size_t n = c.target_n();
  Matrix base(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c.members.size()));
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    base.col(static_cast<Eigen::Index>(i)) = truncate(c.members[i], n).coords;
  }
  PerturbationOptions options;
  options.enforce_separation = c.enforce_separation;
  const auto report = gs_perturbation_study(base, c.epsilons, c.seed, options);
  write_text_file(ctx.output, perturbation_csv(report));
  out << "base separation " << format_double(report.base_separation) << '\n';
  for (const auto& row : report.rows) {
    out << "eps=" << format_double(row.epsilon) << " max_difference "
        << format_double(row.max_difference) << " ratio " << format_double(row.ratio) << '\n';
  }
  out << "band factor " << format_double(report.band_factor) << (report.band_ok ? " ok" : " WIDE")
      << '\n';
  return 0;
}

int cmd_rotate(const Context& ctx, std::ostream& out, std::ostream&) {
  const ExperimentConfig& c = ctx.config;
  const SliceSpec spec{c.family(), c.p, c.target_n(), c.k};
  const auto report =
      rotation_stability_study(spec, c.integrand, c.epsilons, c.samples, c.seed, ctx.threads);
  write_text_file(ctx.output, rotation_csv(report));
  for (const auto& row : report.rows) {
    out << "eps=" << format_double(row.epsilon) << " difference " << format_double(row.difference)
        << " se " << format_double(row.std_error) << '\n';
  }
  out << "monotone " << (report.monotone ? "yes" : "no") << '\n';
  return 0;
}

int cmd_check(std::optional<unsigned> threads, std::ostream& out) {
  checks::CheckOptions options;
  options.threads = resolve_threads(threads.value_or(0));
  int failures = checks::run_checks(checks::invariant_checks(), options, out);
  failures += checks::run_checks(checks::acceptance_checks(), options, out);
  out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed")
      << '\n';
  return failures == 0 ? 0 : static_cast<int>(ExitCode::kNumericalFailure);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uniform integrals over sphere slices and their Gaussian limits", "slicegauss"};
  app.require_subcommand(1);

  using Handler = int (*)(const Context&, std::ostream&, std::ostream&);
  struct Command {
    const char* name;
    const char* help;
    Handler handler;
  };
  const Command commands[] = {
      {"geometry", "Print the slice geometry at n as JSON", cmd_geometry},
      {"integrate", "Slice Monte Carlo at a single n against the Gaussian reference", cmd_integrate},
      {"converge", "Convergence sweep over n_schedule (CSV and SVG)", cmd_converge},
      {"tails", "Empirical tail fractions P(|x_1| > t)", cmd_tails},
      {"perturb", "Gram-Schmidt perturbation study", cmd_perturb},
      {"rotate", "Rotation stability study", cmd_rotate},
  };

  CommonOptions opts;
  std::optional<unsigned> check_threads;
  Handler selected = nullptr;
  bool check_selected = false;

  auto* check = app.add_subcommand("check", "Run the invariant and acceptance suite");
  check->add_option("--threads", check_threads, "Worker threads")->check(CLI::PositiveNumber);
  check->callback([&] { check_selected = true; });

  for (const auto& command : commands) {
    auto* sub = app.add_subcommand(command.name, command.help);
    sub->add_option("--config", opts.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", opts.seed, "Override the config seed");
    sub->add_option("--threads", opts.threads, "Worker threads (default: SLICE_GAUSS_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output", opts.output, "Override the config output path");
    const Handler handler = command.handler;
    sub->callback([&selected, handler] { selected = handler; });
  }

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kInvalidConfig);
  }

  try {
    if (check_selected) return cmd_check(check_threads, out);
    const Context ctx = prepare(opts);
    return selected(ctx, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kInvalidConfig);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kIoError);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kNumericalFailure);
  }
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace slicegauss::cli
