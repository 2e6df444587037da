#include "slicegauss/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "slicegauss/parallel.hpp"
#include "slicegauss/random_stream.hpp"

namespace slicegauss {

std::string to_string(ReferenceMethod method) {
  switch (method) {
    case ReferenceMethod::kClosedForm:
      return "closed_form";
    case ReferenceMethod::kQuadrature:
      return "quadrature";
    case ReferenceMethod::kMonteCarlo:
      return "monte_carlo";
  }
  return "unknown";
}

GaussianReference gaussian_reference(const GaussianSpec& spec, const Integrand& f,
                                     ReferencePreference preference, std::size_t mc_samples,
                                     std::uint64_t seed, unsigned threads) {
  if (preference == ReferencePreference::kAuto) {
    if (has_closed_form(f)) {
      preference = ReferencePreference::kClosedForm;
    } else if (spec.rank() <= 3) {
      preference = ReferencePreference::kQuadrature;
    } else {
      preference = ReferencePreference::kMonteCarlo;
    }
  }
  GaussianReference ref;
  switch (preference) {
    case ReferencePreference::kClosedForm:
      ref.value = gaussian_expectation(spec, f, ClosedForm{}).value;
      ref.method = ReferenceMethod::kClosedForm;
      break;
    case ReferencePreference::kQuadrature:
      ref.value = gaussian_expectation(spec, f, HermiteQuadrature{}).value;
      ref.method = ReferenceMethod::kQuadrature;
      break;
    default: {
      const auto e = gaussian_expectation(spec, f, MonteCarlo{mc_samples, seed, threads});
      ref.value = e.value;
      ref.std_error = e.std_error;
      ref.method = ReferenceMethod::kMonteCarlo;
    }
  }
  return ref;
}

ConvergenceReport convergence_sweep(const SweepConfig& config) {
  const std::size_t gamma = config.family.gamma();
  const std::size_t k = config.f.k();
  if (config.p.size() != gamma) throw DimensionMismatch("p must have one entry per family member");
  if (config.n_schedule.empty()) throw InvalidArgument("n_schedule must not be empty");
  for (std::size_t i = 0; i < config.n_schedule.size(); ++i) {
    const std::size_t n = config.n_schedule[i];
    if (i > 0 && n <= config.n_schedule[i - 1]) {
      throw InvalidArgument("n_schedule must be strictly increasing");
    }
    if (n <= gamma || n < k) throw InvalidArgument("every n must exceed gamma and be >= k");
  }
  if (config.samples == 0) throw InvalidArgument("samples must be >= 1");

  ConvergenceReport report;
  report.seed = config.seed;
  report.fingerprint = config.fingerprint;
  report.bias_budget = config.bias_budget;

  const GaussianSpec limit = covariance_from_family(config.family, k, config.p);
  report.reference = gaussian_reference(limit, config.f, config.reference,
                                        config.reference_mc_samples, config.seed, config.threads);

  for (const std::size_t n : config.n_schedule) {
    ConvergenceRow row;
    row.n = n;
    row.gaussian_ref = report.reference.value;
    row.ref_method = report.reference.method;
    try {
      const SliceSpec spec{config.family, config.p, n, k};
      const auto est = slice_integral_mc(build_geometry(spec), config.f, config.samples,
                                         config.seed, config.threads);
      row.estimate = est.estimate;
      row.std_error = est.std_error;
      row.abs_error = std::abs(row.estimate - row.gaussian_ref);
    } catch (const Error& e) {
      if (e.exit_code() != ExitCode::kInfeasibleSlice) throw;
      row.failure_code = e.exit_code();
      row.failure = e.what();
      row.estimate = row.std_error = row.abs_error = std::numeric_limits<double>::quiet_NaN();
    }
    report.rows.push_back(std::move(row));
  }

  const ConvergenceRow& last = report.rows.back();
  if (last.ok()) {
    const double se = std::hypot(last.std_error, report.reference.std_error);
    report.final_tolerance = 3.0 * se + config.bias_budget;
    report.final_pass = last.abs_error <= report.final_tolerance;
  }
  return report;
}

namespace {

Matrix random_unit_columns(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Matrix d(rows, cols);
  const std::uint64_t stream_seed = domain_seed(seed, StreamDomain::kPerturbation);
  for (Eigen::Index j = 0; j < cols; ++j) {
    NormalStream normals(stream_seed, static_cast<std::uint64_t>(j));
    for (Eigen::Index i = 0; i < rows; ++i) d(i, j) = normals();
    d.col(j).normalize();
  }
  return d;
}

}  // namespace

RotationReport rotation_stability_study(const SliceSpec& spec, const Integrand& f,
                                        std::span<const double> epsilons, std::size_t count,
                                        std::uint64_t seed, unsigned threads) {
  if (!f.uniformly_continuous()) {
    throw InvalidArgument("rotation study needs a uniformly continuous integrand");
  }
  if (f.k() != spec.k) throw DimensionMismatch("integrand dimension must equal spec.k");
  const SliceGeometry base_geometry = build_geometry(spec);
  const Matrix& base = base_geometry.frame.columns;
  RotationReport report;
  report.base_separation = base.cols() > 0 ? separation(base) : 0.0;

  const auto base_values = slice_integrand_values(base_geometry, f, count, seed, threads);
  const Matrix directions = random_unit_columns(base.rows(), base.cols(), seed);

  for (const double eps : epsilons) {
    const Matrix perturbed = base + eps * directions;
    if (base.cols() > 0 && separation(perturbed) < 0.5 * report.base_separation) {
      throw SeparationLost("perturbation eps=" + format_double(eps) +
                           " drops separation below half of the base value");
    }
    const SliceGeometry geometry = build_geometry(perturbed, spec.p);
    const auto values = slice_integrand_values(geometry, f, count, seed, threads);
    std::vector<double> diffs(count);
    for (std::size_t i = 0; i < count; ++i) diffs[i] = values[i] - base_values[i];
    const auto est = mean_and_std_error(diffs);
    report.rows.push_back({eps, std::abs(est.mean), est.std_error});
  }
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto& prev = report.rows[i - 1];
    const auto& cur = report.rows[i];
    const double slack = 2.0 * std::max(prev.std_error, cur.std_error);
    if (cur.epsilon < prev.epsilon && cur.difference > prev.difference + slack) {
      report.monotone = false;
    }
  }
  return report;
}

PerturbationReport gs_perturbation_study(const Matrix& base, std::span<const double> epsilons,
                                         std::uint64_t seed, const PerturbationOptions& options) {
  PerturbationReport report;
  report.base_separation = separation(base);
  if (options.enforce_separation && report.base_separation < 1e-3) {
    throw SeparationLost("base family separation " + format_double(report.base_separation) +
                         " is below 1e-3");
  }
  const Matrix directions =
      options.directions ? *options.directions : random_unit_columns(base.rows(), base.cols(), seed);
  if (directions.rows() != base.rows() || directions.cols() != base.cols()) {
    throw DimensionMismatch("perturbation directions must match the base shape");
  }
  const Matrix w = gram_schmidt(base);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const double eps : epsilons) {
    const Matrix perturbed = base + eps * directions;
    if (options.enforce_separation && separation(perturbed) < 0.5 * report.base_separation) {
      throw SeparationLost("perturbation eps=" + format_double(eps) +
                           " drops separation below half of the base value");
    }
    const Matrix z = gram_schmidt(perturbed);
    double max_diff = 0.0;
    for (Eigen::Index i = 0; i < w.cols(); ++i) {
      max_diff = std::max(max_diff, (w.col(i) - z.col(i)).norm());
    }
    PerturbationRow row{eps, max_diff, eps > 0.0 ? max_diff / eps : 0.0};
    if (eps > 0.0) {
      lo = std::min(lo, row.ratio);
      hi = std::max(hi, row.ratio);
    }
    report.rows.push_back(row);
  }
  if (hi > 0.0) {
    report.band_factor = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    report.band_ok = report.band_factor <= 4.0;
  }
  return report;
}

TailReport tail_study(const SliceGeometry& geometry, std::span<const double> thresholds,
                      std::size_t count, std::uint64_t seed, unsigned threads) {
  if (count == 0) throw InvalidArgument("sample count must be >= 1");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw InvalidArgument("thresholds must be strictly increasing");
    }
  }
  std::vector<double> first(count);
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    visit_slice_samples(geometry, begin, end, seed,
                        [&](std::size_t i, std::span<const double> x) { first[i] = std::abs(x[0]); });
  });
  TailReport report;
  std::vector<double> indicator(count);
  for (const double t : thresholds) {
    for (std::size_t i = 0; i < count; ++i) indicator[i] = first[i] > t ? 1.0 : 0.0;
    const auto est = mean_and_std_error(indicator);
    TailRow row;
    row.threshold = t;
    row.fraction = est.mean;
    row.std_error = est.std_error;
    row.envelope = 2.0 * std::exp(-t * t / 4.0) + 5.0 * est.std_error;
    row.within_envelope = row.fraction <= row.envelope;
    if (!report.rows.empty() && row.fraction > report.rows.back().fraction) report.monotone = false;
    report.all_within = report.all_within && row.within_envelope;
    report.rows.push_back(row);
  }
  return report;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::string out = "n,estimate,std_error,gaussian_ref,ref_method,abs_error\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.n) + ',' + format_double(row.estimate) + ',' +
           format_double(row.std_error) + ',' + format_double(row.gaussian_ref) + ',' +
           to_string(row.ref_method) + ',' + format_double(row.abs_error) + '\n';
  }
  return out;
}

namespace {

std::string fixed(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string convergence_svg(const ConvergenceReport& report) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 400.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 20.0;
  constexpr double kBottom = 50.0;
  constexpr double kFloor = 1e-17;

  std::vector<std::pair<double, double>> pts;
  for (const auto& row : report.rows) {
    if (!row.ok()) continue;
    pts.emplace_back(std::log10(static_cast<double>(row.n)),
                     std::log10(std::max(row.abs_error, kFloor)));
  }
  double x0 = 0.0, x1 = 1.0, y0 = -3.0, y1 = 0.0;
  if (!pts.empty()) {
    x0 = std::floor(pts.front().first);
    x1 = std::ceil(pts.back().first);
    y0 = std::numeric_limits<double>::infinity();
    y1 = -y0;
    for (const auto& [x, y] : pts) {
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    y0 = std::floor(y0);
    y1 = std::ceil(y1);
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); };
  const auto sy = [&](double y) {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
  svg << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kHeight - kBottom) << "\" x2=\""
      << fixed(kWidth - kRight) << "\" y2=\"" << fixed(kHeight - kBottom)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(kLeft)
      << "\" y2=\"" << fixed(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
  for (double e = x0; e <= x1 + 0.5; e += 1.0) {
    svg << "<text x=\"" << fixed(sx(e)) << "\" y=\"" << fixed(kHeight - kBottom + 18)
        << "\" font-size=\"12\" text-anchor=\"middle\">1e" << static_cast<int>(e) << "</text>\n";
  }
  for (double e = y0; e <= y1 + 0.5; e += 1.0) {
    svg << "<text x=\"" << fixed(kLeft - 8) << "\" y=\"" << fixed(sy(e) + 4)
        << "\" font-size=\"12\" text-anchor=\"end\">1e" << static_cast<int>(e) << "</text>\n";
  }
  svg << "<text x=\"" << fixed(0.5 * (kLeft + kWidth - kRight)) << "\" y=\"" << fixed(kHeight - 10)
      << "\" font-size=\"13\" text-anchor=\"middle\">n</text>\n";
  svg << "<text x=\"16\" y=\"" << fixed(0.5 * (kTop + kHeight - kBottom))
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fixed(0.5 * (kTop + kHeight - kBottom)) << ")\">abs_error</text>\n";
  if (!pts.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      svg << (i ? " " : "") << fixed(sx(pts[i].first)) << ',' << fixed(sy(pts[i].second));
    }
    svg << "\"/>\n";
    for (const auto& [x, y] : pts) {
      svg << "<circle cx=\"" << fixed(sx(x)) << "\" cy=\"" << fixed(sy(y))
          << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string rotation_csv(const RotationReport& report) {
  std::string out = "epsilon,difference,std_error\n";
  for (const auto& r : report.rows) {
    out += format_double(r.epsilon) + ',' + format_double(r.difference) + ',' +
           format_double(r.std_error) + '\n';
  }
  return out;
}

std::string perturbation_csv(const PerturbationReport& report) {
  std::string out = "epsilon,max_difference,ratio\n";
  for (const auto& r : report.rows) {
    out += format_double(r.epsilon) + ',' + format_double(r.max_difference) + ',' +
           format_double(r.ratio) + '\n';
  }
  return out;
}

std::string tail_csv(const TailReport& report) {
  std::string out = "threshold,fraction,std_error,envelope,within_envelope\n";
  for (const auto& r : report.rows) {
    out += format_double(r.threshold) + ',' + format_double(r.fraction) + ',' +
           format_double(r.std_error) + ',' + format_double(r.envelope) + ',' +
           (r.within_envelope ? "true" : "false") + '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void emit_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
  write_text_file(path, convergence_csv(report));
}

void emit_svg(const ConvergenceReport& report, const std::filesystem::path& path) {
  write_text_file(path, convergence_svg(report));
}

}  // namespace slicegauss
