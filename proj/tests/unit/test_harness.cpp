#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slicegauss/errors.hpp"
#include "slicegauss/harness.hpp"

using namespace slicegauss;

namespace {

SequenceVector coords(std::vector<double> c) { return SequenceVector::explicit_coords(std::move(c)); }

SweepConfig degenerate_sweep() {
  SweepConfig c;
  c.family = OrthonormalFamily({coords({0.6, 0.8})});
  c.p = {1.0};
  c.f = Integrand::cos_linear({1.0, 0.0}, 0.0);
  c.n_schedule = {64, 256, 1024};
  c.samples = 50000;
  c.seed = 20240611;
  return c;
}

// Classical Gram-Schmidt written out directly.
Matrix classical_gs(const Matrix& v) {
  Matrix q = v;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(v.col(j)) * q.col(i);
    q.col(j).normalize();
  }
  return q;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (const char c : s) n += c == '\n' ? 1 : 0;
  return n;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("slicegauss_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gaussian_reference picks the cheapest available method") {
  const GaussianSpec spec(Vector::Constant(1, 0.6), Matrix::Constant(1, 1, 0.64));
  const auto cf = gaussian_reference(spec, Integrand::cos_linear({1.0}, 0.0), ReferencePreference::kAuto,
                                     1000, 1, 1);
  CHECK(cf.method == ReferenceMethod::kClosedForm);
  CHECK(cf.value == doctest::Approx(0.5993166620292855).epsilon(1e-14));
  CHECK(cf.std_error == 0.0);

  const auto quad = gaussian_reference(spec, Integrand::ramp_indicator(1, 2.0, 0),
                                       ReferencePreference::kAuto, 1000, 1, 1);
  CHECK(quad.method == ReferenceMethod::kQuadrature);
  CHECK(quad.value > 0.5);
  CHECK(quad.value < 1.0);

  const auto mc = gaussian_reference(spec, Integrand::cos_linear({1.0}, 0.0),
                                     ReferencePreference::kMonteCarlo, 100000, 3, 1);
  CHECK(mc.method == ReferenceMethod::kMonteCarlo);
  CHECK(std::abs(mc.value - cf.value) <= 4.0 * mc.std_error);

  CHECK(to_string(ReferenceMethod::kClosedForm) == "closed_form");
  CHECK(to_string(ReferenceMethod::kQuadrature) == "quadrature");
  CHECK(to_string(ReferenceMethod::kMonteCarlo) == "monte_carlo");
}

TEST_CASE("convergence sweep on the degenerate-support family") {
  const auto report = convergence_sweep(degenerate_sweep());
  REQUIRE(report.rows.size() == 3);
  CHECK(report.reference.method == ReferenceMethod::kClosedForm);
  CHECK(report.reference.value == doctest::Approx(std::cos(0.6) * std::exp(-0.32)).epsilon(1e-14));
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    CHECK(row.ok());
    CHECK(row.n == degenerate_sweep().n_schedule[i]);
    CHECK(row.gaussian_ref == report.reference.value);
    CHECK(row.abs_error == std::abs(row.estimate - row.gaussian_ref));
    CHECK(row.std_error > 0.0);
  }
  CHECK(report.final_pass);
  CHECK(report.final_tolerance == doctest::Approx(3.0 * report.rows.back().std_error + 0.01));
  CHECK(report.rows.back().abs_error <= report.final_tolerance);
}

TEST_CASE("a constant integrand gives exact rows") {
  SweepConfig c = degenerate_sweep();
  c.f = Integrand::constant_one(2);
  c.samples = 1000;
  const auto report = convergence_sweep(c);
  for (const auto& row : report.rows) {
    CHECK(row.estimate == 1.0);
    CHECK(row.std_error == 0.0);
    CHECK(row.abs_error == 0.0);
  }
  CHECK(report.final_pass);
}

TEST_CASE("rows that cannot be built are recorded, not fatal") {
  SweepConfig c;
  c.family = OrthonormalFamily({coords({1.0})});
  c.p = {5.0};
  c.f = Integrand::cos_linear({1.0}, 0.0);
  c.n_schedule = {16, 64};
  c.samples = 2000;
  const auto report = convergence_sweep(c);
  REQUIRE(report.rows.size() == 2);
  CHECK_FALSE(report.rows[0].ok());
  CHECK(*report.rows[0].failure_code == ExitCode::kInfeasibleSlice);
  CHECK(std::isnan(report.rows[0].estimate));
  CHECK(report.rows[1].ok());
  const std::string csv = convergence_csv(report);
  CHECK(csv.find("16,nan") != std::string::npos);
}

TEST_CASE("sweep input validation") {
  SweepConfig c = degenerate_sweep();
  c.samples = 100;
  c.n_schedule = {};
  CHECK_THROWS(convergence_sweep(c));
  c.n_schedule = {64, 64};
  CHECK_THROWS(convergence_sweep(c));
  c.n_schedule = {256, 64};
  CHECK_THROWS(convergence_sweep(c));
  c.n_schedule = {1, 64};
  CHECK_THROWS(convergence_sweep(c));
  c.n_schedule = {64};
  c.p = {1.0, 2.0};
  CHECK_THROWS_AS(convergence_sweep(c), DimensionMismatch);
  c.p = {1.0};
  c.samples = 0;
  CHECK_THROWS(convergence_sweep(c));
}

TEST_CASE("sweeps are deterministic across worker counts") {
  SweepConfig c = degenerate_sweep();
  c.samples = 20000;
  const auto a = convergence_sweep(c);
  c.threads = 4;
  const auto b = convergence_sweep(c);
  CHECK(convergence_csv(a) == convergence_csv(b));
  CHECK(convergence_svg(a) == convergence_svg(b));
}

TEST_CASE("rotation stability") {
  const OrthonormalFamily family({coords({0.6, 0.8}), coords({0.0, 0.0, 1.0})});
  const SliceSpec spec{family, {0.5, -0.5}, 64, 2};
  const auto f = Integrand::cos_linear({1.0, 0.5}, 0.0);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 0.0};
  const auto report = rotation_stability_study(spec, f, eps, 20000, 5);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.base_separation == doctest::Approx(1.0));
  CHECK(report.monotone);
  CHECK(report.rows[3].difference == 0.0);
  CHECK(report.rows[3].std_error == 0.0);
  CHECK(report.rows[0].difference > report.rows[2].difference);
  CHECK(report.rows[2].difference <= 1e-2);

  const auto again = rotation_stability_study(spec, f, eps, 20000, 5, 3);
  CHECK(rotation_csv(report) == rotation_csv(again));

  const auto wild = Integrand::tanh_poly(2, 0.0, {}, {0.0, 1.0, 1.0, 0.0});
  CHECK_THROWS_AS(rotation_stability_study(spec, wild, eps, 100, 5), InvalidArgument);
  CHECK_THROWS_AS(rotation_stability_study(spec, Integrand::constant_one(3), eps, 100, 5), DimensionMismatch);
}

TEST_CASE("Gram-Schmidt perturbation study") {
  Matrix base = Matrix::Zero(4, 2);
  base(0, 0) = 1.0;
  base(1, 1) = 1.0;
  Matrix dirs = Matrix::Zero(4, 2);
  dirs(2, 0) = 1.0;
  dirs(3, 1) = 1.0;
  PerturbationOptions opts;
  opts.directions = dirs;
  const std::vector<double> eps{1e-1, 1e-3, 1e-5, 0.0};
  const auto report = gs_perturbation_study(base, eps, 1, opts);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[3].max_difference == 0.0);
  CHECK(report.rows[3].ratio == 0.0);

  // Oracle: central finite difference of classical Gram-Schmidt along the directions.
  const double h = 1e-6;
  const Matrix deriv = (classical_gs(base + h * dirs) - classical_gs(base - h * dirs)) / (2.0 * h);
  double oracle = 0.0;
  for (Eigen::Index j = 0; j < deriv.cols(); ++j) oracle = std::max(oracle, deriv.col(j).norm());
  CHECK(oracle == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(report.rows[2].ratio == doctest::Approx(oracle).epsilon(1e-4));
  CHECK(report.rows[1].ratio == doctest::Approx(oracle).epsilon(1e-4));
  CHECK(report.band_ok);
  CHECK(report.band_factor < 1.01);

  const auto random = gs_perturbation_study(base, std::vector<double>{1e-2, 1e-4, 1e-6}, 7);
  CHECK(random.band_ok);
  for (const auto& row : random.rows) CHECK(row.max_difference <= 4.0 * row.epsilon);

  Matrix bad = Matrix::Zero(8, 2);
  bad(0, 0) = 1.0;
  bad(0, 1) = std::cos(1e-9);
  bad(1, 1) = std::sin(1e-9);
  CHECK_THROWS_AS(gs_perturbation_study(bad, eps, 9), SeparationLost);
  PerturbationOptions loose;
  loose.enforce_separation = false;
  const auto control = gs_perturbation_study(bad, std::vector<double>{1e-2, 1e-4, 1e-6}, 9, loose);
  for (const auto& row : control.rows) CHECK(row.max_difference >= 0.1);

  PerturbationOptions mismatched;
  mismatched.directions = Matrix::Zero(4, 1);
  CHECK_THROWS_AS(gs_perturbation_study(base, eps, 1, mismatched), DimensionMismatch);
}

TEST_CASE("tail study") {
  const SliceGeometry g = build_geometry(SliceSpec{OrthonormalFamily(), {}, 4096, 1});
  const std::vector<double> t{0.0, 2.0, 6.0, 64.0};
  const auto report = tail_study(g, t, 50000, 3);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].fraction == 1.0);
  CHECK(report.rows[1].fraction == doctest::Approx(std::erfc(2.0 / std::sqrt(2.0))).epsilon(0.1));
  CHECK(report.rows[2].fraction <= report.rows[2].envelope);
  CHECK(report.rows[3].fraction == 0.0);
  CHECK(report.monotone);
  CHECK(report.all_within);

  const auto threaded = tail_study(g, t, 50000, 3, 4);
  CHECK(tail_csv(report) == tail_csv(threaded));

  const std::vector<double> bad{2.0, 1.0};
  CHECK_THROWS_AS(tail_study(g, bad, 10, 3), InvalidArgument);
  CHECK_THROWS_AS(tail_study(g, t, 0, 3), InvalidArgument);
}

TEST_CASE("CSV formatting") {
  ConvergenceReport empty;
  CHECK(convergence_csv(empty) == "n,estimate,std_error,gaussian_ref,ref_method,abs_error\n");

  SweepConfig c = degenerate_sweep();
  c.n_schedule = {16, 32, 64, 128};
  c.samples = 500;
  const auto report = convergence_sweep(c);
  const std::string csv = convergence_csv(report);
  CHECK(count_lines(csv) == 5);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.find("\n32,") != std::string::npos);
  CHECK(csv.find(",closed_form,") != std::string::npos);

  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(std::exp(-0.5))) == std::exp(-0.5));

  CHECK(rotation_csv(RotationReport{}) == "epsilon,difference,std_error\n");
  CHECK(perturbation_csv(PerturbationReport{}) == "epsilon,max_difference,ratio\n");
  CHECK(tail_csv(TailReport{}) == "threshold,fraction,std_error,envelope,within_envelope\n");

  const auto dir = scratch_dir("harness_csv");
  emit_csv(report, dir / "nested" / "out.csv");
  const std::string first = slurp(dir / "nested" / "out.csv");
  CHECK(first == csv);
  emit_csv(report, dir / "nested" / "out.csv");
  CHECK(slurp(dir / "nested" / "out.csv") == first);
  emit_svg(report, dir / "plot.svg");
  CHECK(slurp(dir / "plot.svg").rfind("<svg", 0) == 0);

  write_text_file(dir / "blocker", "x");
  CHECK_THROWS_AS(emit_csv(report, dir / "blocker" / "out.csv"), IoError);
  std::filesystem::remove_all(dir);
}
