#include "canosys/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace canosys {

namespace {

constexpr double kFrameTol = 1e-10;
constexpr double kPsdTol = 1e-10;
constexpr double kGreenTol = 1e-8;
constexpr double kStructureTol = 1e-8;
constexpr int kGreenPairs = 20;
constexpr int kGreenPoints = 16001;

struct Loaded {
  ProblemFile file;
  std::optional<std::pair<double, double>> window;
  std::vector<Rectangle> contours;
};

Loaded load(const RunConfig& config) {
  ProblemOverrides overrides;
  overrides.half_length = config.half_length;
  overrides.variant = config.variant;
  Loaded loaded{config.problem_text ? parse_problem(*config.problem_text, {}, overrides)
                                    : load_problem_file(config.problem_path, overrides),
                {},
                {}};
  NumericsConfig& n = loaded.file.numerics;
  if (config.h) {
    if (!(*config.h > 0)) throw Error(ErrorCode::ConfigError, "--h must be positive");
    n.h = *config.h;
    n.evans_h = *config.h;
  }
  if (config.n_scan) {
    if (*config.n_scan < 2) throw Error(ErrorCode::ConfigError, "--steps must be at least 2");
    n.n_scan = *config.n_scan;
  }
  if (config.seed) n.seed = *config.seed;
  loaded.window = config.window ? config.window : n.window;
  loaded.contours = config.contours.empty() ? n.contours : config.contours;
  return loaded;
}

std::string fmt(double v, int precision = 12) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string fmt(cplx z) {
  if (z.imag() == 0.0) return fmt(z.real());
  return fmt(z.real()) + (z.imag() < 0 ? " - " : " + ") + fmt(std::abs(z.imag())) + "i";
}

Json problem_json(const CanonicalProblem& p) {
  Json params = Json::object();
  for (const auto& [k, v] : p.parameters) params[k] = v;
  return Json{{"kind", p.kind},
              {"dim", p.dim.half()},
              {"geometry", std::string(geometry_name(p.geometry.kind))},
              {"left", p.geometry.left},
              {"right", p.geometry.right},
              {"hermitian", p.pencil.hermitian},
              {"real_data", p.real_data},
              {"parameters", std::move(params)}};
}

Json base_report(Command c, const CanonicalProblem& p) {
  return Json{{"command", std::string(command_name(c))}, {"problem", problem_json(p)}, {"warnings", Json::array()}};
}

Json bc_json(const BoundaryCondition& bc) {
  if (const auto* f = std::get_if<LagrangianFrame>(&bc)) return Json{{"frame", matrix_to_json(f->row_form())}};
  return Json{{"asymptotic", true}};
}

SpectralOptions spectral_options(const NumericsConfig& n) {
  SpectralOptions o;
  o.step = {n.h, n.scheme};
  o.renorm_every = n.renorm_every;
  return o;
}

EvansOptions evans_options(const NumericsConfig& n) {
  EvansOptions o;
  o.step = {n.evans_h, n.evans_scheme};
  o.renorm_every = n.renorm_every;
  o.lambda_ref = n.lambda_ref;
  o.gauge_point = n.gauge_point;
  return o;
}

std::vector<double> window_grid(std::pair<double, double> w, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = w.first + (w.second - w.first) * i / (n - 1);
  g.back() = w.second;
  return g;
}

void add_check(Json& checks, std::vector<std::string>& failures, const std::string& name, bool passed, double value,
               double tolerance, const std::string& detail = {}) {
  Json c{{"name", name},
         {"passed", passed},
         {"value", std::isfinite(value) ? Json(value) : Json(nullptr)},
         {"tolerance", std::isfinite(tolerance) ? Json(tolerance) : Json(nullptr)}};
  if (!detail.empty()) c["detail"] = detail;
  checks.push_back(std::move(c));
  if (!passed) failures.push_back(name);
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "check") return Command::Check;
  if (name == "reduce") return Command::Reduce;
  if (name == "spectrum") return Command::Spectrum;
  if (name == "evans") return Command::Evans;
  if (name == "scan") return Command::Scan;
  throw Error(ErrorCode::ConfigError, "unknown command '" + name + "'");
}

std::string_view command_name(Command c) {
  switch (c) {
    case Command::Check: return "check";
    case Command::Reduce: return "reduce";
    case Command::Spectrum: return "spectrum";
    case Command::Evans: return "evans";
    case Command::Scan: return "scan";
  }
  return "unknown";
}

int exit_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotOrthonormal:
    case ErrorCode::NotIsotropic:
    case ErrorCode::RankDeficient:
    case ErrorCode::NonPositiveCoefficient:
      return exit_code::config;
    default:
      return exit_code::numerical;
  }
}

RunResult run_check(const RunConfig& config) {
  const Loaded loaded = load(config);
  const CanonicalProblem& p = loaded.file.problem;
  const NumericsConfig& n = loaded.file.numerics;
  RunResult result;
  result.report = base_report(Command::Check, p);
  Json checks = Json::array();
  std::vector<std::string> failures;

  for (const auto& [side, bc] : {std::pair<std::string, const BoundaryCondition*>{"left", &p.left_bc},
                                 std::pair<std::string, const BoundaryCondition*>{"right", &p.right_bc}}) {
    if (const auto* f = std::get_if<LagrangianFrame>(bc)) {
      add_check(checks, failures, "frame_orthonormality_" + side, f->orthonormality_defect() <= kFrameTol,
                f->orthonormality_defect(), kFrameTol);
      add_check(checks, failures, "frame_isotropy_" + side, f->isotropy_defect() <= kFrameTol, f->isotropy_defect(),
                kFrameTol);
    }
  }

  std::vector<double> grid = uniform_grid(p.geometry.left, p.geometry.right, 2001);
  for (double x : p.weight.nodes())
    if (p.geometry.contains(x)) grid.push_back(x);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const PsdReport psd = psd_report(p.weight, grid, kPsdTol);
  add_check(checks, failures, "weight_psd", psd.passed, psd.min_eigenvalue, -kPsdTol,
            "min eigenvalue at x = " + fmt(psd.argmin_x) + ", hermitian defect " + fmt(psd.hermitian_defect, 3) +
                (psd.nondegenerate ? "" : ", weight vanishes on an interval"));

  double green = 0.0;
  for (int k = 0; k < kGreenPairs; ++k) {
    const RelationPair a =
        random_relation_pair(p, p.geometry.left, p.geometry.right, kGreenPoints, n.seed + 2 * static_cast<std::uint64_t>(k));
    const RelationPair b = random_relation_pair(p, p.geometry.left, p.geometry.right, kGreenPoints,
                                                n.seed + 2 * static_cast<std::uint64_t>(k) + 1);
    green = std::max(green, greens_identity_residual(a, b, p) / greens_identity_scale(a, b, p));
  }
  add_check(checks, failures, "green_identity", green <= kGreenTol, green, kGreenTol,
            std::to_string(kGreenPairs) + " seeded relation pairs, residual relative to scale");

  if (p.pencil.hermitian) {
    const double probe = loaded.window ? 0.5 * (loaded.window->first + loaded.window->second) : 0.5;
    const TransferMatrix t = transfer_matrix(p, probe, p.geometry.left, p.geometry.right, {n.h, n.scheme});
    const double rel = t.structure_defect / std::max(1.0, t.value.squaredNorm());
    add_check(checks, failures, "structure_defect", rel <= kStructureTol, rel, kStructureTol,
              "||T*JT - J|| / max(1, ||T||^2) at lambda = " + fmt(probe) + " (absolute " + fmt(t.structure_defect, 3) +
                  ")");
  } else {
    result.report["warnings"].push_back("non-Hermitian pencil: structure-defect check not applicable");
  }

  if (p.geometry.kind != GeometryKind::Bounded) {
    try {
      asymptotic_matrices(p);
      add_check(checks, failures, "asymptotic_limits", true, 0.0, 1e-6);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoAsymptoticLimit) throw;
      add_check(checks, failures, "asymptotic_limits", false, e.defect(), 1e-6, e.what());
    }
  }

  result.report["passed"] = failures.empty();
  result.report["failures"] = failures;
  result.report["checks"] = std::move(checks);
  for (const Json& c : result.report["checks"])
    result.summary.push_back(std::string(c["passed"].get<bool>() ? "PASS " : "FAIL ") + c["name"].get<std::string>() +
                             (c["value"].is_null() ? "" : "  value " + fmt(c["value"].get<double>(), 3)));
  result.summary.push_back(failures.empty() ? "all checks passed" : std::to_string(failures.size()) + " check(s) failed");
  result.exit_status = failures.empty() ? exit_code::ok : exit_code::numerical;
  return result;
}

RunResult run_reduce(const RunConfig& config) {
  const Loaded loaded = load(config);
  const CanonicalProblem& p = loaded.file.problem;
  RunResult result;
  result.report = base_report(Command::Reduce, p);
  result.report["state_labels"] = p.state_labels;
  result.report["left_bc"] = bc_json(p.left_bc);
  result.report["right_bc"] = bc_json(p.right_bc);
  Json samples = Json::array();
  const double mid = 0.5 * (p.geometry.left + p.geometry.right);
  for (double x : {p.geometry.left, mid, p.geometry.right})
    samples.push_back(Json{{"x", x},
                           {"C0", matrix_to_json(p.pencil.c0(x))},
                           {"C1", matrix_to_json(p.pencil.c1(x))},
                           {"weight", matrix_to_json(p.weight(x))}});
  result.report["samples"] = std::move(samples);
  result.summary.push_back(p.kind + ": J y' = (C0(x) + lambda C1(x)) y, d = " + std::to_string(p.dim.half()) + ", " +
                           std::string(geometry_name(p.geometry.kind)) + " [" + fmt(p.geometry.left) + ", " +
                           fmt(p.geometry.right) + "], " + (p.pencil.hermitian ? "Hermitian" : "non-Hermitian") +
                           " pencil");
  std::string labels;
  for (const auto& l : p.state_labels) labels += (labels.empty() ? "" : ", ") + l;
  if (!labels.empty()) result.summary.push_back("state (" + labels + ")");
  return result;
}

RunResult run_spectrum(const RunConfig& config) {
  const Loaded loaded = load(config);
  const CanonicalProblem& p = loaded.file.problem;
  const NumericsConfig& n = loaded.file.numerics;
  if (!p.bounded_with_frames())
    throw Error(ErrorCode::InvalidArgument, "spectrum needs a bounded problem; use evans for line geometries");
  if (!loaded.window) throw Error(ErrorCode::ConfigError, "spectrum needs a window (--window a:b)");
  const auto [lo, hi] = *loaded.window;
  SpectrumReport spectrum = eigenvalues_in(p, lo, hi, n.n_scan, spectral_options(n));
  if (p.pencil.hermitian && !spectrum.eigenpairs.empty()) spectrum.witnesses = symmetry_defect(spectrum, p);

  RunResult result;
  result.report = base_report(Command::Spectrum, p);
  result.report["window"] = Json::array({lo, hi});
  result.report["n_scan"] = n.n_scan;
  result.report["h"] = n.h;
  Json pairs = Json::array();
  for (const EigenPair& e : spectrum.eigenpairs) pairs.push_back(to_json(e));
  result.report["eigenpairs"] = std::move(pairs);
  result.report["witnesses"] = spectrum.witnesses ? to_json(*spectrum.witnesses) : Json(nullptr);
  for (const std::string& w : spectrum.warnings) result.report["warnings"].push_back(w);

  std::ostringstream csv;
  write_scan_csv(csv, spectrum.scan);
  result.csv = csv.str();

  if (spectrum.eigenpairs.empty()) {
    result.summary.push_back("no eigenvalues in [" + fmt(lo) + ", " + fmt(hi) + "]");
  } else {
    result.summary.push_back(std::to_string(spectrum.eigenpairs.size()) + " eigenvalue(s) in [" + fmt(lo) + ", " +
                             fmt(hi) + "]:");
    for (const EigenPair& e : spectrum.eigenpairs)
      result.summary.push_back("  lambda = " + fmt(e.lambda) + "  multiplicity " + std::to_string(e.multiplicity) +
                               "  ode residual " + fmt(e.ode_residual, 3));
  }
  if (spectrum.witnesses)
    result.summary.push_back("symmetry defect " + fmt(spectrum.witnesses->max_symmetry_defect, 3) +
                             ", off-diagonal H-Gram " + fmt(spectrum.witnesses->max_offdiag_gram, 3));
  for (const std::string& w : spectrum.warnings) result.summary.push_back("warning: " + w);
  return result;
}

RunResult run_evans(const RunConfig& config) {
  const Loaded loaded = load(config);
  const CanonicalProblem& p = loaded.file.problem;
  const NumericsConfig& n = loaded.file.numerics;
  if (p.geometry.kind == GeometryKind::Bounded)
    throw Error(ErrorCode::InvalidArgument, "evans needs a line or half-line geometry; use spectrum for bounded ones");
  const EvansOptions options = evans_options(n);
  const AsymptoticSystem asys = asymptotic_matrices(p, options.decay_tol);
  const EssentialSpectrumBands bands = essential_spectrum(asys, options);

  RunResult result;
  result.report = base_report(Command::Evans, p);
  result.report["essential_spectrum"] = to_json(bands);
  result.summary.push_back("essential spectrum: " + bands.to_string());

  std::vector<EvansValue> scan;
  if (loaded.window) {
    const EvansFunction evans(p, options);
    int skipped = 0;
    for (double lam : window_grid(*loaded.window, n.n_scan)) {
      if (bands.distance(lam) <= 2.0 * options.gap_tol) {
        ++skipped;
        continue;
      }
      try {
        scan.push_back(evans(lam));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OnEssentialSpectrum) throw;
        ++skipped;
      }
    }
    result.report["window"] = Json::array({loaded.window->first, loaded.window->second});
    result.report["scan_points"] = scan.size();
    if (skipped > 0)
      result.report["warnings"].push_back(std::to_string(skipped) + " scan point(s) on the essential spectrum skipped");
  }
  std::ostringstream csv;
  write_evans_csv(csv, scan);
  result.csv = csv.str();

  Json windings = Json::array();
  bool contour_error = false;
  bool any_tested = false;
  std::vector<cplx> zeros;
  for (const Rectangle& r : loaded.contours) {
    try {
      const WindingReport w = count_zeros_winding(p, r, options);
      Json j = to_json(w);
      // Dimension of the space of solutions decaying at both ends, at each distinct zero estimate.
      Json kernels = Json::array();
      std::vector<cplx> distinct;
      for (cplx z : w.zeros)
        if (std::none_of(distinct.begin(), distinct.end(), [&](cplx q) { return std::abs(q - z) < 1e-8; }))
          distinct.push_back(z);
      result.summary.push_back("winding on " + r.to_string() + ": " + std::to_string(w.count) + " zero(s)");
      if (!distinct.empty()) {
        EvansOptions at_zero = options;
        at_zero.gauge_point = r.center();
        const EvansFunction evans(p, at_zero);
        for (cplx z : distinct) {
          const RVec sv = evans.matched_singular_values(z);
          const int dim = static_cast<int>((sv.array() <= 1e-6).count());
          kernels.push_back(Json{{"lambda", complex_to_json(z)}, {"bounded_solutions", dim}});
          result.summary.push_back("  zero near " + fmt(z) + ": " + std::to_string(dim) +
                                   " independent solution(s) decaying at both ends");
        }
      }
      j["kernel_dimensions"] = std::move(kernels);
      windings.push_back(std::move(j));
      zeros.insert(zeros.end(), w.zeros.begin(), w.zeros.end());
      any_tested = true;
    } catch (const Error& e) {
      contour_error = true;
      windings.push_back(Json{{"contour", Json::array({r.re0, r.re1, r.im0, r.im1})},
                              {"error", std::string(error_name(e.code()))},
                              {"message", e.what()}});
      result.summary.push_back("winding on " + r.to_string() + " failed: " + e.what());
    }
  }
  result.report["windings"] = std::move(windings);

  if (p.kind == "nls_soliton") {
    const ZeroModeReport zm = zero_mode_residuals(p, uniform_grid(p.geometry.left, p.geometry.right, 30001));
    result.report["zero_modes"] = to_json(zm);
    result.summary.push_back("zero modes at lambda = 0: residual y1 " + fmt(zm.residual_y1, 3) + ", y2 " +
                             fmt(zm.residual_y2, 3) + "; H-norms " + fmt(zm.hnorm_y1, 6) + ", " + fmt(zm.hnorm_y2, 6));
  }

  std::string verdict = "no contours tested";
  if (any_tested) {
    const bool unstable = std::any_of(zeros.begin(), zeros.end(), [](cplx z) { return z.real() > 1e-6; });
    if (unstable)
      verdict = "zeros with Re lambda > 0 found";
    else if (zeros.empty())
      verdict = "no zeros with Re lambda > 0 found; no point spectrum inside the tested contours";
    else
      verdict = "no zeros with Re lambda > 0 found";
  }
  result.report["verdict"] = verdict;
  result.summary.push_back("verdict: " + verdict);
  result.exit_status = contour_error ? exit_code::numerical : exit_code::ok;
  return result;
}

RunResult run_scan(const RunConfig& config) {
  const Loaded loaded = load(config);
  const CanonicalProblem& p = loaded.file.problem;
  const NumericsConfig& n = loaded.file.numerics;
  if (!loaded.window) throw Error(ErrorCode::ConfigError, "scan needs a window (--window a:b)");
  RunResult result;
  result.report = base_report(Command::Scan, p);
  result.report["window"] = Json::array({loaded.window->first, loaded.window->second});
  Json samples = Json::array();
  std::ostringstream csv;
  if (p.bounded_with_frames()) {
    std::vector<ScanSample> scan;
    for (double lam : window_grid(*loaded.window, n.n_scan)) {
      const CharacteristicValue cv = characteristic_function(p, lam, spectral_options(n));
      scan.push_back({lam, cv.mantissa, cv.log_scale});
      samples.push_back(Json{{"lambda", complex_to_json(lam)},
                             {"value", complex_to_json(cv.mantissa)},
                             {"log_scale", cv.log_scale}});
    }
    write_scan_csv(csv, scan);
    result.summary.push_back("characteristic function D sampled at " + std::to_string(scan.size()) + " points");
  } else {
    const EvansOptions options = evans_options(n);
    const EvansFunction evans(p, options);
    const EssentialSpectrumBands bands = essential_spectrum(evans.asymptotics(), options);
    std::vector<EvansValue> values;
    for (double lam : window_grid(*loaded.window, n.n_scan)) {
      if (bands.distance(lam) <= 2.0 * options.gap_tol) continue;
      const EvansValue v = evans(lam);
      values.push_back(v);
      samples.push_back(Json{{"lambda", complex_to_json(v.lambda)},
                             {"value", complex_to_json(v.value)},
                             {"log_scale", v.log_scale}});
    }
    write_evans_csv(csv, values);
    result.summary.push_back("Evans function sampled at " + std::to_string(values.size()) +
                             " points off the essential spectrum " + bands.to_string());
  }
  result.report["samples"] = std::move(samples);
  result.csv = csv.str();
  return result;
}

RunResult run(const RunConfig& config) {
  try {
    switch (config.command) {
      case Command::Check: return run_check(config);
      case Command::Reduce: return run_reduce(config);
      case Command::Spectrum: return run_spectrum(config);
      case Command::Evans: return run_evans(config);
      case Command::Scan: return run_scan(config);
    }
    throw Error(ErrorCode::ConfigError, "unknown command");
  } catch (const Error& e) {
    RunResult r;
    r.exit_status = exit_status_for(e.code());
    Json err{{"code", std::string(error_name(e.code()))}, {"message", e.what()}};
    if (std::isfinite(e.defect())) err["defect"] = e.defect();
    r.report = Json{{"command", std::string(command_name(config.command))}, {"error", std::move(err)}};
    r.summary.push_back(std::string("error: ") + e.what());
    return r;
  } catch (const std::exception& e) {
    RunResult r;
    r.exit_status = exit_code::numerical;
    r.report = Json{{"command", std::string(command_name(config.command))},
                    {"error", Json{{"code", "Internal"}, {"message", e.what()}}}};
    r.summary.push_back(std::string("error: ") + e.what());
    return r;
  }
}

std::string render_artifact(const RunConfig& config, const RunResult& result) {
  if (config.format == OutputFormat::Csv && !result.csv.empty()) return result.csv;
  return result.report.dump(2) + "\n";
}

}  // namespace canosys
