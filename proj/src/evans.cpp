#include "canosys/evans.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace canosys {

namespace {

constexpr double kPi = std::numbers::pi;

CMat matrix_sign(const CMat& g) {
  const Eigen::Index n = g.rows();
  CMat x = g;
  for (int it = 0; it < 100; ++it) {
    const CMat inv = x.inverse();
    const double mu = std::pow(std::abs(x.determinant()), -1.0 / static_cast<double>(n));
    const double scale = std::isfinite(mu) && mu > 0 ? mu : 1.0;
    CMat next = 0.5 * (scale * x + inv / scale);
    const double change = (next - x).cwiseAbs().colwise().sum().maxCoeff();
    const double size = next.cwiseAbs().colwise().sum().maxCoeff();
    x = std::move(next);
    if (change <= 1e-14 * size) break;
  }
  // One unscaled polish step.
  return 0.5 * (x + x.inverse());
}

bool in_band_at(const AsymptoticSystem& asys, double lambda, double band_tol) {
  for (Side side : {Side::Minus, Side::Plus}) {
    if (side == Side::Minus && !asys.two_sided) continue;
    const CVec mu = asys.spatial_eigenvalues(lambda, side);
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      if (std::abs(mu(i).real()) <= band_tol) return true;
  }
  return false;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

CMat AsymptoticSystem::generator(cplx lambda, Side side) const {
  const CMat a = side == Side::Minus ? CMat(c0_minus + lambda * c1_minus) : CMat(c0_plus + lambda * c1_plus);
  return apply_j_inverse(a);
}

CVec AsymptoticSystem::spatial_eigenvalues(cplx lambda, Side side) const {
  Eigen::ComplexEigenSolver<CMat> es(generator(lambda, side), false);
  return es.eigenvalues();
}

AsymptoticSystem asymptotic_matrices(const CanonicalProblem& problem, double decay_tol) {
  if (problem.geometry.kind == GeometryKind::Bounded)
    throw Error(ErrorCode::InvalidArgument, "asymptotic analysis needs a half-line or line geometry");
  AsymptoticSystem asys;
  asys.dim = problem.dim;
  const double l = problem.geometry.left;
  const double r = problem.geometry.right;
  const double mid = 0.5 * (l + r);
  auto limit = [&](double end, const std::optional<CMat>& closed) {
    const CMat at_end = problem.pencil.c0(end);
    if (closed) {
      const double gap = (at_end - *closed).norm();
      if (gap > decay_tol)
        throw Error(ErrorCode::NoAsymptoticLimit,
                    "C0 at x = " + format_double(end) + " differs from its limit by " + format_double(gap), gap);
      return *closed;
    }
    const double inner = mid + 0.9 * (end - mid);
    const double gap = (at_end - problem.pencil.c0(inner)).norm();
    if (gap > decay_tol)
      throw Error(ErrorCode::NoAsymptoticLimit,
                  "C0 still varies near x = " + format_double(end) + " (change " + format_double(gap) + ")", gap);
    return at_end;
  };
  asys.two_sided = problem.geometry.kind == GeometryKind::FullLine;
  asys.c0_minus = asys.two_sided ? limit(l, problem.pencil.c0_limit_minus) : CMat(problem.pencil.c0(l));
  asys.c0_plus = limit(r, problem.pencil.c0_limit_plus);
  asys.c1_minus = problem.pencil.c1(l);
  asys.c1_plus = problem.pencil.c1(r);
  return asys;
}

bool Band::contains(double lambda) const {
  return (lo_infinite || lambda >= lo) && (hi_infinite || lambda <= hi);
}

std::string Band::to_string() const {
  std::string s = lo_infinite ? "(-inf, " : "[" + format_double(lo) + ", ";
  s += hi_infinite ? "inf)" : format_double(hi) + "]";
  return s;
}

bool EssentialSpectrumBands::contains(double lambda) const {
  return std::any_of(bands.begin(), bands.end(), [&](const Band& b) { return b.contains(lambda); });
}

double EssentialSpectrumBands::distance(double lambda) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Band& b : bands) {
    if (b.contains(lambda)) return 0.0;
    if (!b.lo_infinite && lambda < b.lo) best = std::min(best, b.lo - lambda);
    if (!b.hi_infinite && lambda > b.hi) best = std::min(best, lambda - b.hi);
  }
  return best;
}

std::string EssentialSpectrumBands::to_string() const {
  if (bands.empty()) return "{}";
  std::string s;
  for (std::size_t i = 0; i < bands.size(); ++i) s += (i ? " U " : "") + bands[i].to_string();
  return s;
}

EssentialSpectrumBands essential_spectrum(const CanonicalProblem& problem, const EvansOptions& options) {
  return essential_spectrum(asymptotic_matrices(problem, options.decay_tol), options);
}

EssentialSpectrumBands essential_spectrum(const AsymptoticSystem& asys, const EvansOptions& options) {
  const int n = std::max(3, options.band_points);
  const double span = options.band_span;
  std::vector<double> grid(static_cast<std::size_t>(n));
  std::vector<bool> in(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    grid[k] = -span + 2.0 * span * i / (n - 1);
    in[k] = in_band_at(asys, grid[k], options.band_tol);
  }
  // Boundary between an outside point `out` and an inside point `inside`.
  auto edge = [&](double out, double inside) {
    for (int it = 0; it < 80 && std::abs(inside - out) > 1e-13 * std::max(1.0, std::abs(inside)); ++it) {
      const double m = 0.5 * (out + inside);
      (in_band_at(asys, m, options.band_tol) ? inside : out) = m;
    }
    return inside;
  };

  EssentialSpectrumBands result;
  std::size_t i = 0;
  while (i < grid.size()) {
    if (!in[i]) {
      ++i;
      continue;
    }
    Band band;
    if (i == 0)
      band.lo_infinite = true;
    else
      band.lo = edge(grid[i - 1], grid[i]);
    std::size_t j = i;
    while (j + 1 < grid.size() && in[j + 1]) ++j;
    if (j + 1 == grid.size())
      band.hi_infinite = true;
    else
      band.hi = edge(grid[j + 1], grid[j]);
    result.bands.push_back(band);
    i = j + 1;
  }
  return result;
}

CMat decaying_projector(const AsymptoticSystem& asys, cplx lambda, Side side, double gap_tol) {
  const CMat g = asys.generator(lambda, side);
  Eigen::ComplexEigenSolver<CMat> es(g, false);
  const CVec mu = es.eigenvalues();
  int decaying = 0;
  double closest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    closest = std::min(closest, std::abs(mu(i).real()));
    if (side == Side::Plus ? mu(i).real() < 0 : mu(i).real() > 0) ++decaying;
  }
  if (!(closest > gap_tol))
    throw Error(ErrorCode::OnEssentialSpectrum,
                "spatial eigenvalue within " + format_double(closest) + " of the imaginary axis", closest);
  if (decaying != asys.dim.half())
    throw Error(ErrorCode::UnbalancedDimensions, "decaying subspace has dimension " + std::to_string(decaying) +
                                                     ", expected " + std::to_string(asys.dim.half()));
  const CMat sign = matrix_sign(g);
  const CMat id = CMat::Identity(g.rows(), g.cols());
  return side == Side::Plus ? CMat(0.5 * (id - sign)) : CMat(0.5 * (id + sign));
}

SubspaceBasis decaying_subspace(const AsymptoticSystem& asys, cplx lambda, Side side, double gap_tol) {
  const CMat p = decaying_projector(asys, lambda, side, gap_tol);
  Eigen::JacobiSVD<CMat> svd(p, Eigen::ComputeThinU);
  return SubspaceBasis(svd.matrixU().leftCols(asys.dim.half()));
}

EvansFunction::EvansFunction(const CanonicalProblem& problem, EvansOptions options)
    : problem_(&problem), options_(std::move(options)), asys_(asymptotic_matrices(problem, options_.decay_tol)) {
  const cplx gauge = options_.gauge_point.value_or(cplx(0.0, 1.0));
  gauge_minus_ = asys_.two_sided ? decaying_subspace(asys_, gauge, Side::Minus, options_.gap_tol).columns()
                                 : apply_j(problem.left_frame().adjoint_map());
  gauge_plus_ = decaying_subspace(asys_, gauge, Side::Plus, options_.gap_tol).columns();
  if (options_.recombination_minus.size() > 0) gauge_minus_ = gauge_minus_ * options_.recombination_minus;
  if (options_.recombination_plus.size() > 0) gauge_plus_ = gauge_plus_ * options_.recombination_plus;
  if (options_.lambda_ref) reference_ = raw(*options_.lambda_ref);
}

CMat EvansFunction::matched_frames(cplx lambda, double* log_scale) const {
  const double l = problem_->geometry.left;
  const double r = problem_->geometry.right;
  const double mid = 0.5 * (l + r);
  const CMat start_minus =
      asys_.two_sided ? CMat(decaying_projector(asys_, lambda, Side::Minus, options_.gap_tol) * gauge_minus_)
                      : gauge_minus_;
  const CMat start_plus = decaying_projector(asys_, lambda, Side::Plus, options_.gap_tol) * gauge_plus_;
  const PropagatedFrame fm =
      propagate_frame(*problem_, lambda, start_minus, l, mid, options_.step, std::max(1, options_.renorm_every));
  const PropagatedFrame fp =
      propagate_frame(*problem_, lambda, start_plus, r, mid, options_.step, std::max(1, options_.renorm_every));
  const Eigen::Index d = problem_->dim.half();
  CMat matched(2 * d, 2 * d);
  matched << fm.columns, fp.columns;
  if (log_scale) *log_scale = fm.accumulated_scale + fp.accumulated_scale;
  return matched;
}

EvansValue EvansFunction::raw(cplx lambda) const {
  EvansValue out;
  out.lambda = lambda;
  const CMat matched = matched_frames(lambda, &out.log_scale);
  const Eigen::Index d = problem_->dim.half();
  out.value = matched.determinant();
  out.conditioning = principal_angles(matched.leftCols(d), matched.rightCols(d)).front();
  if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag()) || !std::isfinite(out.log_scale))
    throw Error(ErrorCode::NonFiniteState, "Evans function is not finite");
  return out;
}

RVec EvansFunction::matched_singular_values(cplx lambda) const {
  return Eigen::JacobiSVD<CMat>(matched_frames(lambda, nullptr)).singularValues();
}

EvansValue EvansFunction::operator()(cplx lambda) const {
  EvansValue v = raw(lambda);
  if (reference_) {
    v.value /= reference_->value;
    v.log_scale -= reference_->log_scale;
  }
  return v;
}

EvansValue evans_function(const CanonicalProblem& problem, cplx lambda, const EvansOptions& options) {
  return EvansFunction(problem, options)(lambda);
}

std::string Rectangle::to_string() const {
  return "[" + format_double(re0) + ", " + format_double(re1) + "] x [" + format_double(im0) + ", " +
         format_double(im1) + "]i";
}

WindingReport count_zeros_winding(const CanonicalProblem& problem, const Rectangle& contour,
                                  const EvansOptions& options) {
  if (!(contour.re1 > contour.re0) || !(contour.im1 > contour.im0))
    throw Error(ErrorCode::InvalidArgument, "degenerate contour rectangle");
  const AsymptoticSystem asys = asymptotic_matrices(problem, options.decay_tol);
  const EssentialSpectrumBands bands = essential_spectrum(asys, options);
  if (contour.im0 <= 0.0 && contour.im1 >= 0.0) {
    // The rectangle meets the real axis in [re0, re1]; E is only analytic there off the bands.
    const double margin = 2.0 * options.gap_tol;
    for (const Band& b : bands.bands) {
      const double lo = b.lo_infinite ? -std::numeric_limits<double>::infinity() : b.lo;
      const double hi = b.hi_infinite ? std::numeric_limits<double>::infinity() : b.hi;
      if (lo <= contour.re1 + margin && hi >= contour.re0 - margin)
        throw Error(ErrorCode::ContourTouchesEssentialSpectrum,
                    "contour " + contour.to_string() + " meets essential spectrum band " + b.to_string());
    }
  }

  EvansOptions opts = options;
  if (!opts.gauge_point) opts.gauge_point = contour.center();
  opts.lambda_ref.reset();
  const EvansFunction evans(problem, opts);

  const cplx corners[4] = {{contour.re0, contour.im0},
                           {contour.re1, contour.im0},
                           {contour.re1, contour.im1},
                           {contour.re0, contour.im1}};
  auto point = [&](int per_side, int j) {
    const int side = j / per_side;
    const double t = static_cast<double>(j % per_side) / per_side;
    return corners[side] + t * (corners[(side + 1) % 4] - corners[side]);
  };

  int per_side = std::max(4, options.n_samples + options.n_samples % 2);  // even, for Simpson
  std::vector<EvansValue> values;
  for (int j = 0; j < 4 * per_side; ++j) values.push_back(evans(point(per_side, j)));

  WindingReport report;
  report.contour = contour;
  for (int doubling = 0;; ++doubling) {
    const std::size_t m = values.size();
    double max_jump = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      max_jump = std::max(max_jump, std::abs(std::arg(values[(j + 1) % m].value / values[j].value)));
    report.max_phase_jump = max_jump;
    if (max_jump < kPi / 2) break;
    if (doubling >= options.max_doublings)
      throw Error(ErrorCode::PhaseJumpTooLarge,
                  "adjacent Evans samples differ in phase by " + format_double(max_jump) + " with " +
                      std::to_string(per_side) + " samples per side",
                  max_jump);
    std::vector<EvansValue> refined;
    refined.reserve(2 * m);
    for (std::size_t j = 0; j < m; ++j) {
      refined.push_back(values[j]);
      refined.push_back(evans(point(2 * per_side, static_cast<int>(2 * j + 1))));
    }
    values = std::move(refined);
    per_side *= 2;
  }
  report.samples_per_side = per_side;

  const std::size_t m = values.size();
  const cplx center = contour.center();
  double total = 0.0;
  report.min_conditioning = std::numeric_limits<double>::infinity();
  std::vector<cplx> increments(m);
  for (std::size_t j = 0; j < m; ++j) {
    const EvansValue& a = values[j];
    const EvansValue& b = values[(j + 1) % m];
    const double dphase = std::arg(b.value / a.value);
    total += dphase;
    increments[j] = cplx(b.log_abs() - a.log_abs(), dphase);
    report.min_conditioning = std::min(report.min_conditioning, a.conditioning);
  }
  report.winding = total / (2.0 * kPi);
  report.count = static_cast<int>(std::lround(report.winding));

  if (report.count > 0) {
    // Power sums of the enclosed zeros relative to the center,
    //   p_k = (1 / 2 pi i) oint w^k dlog E = (1 / 2 pi i) [w0^k (L_end - L_0) - k oint w^(k-1) L dw],
    // with L a continuous branch of log E along the contour; Simpson's rule on each side.
    std::vector<cplx> log_e(m + 1);
    log_e[0] = cplx(values[0].log_abs(), std::arg(values[0].value));
    for (std::size_t j = 0; j < m; ++j) log_e[j + 1] = log_e[j] + increments[j];
    const auto n_side = static_cast<std::size_t>(per_side);
    const cplx w0 = values[0].lambda - center;
    for (int k = 1; k <= report.count; ++k) {
      cplx integral = 0.0;
      for (int side = 0; side < 4; ++side) {
        const cplx dw = (corners[(side + 1) % 4] - corners[side]) / static_cast<double>(per_side);
        cplx acc = 0.0;
        for (std::size_t i = 0; i <= n_side; ++i) {
          const std::size_t j = static_cast<std::size_t>(side) * n_side + i;
          const cplx w = (j < m ? values[j].lambda : values[0].lambda) - center;
          const double weight = (i == 0 || i == n_side) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
          acc += weight * std::pow(w, k - 1) * log_e[j];
        }
        integral += acc * dw / 3.0;
      }
      const cplx sum = std::pow(w0, k) * (log_e[m] - log_e[0]) - static_cast<double>(k) * integral;
      report.power_sums.push_back(sum / cplx(0.0, 2.0 * kPi));
    }
    const double radius = 0.5 * std::abs(cplx(contour.re1 - contour.re0, contour.im1 - contour.im0));
    // A zero cluster unresolvable from the center at this accuracy is reported at the center.
    double spread = 0.0;
    for (int k = 1; k <= report.count; ++k)
      spread = std::max(spread, std::abs(report.power_sums[static_cast<std::size_t>(k - 1)]) / std::pow(radius, k));
    if (spread <= 1e-6) {
      report.zeros.assign(static_cast<std::size_t>(report.count), center);
    } else {
      // Newton identities -> monic polynomial -> companion eigenvalues.
      const int n = report.count;
      std::vector<cplx> e(static_cast<std::size_t>(n + 1), 0.0);
      e[0] = 1.0;
      for (int k = 1; k <= n; ++k) {
        cplx acc = 0.0;
        for (int i = 1; i <= k; ++i)
          acc += (i % 2 == 1 ? 1.0 : -1.0) * e[static_cast<std::size_t>(k - i)] *
                 report.power_sums[static_cast<std::size_t>(i - 1)];
        e[static_cast<std::size_t>(k)] = acc / static_cast<double>(k);
      }
      CMat companion = CMat::Zero(n, n);
      for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
      for (int k = 1; k <= n; ++k)
        companion(n - k, n - 1) = (k % 2 == 1 ? 1.0 : -1.0) * e[static_cast<std::size_t>(k)];
      Eigen::ComplexEigenSolver<CMat> es(companion, false);
      for (Eigen::Index i = 0; i < n; ++i) report.zeros.push_back(center + es.eigenvalues()(i));
      std::sort(report.zeros.begin(), report.zeros.end(),
                [](cplx a, cplx b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); });
    }
  }
  return report;
}

CVec nls_translation_mode(double eta, double x) {
  const double s = 1.0 / std::cosh(eta * x);
  const double t = std::tanh(eta * x);
  CVec y = CVec::Zero(4);
  y(0) = -eta * eta * s * t;
  y(2) = eta * eta * eta * (s - 2.0 * s * s * s);
  return y;
}

CVec nls_translation_mode_derivative(double eta, double x) {
  const double s = 1.0 / std::cosh(eta * x);
  const double t = std::tanh(eta * x);
  CVec y = CVec::Zero(4);
  y(0) = eta * eta * eta * (s - 2.0 * s * s * s);
  y(2) = std::pow(eta, 4) * s * t * (6.0 * s * s - 1.0);
  return y;
}

CVec nls_phase_mode(double eta, double x) {
  const double s = 1.0 / std::cosh(eta * x);
  const double t = std::tanh(eta * x);
  CVec y = CVec::Zero(4);
  y(1) = eta * s;
  y(3) = -eta * eta * s * t;
  return y;
}

CVec nls_phase_mode_derivative(double eta, double x) {
  const double s = 1.0 / std::cosh(eta * x);
  const double t = std::tanh(eta * x);
  CVec y = CVec::Zero(4);
  y(1) = -eta * eta * s * t;
  y(3) = eta * eta * eta * (s - 2.0 * s * s * s);
  return y;
}

ZeroModeReport zero_mode_residuals(const CanonicalProblem& problem, const std::vector<double>& grid) {
  if (problem.kind != "nls_soliton")
    throw Error(ErrorCode::InvalidArgument, "zero modes are defined for the NLS soliton problem");
  if (grid.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two grid points");
  const double eta = problem.parameters.at("eta");
  ZeroModeReport report;
  auto residual = [&](const CVec& y, const CVec& dy, double x) {
    return (apply_j(CMat(dy)).col(0) - problem.pencil.c0(x) * y).norm();
  };
  auto density = [&](const CVec& y, double x) { return y.dot(problem.weight(x) * y).real(); };
  double prev1 = 0.0, prev2 = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid[k];
    const CVec y1 = nls_translation_mode(eta, x);
    const CVec y2 = nls_phase_mode(eta, x);
    report.residual_y1 = std::max(report.residual_y1, residual(y1, nls_translation_mode_derivative(eta, x), x));
    report.residual_y2 = std::max(report.residual_y2, residual(y2, nls_phase_mode_derivative(eta, x), x));
    report.max_v1 = std::max(report.max_v1, std::abs(y1(0)));
    const double d1 = density(y1, x);
    const double d2 = density(y2, x);
    if (k > 0) {
      const double h = x - grid[k - 1];
      report.hnorm_y1 += 0.5 * h * (prev1 + d1);
      report.hnorm_y2 += 0.5 * h * (prev2 + d2);
    }
    prev1 = d1;
    prev2 = d2;
  }
  return report;
}

}  // namespace canosys
