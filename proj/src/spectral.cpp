#include "canosys/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "canosys/rng.hpp"

namespace canosys {

namespace {

struct RecordedPath {
  std::vector<double> x;
  std::vector<CMat> q;
  std::vector<CMat> r;  // R divided out at this index; empty if none
};

RecordedPath record_path(const CanonicalProblem& problem, cplx lambda, const CMat& initial, double x_from,
                         double x_to, const SpectralOptions& options) {
  RecordedPath path;
  propagate_frame(problem, lambda, initial, x_from, x_to, options.step, std::max(1, options.renorm_every),
                  [&](double x, const CMat& cols, const CMat& r) {
                    path.x.push_back(x);
                    path.q.push_back(cols);
                    path.r.push_back(r);
                  });
  return path;
}

/// Values of the solution whose coefficient vector in the final basis is `c_end`.
CMat reconstruct(const RecordedPath& path, CVec c) {
  const Eigen::Index n = static_cast<Eigen::Index>(path.x.size());
  CMat values(path.q.front().rows(), n);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const auto idx = static_cast<std::size_t>(k);
    values.col(k) = path.q[idx] * c;
    if (k > 0 && path.r[idx].size() > 0) c = path.r[idx].triangularView<Eigen::Upper>().solve(c);
  }
  return values;
}

double max_column_norm(const CMat& values) { return values.colwise().norm().maxCoeff(); }

void normalize_phase(SampledPath& path) {
  const double peak = path.values.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < path.values.cols(); ++k)
    for (Eigen::Index i = 0; i < path.values.rows(); ++i) {
      const cplx z = path.values(i, k);
      if (std::abs(z) > 1e-6 * peak) {
        path.values *= std::conj(z) / std::abs(z);
        return;
      }
    }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

// Second-order finite-difference derivative on a possibly nonuniform grid.
CMat derivative(const SampledPath& y) {
  const Eigen::Index n = y.points();
  if (n < 3) throw Error(ErrorCode::GridMismatch, "need at least three grid points for a derivative");
  const auto& x = y.x;
  CMat d(y.values.rows(), n);
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    d.col(k) = (-h1 / (h0 * (h0 + h1))) * y.values.col(k - 1) + ((h1 - h0) / (h0 * h1)) * y.values.col(k) +
               (h0 / (h1 * (h0 + h1))) * y.values.col(k + 1);
  }
  {
    const double h1 = x[1] - x[0];
    const double h2 = x[2] - x[1];
    d.col(0) = (-(2 * h1 + h2) / (h1 * (h1 + h2))) * y.values.col(0) + ((h1 + h2) / (h1 * h2)) * y.values.col(1) -
               (h1 / (h2 * (h1 + h2))) * y.values.col(2);
  }
  {
    const auto m = static_cast<std::size_t>(n - 1);
    const double h1 = x[m] - x[m - 1];
    const double h2 = x[m - 1] - x[m - 2];
    d.col(n - 1) = ((2 * h1 + h2) / (h1 * (h1 + h2))) * y.values.col(n - 1) -
                   ((h1 + h2) / (h1 * h2)) * y.values.col(n - 2) + (h1 / (h2 * (h1 + h2))) * y.values.col(n - 3);
  }
  return d;
}

template <class Integrand>
cplx trapezoid(const std::vector<double>& x, Integrand&& f) {
  cplx sum = 0.0;
  cplx prev = f(std::size_t{0});
  for (std::size_t k = 1; k < x.size(); ++k) {
    const cplx cur = f(k);
    sum += 0.5 * (x[k] - x[k - 1]) * (prev + cur);
    prev = cur;
  }
  return sum;
}

void require_same_grid(const SampledPath& f, const SampledPath& g) {
  if (f.x.size() != g.x.size() || f.values.rows() != g.values.rows() ||
      f.values.cols() != static_cast<Eigen::Index>(f.x.size()) ||
      g.values.cols() != static_cast<Eigen::Index>(g.x.size()))
    throw Error(ErrorCode::GridMismatch, "sampled paths live on different grids");
  for (std::size_t k = 0; k < f.x.size(); ++k)
    if (f.x[k] != g.x[k]) throw Error(ErrorCode::GridMismatch, "sampled paths live on different grids");
}

struct Matching {
  RecordedPath left;
  RecordedPath right;
  Eigen::JacobiSVD<CMat> svd;  // of [Q_left | Q_right] at the midpoint
};

// Boundary subspaces propagated from both ends to the midpoint. Their intersection is the
// eigenspace; unlike B Q at the far end this stays well conditioned when eigenfunctions decay.
Matching match_at_midpoint(const CanonicalProblem& problem, cplx lambda, const SpectralOptions& options) {
  if (!problem.bounded_with_frames())
    throw Error(ErrorCode::InvalidArgument, "eigenfunctions need a bounded problem with two frames");
  const double a = problem.geometry.left;
  const double b = problem.geometry.right;
  const double mid = 0.5 * (a + b);
  Matching m;
  m.left = record_path(problem, lambda, apply_j(problem.left_frame().adjoint_map()), a, mid, options);
  m.right = record_path(problem, lambda, apply_j(problem.right_frame().adjoint_map()), b, mid, options);
  const Eigen::Index d = problem.dim.half();
  CMat joined(2 * d, 2 * d);
  joined << m.left.q.back(), m.right.q.back();
  m.svd.compute(joined, Eigen::ComputeFullV);
  return m;
}

double matching_smallest_singular_value(const CanonicalProblem& problem, cplx lambda,
                                        const SpectralOptions& options) {
  const Matching m = match_at_midpoint(problem, lambda, options);
  return m.svd.singularValues()(m.svd.singularValues().size() - 1);
}

}  // namespace

CharacteristicValue characteristic_function(const CanonicalProblem& problem, cplx lambda,
                                            const SpectralOptions& options) {
  if (!problem.bounded_with_frames())
    throw Error(ErrorCode::InvalidArgument, "characteristic function needs a bounded problem with two frames");
  const CMat initial = apply_j(problem.left_frame().adjoint_map());
  const PropagatedFrame frame = propagate_frame(problem, lambda, initial, problem.geometry.left,
                                                problem.geometry.right, options.step, std::max(1, options.renorm_every));
  const CMat reduced = problem.right_frame().row_form() * frame.columns;
  CharacteristicValue out;
  out.lambda = lambda;
  out.mantissa = reduced.determinant();
  out.log_scale = frame.accumulated_scale;
  out.singular_values = Eigen::JacobiSVD<CMat>(reduced).singularValues();
  return out;
}

EigenPair eigenfunction(const CanonicalProblem& problem, cplx lambda_star, const SpectralOptions& options) {
  const Matching match = match_at_midpoint(problem, lambda_star, options);
  const RVec& sv = match.svd.singularValues();
  const Eigen::Index d = problem.dim.half();
  const double smallest = sv(2 * d - 1);
  if (smallest > options.eigen_accept_tol)
    throw Error(ErrorCode::NotAnEigenvalue,
                "left and right boundary subspaces do not intersect (smallest singular value " +
                    std::to_string(smallest) + ")",
                smallest);
  const int multiplicity = static_cast<int>((sv.array() <= options.multiplicity_tol).count());
  const RecordedPath& left = match.left;
  const RecordedPath& right = match.right;
  const auto& svd = match.svd;

  std::vector<double> grid = left.x;
  for (auto it = right.x.rbegin() + 1; it != right.x.rend(); ++it) grid.push_back(*it);
  const Eigen::Index n_left = static_cast<Eigen::Index>(left.x.size());
  const Eigen::Index n_right = static_cast<Eigen::Index>(right.x.size());

  EigenPair pair;
  pair.lambda = lambda_star;
  pair.multiplicity = std::max(1, multiplicity);
  for (int m = 0; m < pair.multiplicity; ++m) {
    const CVec null = svd.matrixV().col(2 * d - 1 - m);
    const CMat lv = reconstruct(left, null.head(d));
    const CMat rv = reconstruct(right, -null.tail(d));
    SampledPath mode;
    mode.x = grid;
    mode.values.resize(2 * d, n_left + n_right - 1);
    mode.values.leftCols(n_left) = lv;
    for (Eigen::Index k = 0; k + 1 < n_right; ++k) mode.values.col(n_left + k) = rv.col(n_right - 2 - k);
    for (const SampledPath& prev : pair.eigenfunctions) mode.values -= h_inner(prev, mode, problem) * prev.values;
    const double norm2 = h_inner(mode, mode, problem).real();
    if (!(norm2 > 1e-300)) throw Error(ErrorCode::ZeroHNorm, "eigenfunction has zero H-norm");
    mode.values /= std::sqrt(norm2);
    normalize_phase(mode);
    pair.eigenfunctions.push_back(std::move(mode));
  }

  const StepPropagator prop(problem, lambda_star, options.step.scheme);
  const CMat theta = problem.left_frame().row_form();
  const CMat beta = problem.right_frame().row_form();
  std::vector<CMat> steps;
  steps.reserve(grid.size());
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) steps.push_back(prop.step(grid[k], grid[k + 1]));
  for (const SampledPath& mode : pair.eigenfunctions) {
    const double peak = max_column_norm(mode.values);
    const double bc = (theta * mode.values.col(0)).norm() + (beta * mode.values.col(mode.points() - 1)).norm();
    pair.boundary_residual = std::max(pair.boundary_residual, bc / peak);
    double ode = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      ode = std::max(ode, (mode.values.col(i + 1) - steps[k] * mode.values.col(i)).norm());
    }
    pair.ode_residual = std::max(pair.ode_residual, ode / peak);
  }
  return pair;
}

SpectrumReport eigenvalues_in(const CanonicalProblem& problem, double lambda_min, double lambda_max, int n_scan,
                              const SpectralOptions& options) {
  if (!problem.bounded_with_frames())
    throw Error(ErrorCode::InvalidArgument, "eigenvalues_in needs a bounded problem with two frames");
  if (n_scan < 2) throw Error(ErrorCode::InvalidArgument, "n_scan must be >= 2");
  if (!(lambda_max > lambda_min)) throw Error(ErrorCode::InvalidArgument, "empty scan window");

  SpectrumReport report;
  report.problem_summary = problem.kind + " on [" + std::to_string(problem.geometry.left) + ", " +
                           std::to_string(problem.geometry.right) + "], d = " + std::to_string(problem.dim.half());
  report.window_min = lambda_min;
  report.window_max = lambda_max;
  if (!problem.pencil.hermitian)
    report.warnings.push_back("non-Hermitian pencil: real-axis scan only, complex eigenvalues are not searched");

  const double spacing = (lambda_max - lambda_min) / (n_scan - 1);
  std::vector<double> grid(static_cast<std::size_t>(n_scan));
  for (int i = 0; i < n_scan; ++i) grid[static_cast<std::size_t>(i)] = lambda_min + spacing * i;
  grid.back() = lambda_max;

  std::vector<double> log_abs;
  double peak = 0.0;
  cplx peak_value = 1.0;
  for (double lam : grid) {
    const CharacteristicValue cv = characteristic_function(problem, lam, options);
    report.scan.push_back({lam, cv.mantissa, cv.log_scale});
    log_abs.push_back(cv.log_abs());
    if (std::abs(cv.mantissa) > peak) {
      peak = std::abs(cv.mantissa);
      peak_value = cv.mantissa;
    }
  }

  // Real reduction: rotate by the phase of the largest sample and check the imaginary parts vanish.
  const cplx rotation = peak > 0 ? std::conj(peak_value) / peak : cplx(1.0);
  bool real_reduction = peak > 0;
  for (const ScanSample& s : report.scan)
    if (std::abs((s.mantissa * rotation).imag()) > 1e-9 * peak) real_reduction = false;

  auto reduced = [&](double lam) {
    const CharacteristicValue cv = characteristic_function(problem, lam, options);
    return (cv.mantissa * rotation).real();
  };
  auto log_abs_at = [&](double lam) { return characteristic_function(problem, lam, options).log_abs(); };
  auto close_enough = [&](double lo, double hi) {
    return std::abs(hi - lo) <= options.refine_tol * std::max(1.0, std::abs(lo));
  };

  std::vector<double> roots;
  std::vector<bool> bracketed(grid.size(), false);
  if (real_reduction) {
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double f0 = (report.scan[i].mantissa * rotation).real();
      const double f1 = (report.scan[i + 1].mantissa * rotation).real();
      if (f0 == 0.0) {
        roots.push_back(grid[i]);
        bracketed[i] = true;
      } else if (f0 * f1 < 0.0) {
        std::uintmax_t iterations = 200;
        const auto [lo, hi] =
            boost::math::tools::toms748_solve(reduced, grid[i], grid[i + 1], f0, f1, close_enough, iterations);
        roots.push_back(0.5 * (lo + hi));
        bracketed[i] = bracketed[i + 1] = true;
      }
    }
    if ((report.scan.back().mantissa * rotation).real() == 0.0) {
      roots.push_back(grid.back());
      bracketed.back() = true;
    }
  }

  // Dips of |D| (even-order zeros, or complex data).
  std::vector<double> abs_values;
  for (const ScanSample& s : report.scan) abs_values.push_back(std::abs(s.value()));
  const double dip_tol = options.dip_factor * median(abs_values);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    if (bracketed[i] || bracketed[i - 1]) continue;
    if (!(log_abs[i] < log_abs[i - 1] && log_abs[i] < log_abs[i + 1])) continue;
    const auto [lam, value] = boost::math::tools::brent_find_minima(log_abs_at, grid[i - 1], grid[i + 1], 40);
    if (value <= std::log(dip_tol) &&
        matching_smallest_singular_value(problem, lam, options) <= options.eigen_accept_tol)
      roots.push_back(lam);
  }

  std::sort(roots.begin(), roots.end());
  for (double lam : roots) {
    if (lam < lambda_min || lam > lambda_max) continue;
    if (!report.eigenpairs.empty() &&
        std::abs(report.eigenpairs.back().lambda.real() - lam) <= 1e-9 * std::max(1.0, std::abs(lam)))
      continue;
    EigenPair pair = eigenfunction(problem, lam, options);
    if (pair.boundary_residual > options.bc_tol)
      report.warnings.push_back("boundary residual " + std::to_string(pair.boundary_residual) + " at lambda = " +
                                std::to_string(lam));
    if (pair.ode_residual > options.ode_tol)
      report.warnings.push_back("ode residual " + std::to_string(pair.ode_residual) + " at lambda = " +
                                std::to_string(lam));
    report.eigenpairs.push_back(std::move(pair));
  }
  for (std::size_t i = 1; i < report.eigenpairs.size(); ++i) {
    const double gap = report.eigenpairs[i].lambda.real() - report.eigenpairs[i - 1].lambda.real();
    if (gap < 2.0 * spacing)
      report.warnings.push_back("ScanTooCoarse: eigenvalues closer than two scan cells near lambda = " +
                                std::to_string(report.eigenpairs[i].lambda.real()));
  }
  return report;
}

cplx h_inner(const SampledPath& f, const SampledPath& g, const CanonicalProblem& problem) {
  require_same_grid(f, g);
  return trapezoid(f.x, [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    return f.values.col(i).dot(problem.weight(f.x[k]) * g.values.col(i));
  });
}

double greens_identity_residual(const RelationPair& first, const RelationPair& second,
                                const CanonicalProblem& problem) {
  const SampledPath& u = first.u;
  const SampledPath& v = first.v;
  const SampledPath& f = second.u;
  const SampledPath& g = second.v;
  const cplx lhs = h_inner(u, g, problem) - h_inner(v, f, problem);
  const Eigen::Index last = u.points() - 1;
  const cplx right_end = u.values.col(last).dot(apply_j(CMat(f.values.col(last))).col(0));
  const cplx left_end = u.values.col(0).dot(apply_j(CMat(f.values.col(0))).col(0));
  return std::abs(lhs - (right_end - left_end));
}

double greens_identity_scale(const RelationPair& first, const RelationPair& second,
                             const CanonicalProblem& problem) {
  auto norm = [&](const SampledPath& p) { return std::sqrt(std::max(0.0, h_inner(p, p, problem).real())); };
  const Eigen::Index last = first.u.points() - 1;
  const double ends = std::abs(first.u.values.col(last).dot(apply_j(CMat(second.u.values.col(last))).col(0))) +
                      std::abs(first.u.values.col(0).dot(apply_j(CMat(second.u.values.col(0))).col(0)));
  return norm(first.u) * norm(second.v) + norm(first.v) * norm(second.u) + ends;
}

RelationPair random_relation_pair(const CanonicalProblem& problem, double a, double b, int n, std::uint64_t seed) {
  constexpr int kModes = 4;
  const int dim = problem.dim.full();
  CounterRng rng(seed);
  std::vector<CMat> coeffs;  // per mode: dim x 2 (cos, sin)
  for (int k = 0; k < kModes; ++k) {
    CMat c(dim, 2);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < 2; ++j) c(i, j) = cplx(rng.normal(), rng.normal()) / double(1 + k);
    coeffs.push_back(c);
  }
  CVec u0(dim);
  for (int i = 0; i < dim; ++i) u0(i) = cplx(rng.normal(), rng.normal());

  const double len = b - a;
  auto v_at = [&](double x) {
    const double t = std::numbers::pi * (x - a) / len;
    CVec v = CVec::Zero(dim);
    for (int k = 0; k < kModes; ++k) v += coeffs[k].col(0) * std::cos(k * t) + coeffs[k].col(1) * std::sin(k * t);
    return v;
  };

  RelationPair pair;
  pair.u.x = uniform_grid(a, b, n);
  pair.v.x = pair.u.x;
  pair.u.values.resize(dim, n);
  pair.v.values.resize(dim, n);
  static const double gl_node = std::sqrt(3.0 / 5.0);
  CVec u = u0;
  for (int k = 0; k < n; ++k) {
    const double x = pair.u.x[static_cast<std::size_t>(k)];
    pair.v.values.col(k) = v_at(x);
    if (k > 0) {
      const double x0 = pair.u.x[static_cast<std::size_t>(k - 1)];
      const double c = 0.5 * (x0 + x);
      const double r = 0.5 * (x - x0);
      const CVec integral = r * ((5.0 / 9.0) * (problem.weight(c - r * gl_node) * v_at(c - r * gl_node)) +
                                 (8.0 / 9.0) * (problem.weight(c) * v_at(c)) +
                                 (5.0 / 9.0) * (problem.weight(c + r * gl_node) * v_at(c + r * gl_node)));
      u -= apply_j(CMat(integral)).col(0);
    }
    pair.u.values.col(k) = u;
  }
  return pair;
}

Witnesses symmetry_defect(const SpectrumReport& report, const CanonicalProblem& problem) {
  std::vector<const SampledPath*> modes;
  std::vector<cplx> lambdas;
  for (const EigenPair& pair : report.eigenpairs)
    for (const SampledPath& f : pair.eigenfunctions) {
      modes.push_back(&f);
      lambdas.push_back(pair.lambda);
    }
  const auto n = static_cast<Eigen::Index>(modes.size());
  Witnesses w;
  w.gram.resize(n, n);
  w.symmetry.resize(n, n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) {
      const cplx g = h_inner(*modes[static_cast<std::size_t>(m)], *modes[static_cast<std::size_t>(k)], problem);
      w.gram(m, k) = g;
      // <lambda_m W y_m, y_k> - <y_m, lambda_k W y_k> with the plain L2 pairing.
      const cplx lhs = std::conj(lambdas[static_cast<std::size_t>(m)]) * g;
      const cplx rhs = lambdas[static_cast<std::size_t>(k)] * g;
      w.symmetry(m, k) = std::abs(lhs - rhs);
      if (m != k) w.max_offdiag_gram = std::max(w.max_offdiag_gram, std::abs(g));
      w.max_symmetry_defect = std::max(w.max_symmetry_defect, w.symmetry(m, k));
    }
  return w;
}

double rayleigh_quotient(const SampledPath& y, const CanonicalProblem& problem) {
  const double hnorm = h_inner(y, y, problem).real();
  if (!(hnorm > 0.0)) throw Error(ErrorCode::ZeroHNorm, "path has zero H-norm");
  const CMat dy = derivative(y);
  const cplx numerator = trapezoid(y.x, [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    const CVec jdy = apply_j(CMat(dy.col(i))).col(0);
    return y.values.col(i).dot(jdy - problem.pencil.c0(y.x[k]) * y.values.col(i));
  });
  const cplx denominator = trapezoid(y.x, [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    return y.values.col(i).dot(problem.pencil.c1(y.x[k]) * y.values.col(i));
  });
  if (!(std::abs(denominator.real()) > 0.0)) throw Error(ErrorCode::ZeroHNorm, "spectral weight vanishes on path");
  return numerator.real() / denominator.real();
}

}  // namespace canosys
