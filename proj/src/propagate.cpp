#include "canosys/propagate.hpp"

#include <cmath>

namespace canosys {

namespace {

constexpr double kLocalStructureLimit = 1e-6;
constexpr double kCollapseRatio = 1e-13;

bool all_finite(const CMat& m) { return m.allFinite(); }

}  // namespace

StepPropagator::StepPropagator(const CanonicalProblem& problem, cplx lambda, Scheme scheme)
    : problem_(&problem), lambda_(lambda), scheme_(scheme) {}

CMat StepPropagator::generator(double x) const { return apply_j_inverse(problem_->pencil.at(x, lambda_)); }

CMat StepPropagator::step(double x0, double x1) const {
  const double h = x1 - x0;
  if (scheme_ == Scheme::Midpoint) return expm(h * generator(x0 + 0.5 * h));
  static const double offset = std::sqrt(3.0) / 6.0;
  const CMat a1 = generator(x0 + (0.5 - offset) * h);
  const CMat a2 = generator(x0 + (0.5 + offset) * h);
  const CMat omega = (0.5 * h) * (a1 + a2) + (std::sqrt(3.0) / 12.0 * h * h) * (a2 * a1 - a1 * a2);
  return expm(omega);
}

std::vector<double> step_grid(double x_from, double x_to, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  const double span = std::abs(x_to - x_from);
  const int n = std::max(1, static_cast<int>(std::ceil(span / h - 1e-9)));
  std::vector<double> grid(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) grid[static_cast<std::size_t>(i)] = x_from + (x_to - x_from) * i / n;
  grid.back() = x_to;
  return grid;
}

double structure_defect(const CMat& t) {
  const CMat jt = apply_j(t);
  return (t.adjoint() * jt - symplectic_matrix(SymplecticDim(static_cast<int>(t.rows() / 2)))).norm();
}

std::vector<TransferMatrix> transfer_path(const CanonicalProblem& problem, cplx lambda, double x_from,
                                          double x_to, const StepControl& step, int record_every) {
  const int n = problem.dim.full();
  std::vector<TransferMatrix> path;
  TransferMatrix current{CMat::Identity(n, n), x_from, lambda, 0.0};
  path.push_back(current);
  if (x_from == x_to) return path;

  const bool check = problem.pencil.hermitian && lambda.imag() == 0.0;
  const StepPropagator prop(problem, lambda, step.scheme);
  const auto grid = step_grid(x_from, x_to, step.h);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const CMat e = prop.step(grid[i - 1], grid[i]);
    if (check) {
      const double local = structure_defect(e);
      if (local > kLocalStructureLimit)
        throw Error(ErrorCode::StepTooLarge, "per-step structure defect " + std::to_string(local), local);
    }
    current.value = e * current.value;
    current.at_x = grid[i];
    const bool last = i + 1 == grid.size();
    if (last || (record_every > 0 && i % static_cast<std::size_t>(record_every) == 0)) {
      if (!all_finite(current.value))
        throw Error(ErrorCode::NonFiniteState, "transfer matrix overflowed; use propagate_frame");
      current.structure_defect = structure_defect(current.value);
      path.push_back(current);
    }
  }
  return path;
}

TransferMatrix transfer_matrix(const CanonicalProblem& problem, cplx lambda, double x_from, double x_to,
                               const StepControl& step) {
  return transfer_path(problem, lambda, x_from, x_to, step, 0).back();
}

TransferMatrix transfer_matrix(const CanonicalProblem& problem, cplx lambda, double x_target,
                               const StepControl& step) {
  if (!problem.geometry.contains(x_target))
    throw Error(ErrorCode::InvalidArgument, "x_target outside the problem geometry");
  return transfer_matrix(problem, lambda, problem.geometry.left, x_target, step);
}

PropagatedFrame propagate_frame(const CanonicalProblem& problem, cplx lambda, const CMat& initial, double x_from,
                                double x_to, const StepControl& step, int renorm_every,
                                const FrameObserver& observer) {
  if (initial.rows() != problem.dim.full())
    throw Error(ErrorCode::DimensionMismatch, "initial frame must have 2d rows");
  PropagatedFrame frame;
  frame.lambda = lambda;
  frame.at_x = x_from;
  frame.columns = initial;

  const bool renormalize = renorm_every > 0;
  const CMat no_r;
  auto renorm = [&](CMat& r_out) {
    ThinQR qr = thin_qr(frame.columns);
    const RVec diag = qr.r.diagonal().real();
    if (!(diag.minCoeff() > kCollapseRatio * diag.maxCoeff()))
      throw Error(ErrorCode::RankCollapse, "frame columns became numerically dependent",
                  diag.maxCoeff() > 0 ? diag.minCoeff() / diag.maxCoeff() : 0.0);
    frame.columns = std::move(qr.q);
    frame.accumulated_scale += qr.log_abs_det_r;
    const Eigen::Index k = frame.columns.cols();
    frame.max_gram_defect =
        std::max(frame.max_gram_defect, (frame.columns.adjoint() * frame.columns - CMat::Identity(k, k)).norm());
    r_out = std::move(qr.r);
  };

  CMat r_step;
  if (renormalize) {
    renorm(r_step);
  }
  if (observer) observer(x_from, frame.columns, renormalize ? r_step : no_r);
  if (x_from == x_to) return frame;

  const StepPropagator prop(problem, lambda, step.scheme);
  const auto grid = step_grid(x_from, x_to, step.h);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    frame.columns = prop.step(grid[i - 1], grid[i]) * frame.columns;
    frame.at_x = grid[i];
    const bool last = i + 1 == grid.size();
    bool did_renorm = false;
    if (renormalize && (last || i % static_cast<std::size_t>(renorm_every) == 0)) {
      renorm(r_step);
      did_renorm = true;
    } else if (!all_finite(frame.columns)) {
      throw Error(ErrorCode::NonFiniteState, "frame overflowed between renormalizations");
    }
    if (observer) observer(grid[i], frame.columns, did_renorm ? r_step : no_r);
  }
  return frame;
}

}  // namespace canosys
