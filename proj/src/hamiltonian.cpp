#include "canosys/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace canosys {

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

bool frame_is_real(const BoundaryCondition& bc) {
  if (const auto* f = std::get_if<LagrangianFrame>(&bc))
    return f->theta1().imag().isZero(0.0) && f->theta2().imag().isZero(0.0);
  return true;
}

void require_dim(const BoundaryCondition& bc, SymplecticDim dim) {
  if (const auto* f = std::get_if<LagrangianFrame>(&bc))
    if (!(f->dim() == dim)) throw Error(ErrorCode::DimensionMismatch, "boundary frame dimension does not match problem");
}

void check_geometry_bcs(const Geometry& g, const BoundaryCondition& left, const BoundaryCondition& right) {
  const bool lf = std::holds_alternative<LagrangianFrame>(left);
  const bool rf = std::holds_alternative<LagrangianFrame>(right);
  if (g.kind == GeometryKind::Bounded && !(lf && rf))
    throw Error(ErrorCode::InvalidArgument, "bounded geometry requires two Lagrangian frames");
  if (g.kind == GeometryKind::HalfLine && !(lf && !rf))
    throw Error(ErrorCode::InvalidArgument, "half-line geometry requires a left frame and an asymptotic right end");
  if (g.kind == GeometryKind::FullLine && (lf || rf))
    throw Error(ErrorCode::InvalidArgument, "full-line geometry requires asymptotic conditions at both ends");
}

void probe_pencil(CanonicalProblem& problem, int check_points) {
  const auto grid = uniform_grid(problem.geometry.left, problem.geometry.right, std::max(check_points, 2));
  bool hermitian = true;
  bool real = frame_is_real(problem.left_bc) && frame_is_real(problem.right_bc);
  for (double x : grid) {
    const CMat c0 = problem.pencil.c0(x);
    const CMat c1 = problem.pencil.c1(x);
    const double scale = 1.0 + c0.norm() + c1.norm();
    if ((c0 - c0.adjoint()).norm() > 1e-12 * scale || (c1 - c1.adjoint()).norm() > 1e-12 * scale) hermitian = false;
    if (!c0.imag().isZero(0.0) || !c1.imag().isZero(0.0)) real = false;
  }
  problem.pencil.hermitian = hermitian;
  problem.real_data = real;
}

}  // namespace

Geometry Geometry::bounded(double a, double b) {
  if (!(b > a)) throw Error(ErrorCode::InvalidArgument, "bounded interval needs left < right");
  return {GeometryKind::Bounded, a, b};
}

Geometry Geometry::half_line(double a, double truncation) {
  if (!(truncation > 0)) throw Error(ErrorCode::InvalidArgument, "truncation length must be positive");
  return {GeometryKind::HalfLine, a, a + truncation};
}

Geometry Geometry::full_line(double half_length) {
  if (!(half_length > 0)) throw Error(ErrorCode::InvalidArgument, "truncation half-length must be positive");
  return {GeometryKind::FullLine, -half_length, half_length};
}

std::string_view geometry_name(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::Bounded: return "bounded";
    case GeometryKind::HalfLine: return "half_line";
    case GeometryKind::FullLine: return "full_line";
  }
  return "unknown";
}

std::string_view nls_variant_name(NlsVariant v) { return v == NlsVariant::Paper ? "paper" : "corrected"; }

HamiltonianField HamiltonianField::closed_form(std::string name, SymplecticDim dim, MatrixFunction fn) {
  HamiltonianField f;
  f.name_ = std::move(name);
  f.dim_ = dim.half();
  f.fn_ = std::move(fn);
  return f;
}

HamiltonianField HamiltonianField::constant(std::string name, const CMat& value) {
  if (value.rows() != value.cols() || value.rows() % 2 != 0)
    throw Error(ErrorCode::DimensionMismatch, "Hamiltonian must be 2d x 2d");
  return closed_form(std::move(name), SymplecticDim(static_cast<int>(value.rows() / 2)),
                     [value](double) { return value; });
}

HamiltonianField HamiltonianField::sampled(std::vector<double> nodes, std::vector<CMat> values) {
  if (nodes.size() < 2 || nodes.size() != values.size())
    throw Error(ErrorCode::InvalidArgument, "sampled field needs >= 2 nodes with one matrix each");
  const Eigen::Index n = values.front().rows();
  if (n % 2 != 0) throw Error(ErrorCode::DimensionMismatch, "Hamiltonian must be 2d x 2d");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (values[i].rows() != n || values[i].cols() != n)
      throw Error(ErrorCode::DimensionMismatch, "sampled matrices must share one shape");
    if (i > 0 && !(nodes[i] > nodes[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "sampled abscissae must be strictly increasing");
  }
  HamiltonianField f;
  f.name_ = "sampled";
  f.dim_ = static_cast<int>(n / 2);
  f.nodes_ = std::move(nodes);
  f.values_ = std::move(values);
  return f;
}

CMat HamiltonianField::operator()(double x) const {
  if (!is_sampled()) return fn_(x);
  if (x <= nodes_.front()) return values_.front();
  if (x >= nodes_.back()) return values_.back();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - nodes_[lo]) / (nodes_[hi] - nodes_[lo]);
  return (1.0 - t) * values_[lo] + t * values_[hi];
}

bool CanonicalProblem::bounded_with_frames() const {
  return geometry.kind == GeometryKind::Bounded && std::holds_alternative<LagrangianFrame>(left_bc) &&
         std::holds_alternative<LagrangianFrame>(right_bc);
}

const LagrangianFrame& CanonicalProblem::left_frame() const {
  if (const auto* f = std::get_if<LagrangianFrame>(&left_bc)) return *f;
  throw Error(ErrorCode::InvalidArgument, "left boundary is asymptotic, not a frame");
}

const LagrangianFrame& CanonicalProblem::right_frame() const {
  if (const auto* f = std::get_if<LagrangianFrame>(&right_bc)) return *f;
  throw Error(ErrorCode::InvalidArgument, "right boundary is asymptotic, not a frame");
}

ScalarFunction sech2_profile(double amplitude, double rate) {
  return [amplitude, rate](double x) {
    const double s = sech(rate * x);
    return amplitude * s * s;
  };
}

ScalarFunction constant_profile(double value) {
  return [value](double) { return value; };
}

CanonicalProblem sturm_liouville_to_canonical(ScalarFunction p, ScalarFunction q, ScalarFunction rho,
                                              Geometry geometry, BoundaryCondition left, BoundaryCondition right,
                                              int check_points) {
  for (double x : uniform_grid(geometry.left, geometry.right, std::max(check_points, 2))) {
    if (!(p(x) > 0.0)) throw Error(ErrorCode::NonPositiveCoefficient, "p(x) <= 0 at x = " + std::to_string(x), p(x));
    if (!(rho(x) > 0.0))
      throw Error(ErrorCode::NonPositiveCoefficient, "rho(x) <= 0 at x = " + std::to_string(x), rho(x));
  }
  const SymplecticDim dim(1);
  require_dim(left, dim);
  require_dim(right, dim);
  check_geometry_bcs(geometry, left, right);

  CanonicalProblem problem;
  problem.kind = "sturm_liouville";
  problem.dim = dim;
  problem.geometry = geometry;
  problem.left_bc = std::move(left);
  problem.right_bc = std::move(right);
  problem.pencil.c0 = [p, q](double x) {
    CMat c = CMat::Zero(2, 2);
    c(0, 0) = q(x);
    c(1, 1) = -1.0 / p(x);
    return c;
  };
  problem.pencil.c1 = [rho](double x) {
    CMat c = CMat::Zero(2, 2);
    c(0, 0) = -rho(x);
    return c;
  };
  problem.weight = HamiltonianField::closed_form("sturm_liouville_weight", dim, [rho](double x) {
    CMat h = CMat::Zero(2, 2);
    h(0, 0) = rho(x);
    return h;
  });
  problem.state_labels = {"u", "p u'"};
  probe_pencil(problem, 101);
  return problem;
}

CanonicalProblem traveling_wave_to_canonical(ScalarFunction a, ScalarFunction b, Geometry geometry,
                                             BoundaryCondition left, BoundaryCondition right, int check_points) {
  const SymplecticDim dim(1);
  require_dim(left, dim);
  require_dim(right, dim);
  check_geometry_bcs(geometry, left, right);

  CanonicalProblem problem;
  problem.kind = "traveling_wave";
  problem.dim = dim;
  problem.geometry = geometry;
  problem.left_bc = std::move(left);
  problem.right_bc = std::move(right);
  problem.pencil.c0 = [a, b](double x) {
    CMat c = CMat::Zero(2, 2);
    c(0, 0) = -b(x);
    c(0, 1) = -a(x);
    c(1, 1) = -1.0;
    return c;
  };
  problem.pencil.c1 = [](double) {
    CMat c = CMat::Zero(2, 2);
    c(0, 0) = 1.0;
    return c;
  };
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = 1.0;
  problem.weight = HamiltonianField::constant("traveling_wave_mass", m);
  problem.state_labels = {"v", "v'"};
  probe_pencil(problem, check_points);
  return problem;
}

CMat nls_hamiltonian_block_order(double eta, double x) {
  const double s = sech(eta * x);
  CMat h = CMat::Zero(4, 4);
  h(0, 0) = 6.0 * eta * eta * s * s;
  h(1, 1) = 1.0;
  h(2, 2) = 2.0 * eta * eta * s * s;
  h(3, 3) = 1.0;
  return h;
}

namespace {
// internal index -> block-diagonal index: (p, q, p', q') -> (p, p', q, q')
constexpr int kInternalToBlock[4] = {0, 2, 1, 3};
}  // namespace

CVec nls_to_block_order(const CVec& internal) {
  CVec out(4);
  for (int i = 0; i < 4; ++i) out(kInternalToBlock[i]) = internal(i);
  return out;
}

CVec nls_from_block_order(const CVec& block) {
  CVec out(4);
  for (int i = 0; i < 4; ++i) out(i) = block(kInternalToBlock[i]);
  return out;
}

CMat nls_to_block_order(const CMat& internal) {
  CMat out(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(kInternalToBlock[i], kInternalToBlock[j]) = internal(i, j);
  return out;
}

CanonicalProblem nls_soliton_problem(double eta, double half_length, NlsVariant variant) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "soliton amplitude eta must be positive");
  const double mass = variant == NlsVariant::Corrected ? eta * eta : 0.0;
  const SymplecticDim dim(2);

  CanonicalProblem problem;
  problem.kind = "nls_soliton";
  problem.dim = dim;
  problem.geometry = Geometry::full_line(half_length);
  problem.left_bc = Asymptotic{};
  problem.right_bc = Asymptotic{};
  problem.pencil.c0 = [eta, mass](double x) {
    const double s = sech(eta * x);
    const double s2 = eta * eta * s * s;
    CMat c = CMat::Zero(4, 4);
    c(0, 0) = mass - 6.0 * s2;
    c(1, 1) = mass - 2.0 * s2;
    c(2, 2) = -1.0;
    c(3, 3) = -1.0;
    return c;
  };
  problem.pencil.c1 = [](double) {
    CMat c = CMat::Zero(4, 4);
    c(0, 1) = -1.0;
    c(1, 0) = -1.0;
    return c;
  };
  CMat limit = CMat::Zero(4, 4);
  limit(0, 0) = mass;
  limit(1, 1) = mass;
  limit(2, 2) = -1.0;
  limit(3, 3) = -1.0;
  problem.pencil.c0_limit_minus = limit;
  problem.pencil.c0_limit_plus = limit;
  problem.pencil.hermitian = true;
  problem.real_data = true;
  problem.weight = HamiltonianField::closed_form("nls_hamiltonian", dim, [eta](double x) {
    const double s = sech(eta * x);
    CMat h = CMat::Zero(4, 4);
    h(0, 0) = 6.0 * eta * eta * s * s;
    h(1, 1) = 2.0 * eta * eta * s * s;
    h(2, 2) = 1.0;
    h(3, 3) = 1.0;
    return h;
  });
  problem.parameters = {{"eta", eta}, {"L", half_length}, {"variant_corrected", variant == NlsVariant::Corrected ? 1.0 : 0.0}};
  problem.state_labels = {"p", "q", "p'", "q'"};
  return problem;
}

CanonicalProblem canonical_form_problem(const HamiltonianField& h, Geometry geometry, BoundaryCondition left,
                                        BoundaryCondition right) {
  const SymplecticDim dim = h.dim();
  CanonicalProblem problem = raw_pencil_problem(
      dim, [n = dim.full()](double) { return CMat::Zero(n, n).eval(); }, [h](double x) { return h(x); }, h,
      geometry, std::move(left), std::move(right));
  problem.kind = "canonical";
  return problem;
}

CanonicalProblem raw_pencil_problem(SymplecticDim dim, MatrixFunction c0, MatrixFunction c1,
                                    const HamiltonianField& weight, Geometry geometry, BoundaryCondition left,
                                    BoundaryCondition right, int check_points) {
  require_dim(left, dim);
  require_dim(right, dim);
  check_geometry_bcs(geometry, left, right);
  if (!(weight.dim() == dim)) throw Error(ErrorCode::DimensionMismatch, "weight dimension does not match problem");
  const CMat probe0 = c0(geometry.left);
  const CMat probe1 = c1(geometry.left);
  if (probe0.rows() != dim.full() || probe0.cols() != dim.full() || probe1.rows() != dim.full() ||
      probe1.cols() != dim.full())
    throw Error(ErrorCode::DimensionMismatch, "pencil matrices must be 2d x 2d");

  CanonicalProblem problem;
  problem.kind = "raw_pencil";
  problem.dim = dim;
  problem.geometry = geometry;
  problem.left_bc = std::move(left);
  problem.right_bc = std::move(right);
  problem.pencil.c0 = std::move(c0);
  problem.pencil.c1 = std::move(c1);
  problem.weight = weight;
  for (int i = 0; i < dim.full(); ++i) problem.state_labels.push_back("y" + std::to_string(i + 1));
  probe_pencil(problem, check_points);
  return problem;
}

PsdReport psd_report(const HamiltonianField& field, const std::vector<double>& grid, double psd_tol) {
  PsdReport report;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  int zero_run = 0;
  for (double x : grid) {
    const CMat h = field(x);
    report.hermitian_defect = std::max(report.hermitian_defect, (h - h.adjoint()).norm());
    const CMat sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> eig(sym, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    if (lo < report.min_eigenvalue) {
      report.min_eigenvalue = lo;
      report.argmin_x = x;
    }
    zero_run = h.norm() > 0.0 ? 0 : zero_run + 1;
    if (zero_run >= 3) report.nondegenerate = false;
  }
  report.passed = report.min_eigenvalue >= -psd_tol && report.hermitian_defect <= 1e-12 && report.nondegenerate;
  return report;
}

double first_order_residual(const CanonicalProblem& problem, cplx lambda, const std::function<CVec(double)>& y,
                            const std::function<CVec(double)>& dy, const std::vector<double>& grid) {
  double worst = 0.0;
  for (double x : grid) {
    const CVec value = y(x);
    const CVec lhs = apply_j(CMat(dy(x)));
    const CVec rhs = problem.pencil.at(x, lambda) * value;
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<double> uniform_grid(double a, double b, int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  g.back() = b;
  return g;
}

}  // namespace canosys
