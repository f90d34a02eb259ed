#pragma once

// Problem construction: coefficient fields, the pencil J y' = (C0(x) + lambda C1(x)) y,
// and the Sturm-Liouville, traveling-wave and NLS-soliton reductions.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "canosys/symplectic.hpp"

namespace canosys {

using ScalarFunction = std::function<double(double)>;
using MatrixFunction = std::function<CMat(double)>;

enum class GeometryKind { Bounded, HalfLine, FullLine };

/// Integration domain. Half-line and full-line geometries are realized by truncation:
/// [left, left + L] and [-L, L] respectively.
struct Geometry {
  GeometryKind kind = GeometryKind::Bounded;
  double left = 0.0;
  double right = 1.0;

  static Geometry bounded(double a, double b);
  static Geometry half_line(double a, double truncation);
  static Geometry full_line(double half_length);

  double length() const noexcept { return right - left; }
  bool contains(double x) const noexcept { return x >= left && x <= right; }
};

std::string_view geometry_name(GeometryKind kind);

/// Decay condition imposed at an unbounded end.
struct Asymptotic {};
using BoundaryCondition = std::variant<LagrangianFrame, Asymptotic>;

/// x -> H(x), Hermitian positive semi-definite 2d x 2d. Either closed-form or sampled with
/// piecewise-linear interpolation (which preserves Hermitian PSD structure).
class HamiltonianField {
 public:
  static HamiltonianField closed_form(std::string name, SymplecticDim dim, MatrixFunction fn);
  static HamiltonianField sampled(std::vector<double> nodes, std::vector<CMat> values);
  static HamiltonianField constant(std::string name, const CMat& value);

  CMat operator()(double x) const;
  SymplecticDim dim() const { return SymplecticDim(dim_); }
  const std::string& name() const noexcept { return name_; }
  bool is_sampled() const noexcept { return !nodes_.empty(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }

 private:
  HamiltonianField() = default;
  std::string name_;
  int dim_ = 1;
  MatrixFunction fn_;
  std::vector<double> nodes_;
  std::vector<CMat> values_;
};

/// C0(x) + lambda C1(x). `hermitian` marks pencils whose C0 and C1 are Hermitian everywhere;
/// only those carry the self-adjointness witnesses.
struct CoefficientPencil {
  MatrixFunction c0;
  MatrixFunction c1;
  bool hermitian = true;
  // Closed-form limits of C0 at -inf / +inf when the builder knows them.
  std::optional<CMat> c0_limit_minus;
  std::optional<CMat> c0_limit_plus;

  CMat at(double x, cplx lambda) const { return c0(x) + lambda * c1(x); }
};

enum class NlsVariant { Paper, Corrected };
std::string_view nls_variant_name(NlsVariant v);

struct CanonicalProblem {
  std::string kind;
  SymplecticDim dim{1};
  CoefficientPencil pencil;
  Geometry geometry;
  BoundaryCondition left_bc = Asymptotic{};
  BoundaryCondition right_bc = Asymptotic{};
  HamiltonianField weight = HamiltonianField::constant("identity", CMat::Identity(2, 2));
  bool real_data = true;
  std::map<std::string, double> parameters;
  std::vector<std::string> state_labels;

  bool bounded_with_frames() const;
  const LagrangianFrame& left_frame() const;
  const LagrangianFrame& right_frame() const;
};

/// Scalar profile amplitude * sech^2(rate * x).
ScalarFunction sech2_profile(double amplitude, double rate);
ScalarFunction constant_profile(double value);

/// -(p u')' + q u = lambda rho u with state y = (u, p u'):
/// J y' = (C0 + lambda C1) y, C0 = diag(q, -1/p), C1 = -diag(rho, 0); weight H = diag(rho, 0).
CanonicalProblem sturm_liouville_to_canonical(ScalarFunction p, ScalarFunction q, ScalarFunction rho,
                                              Geometry geometry, BoundaryCondition left, BoundaryCondition right,
                                              int check_points = 401);

/// v'' + a v' + b v = lambda v with state y = (v, v'):
/// C0 = [[-b, -a], [0, -1]], C1 = M = diag(1, 0); weight M. Non-Hermitian unless a == 0.
CanonicalProblem traveling_wave_to_canonical(ScalarFunction a, ScalarFunction b, Geometry geometry,
                                             BoundaryCondition left, BoundaryCondition right,
                                             int check_points = 401);

/// Linearization about the bright soliton eta sech(eta x) on [-L, L], d = 2, decay conditions at both ends.
/// State ordering is (p, q, p', q'); see nls_to_block_order for the (p, p', q, q') layout.
///   corrected: lambda q = -p'' + eta^2 p - 6 eta^2 sech^2 p,  lambda p = -q'' + eta^2 q - 2 eta^2 sech^2 q
///   paper:     the same without the eta^2 terms.
CanonicalProblem nls_soliton_problem(double eta, double half_length, NlsVariant variant);

/// The block-diagonal weight diag(6 eta^2 sech^2, 1, 2 eta^2 sech^2, 1) in (p, p', q, q') ordering.
CMat nls_hamiltonian_block_order(double eta, double x);
/// Permutes a 4-vector / 4x4 matrix between (p, q, p', q') and (p, p', q, q').
CVec nls_to_block_order(const CVec& internal);
CVec nls_from_block_order(const CVec& block);
CMat nls_to_block_order(const CMat& internal);

/// J y' = lambda H(x) y.
CanonicalProblem canonical_form_problem(const HamiltonianField& h, Geometry geometry, BoundaryCondition left,
                                        BoundaryCondition right);

/// Arbitrary pencil; hermitian flag and real_data are probed on `check_points` samples.
CanonicalProblem raw_pencil_problem(SymplecticDim dim, MatrixFunction c0, MatrixFunction c1,
                                    const HamiltonianField& weight, Geometry geometry, BoundaryCondition left,
                                    BoundaryCondition right, int check_points = 101);

struct PsdReport {
  double min_eigenvalue = 0.0;
  double argmin_x = 0.0;
  double hermitian_defect = 0.0;
  bool nondegenerate = true;  // no window of >= 3 consecutive grid points with H == 0
  bool passed = true;
};

PsdReport psd_report(const HamiltonianField& field, const std::vector<double>& grid, double psd_tol = 1e-10);

/// max_x ||J y'(x) - (C0(x) + lambda C1(x)) y(x)|| over the grid.
double first_order_residual(const CanonicalProblem& problem, cplx lambda, const std::function<CVec(double)>& y,
                            const std::function<CVec(double)>& dy, const std::vector<double>& grid);

std::vector<double> uniform_grid(double a, double b, int n);

}  // namespace canosys
