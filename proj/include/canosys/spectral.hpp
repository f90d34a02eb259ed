#pragma once

// Bounded-interval spectra through the boundary characteristic function
//   D(lambda) = det(B T(N; lambda) J Theta*),
// plus the quadratic-form witnesses of self-adjointness: H-inner products, the Green residual,
// the symmetry/Gram matrices and the variational quotient.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "canosys/propagate.hpp"

namespace canosys {

struct SpectralOptions {
  StepControl step;
  int renorm_every = 20;
  double refine_tol = 1e-12;  // relative bracket width for refinement
  double dip_factor = 1e-6;   // dip_tol = dip_factor * median |D| over the scan
  double multiplicity_tol = 1e-6;
  double eigen_accept_tol = 1e-6;
  double bc_tol = 1e-6;
  double ode_tol = 1e-6;
};

struct CharacteristicValue {
  cplx lambda{};
  cplx mantissa{};         // det(B Q) with Q the orthonormalized propagated kernel frame
  double log_scale = 0.0;  // log det R removed during propagation
  RVec singular_values;    // of B Q, descending

  cplx value() const { return mantissa * std::exp(log_scale); }
  double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
};

CharacteristicValue characteristic_function(const CanonicalProblem& problem, cplx lambda,
                                            const SpectralOptions& options = {});

/// Columns are grid points; rows are the 2d state components.
struct SampledPath {
  std::vector<double> x;
  CMat values;

  Eigen::Index points() const { return values.cols(); }
};

struct EigenPair {
  cplx lambda{};
  int multiplicity = 1;
  std::vector<SampledPath> eigenfunctions;  // H-orthonormal, one per independent mode
  double boundary_residual = 0.0;
  double ode_residual = 0.0;

  const SampledPath& eigenfunction() const { return eigenfunctions.front(); }
};

struct ScanSample {
  double lambda = 0.0;
  cplx mantissa{};
  double log_scale = 0.0;

  cplx value() const { return mantissa * std::exp(log_scale); }
};

struct Witnesses {
  Eigen::MatrixXcd gram;       // h_inner(y_m, y_n)
  Eigen::MatrixXd symmetry;    // |<lambda_m W y_m, y_n> - <y_m, lambda_n W y_n>|
  double max_offdiag_gram = 0.0;
  double max_symmetry_defect = 0.0;
};

struct SpectrumReport {
  std::string problem_summary;
  double window_min = 0.0;
  double window_max = 0.0;
  std::vector<EigenPair> eigenpairs;
  std::vector<ScanSample> scan;
  std::optional<Witnesses> witnesses;
  std::vector<std::string> warnings;
};

/// Scans D on a uniform real grid, brackets sign changes of its real reduction and dips of |D|,
/// refines each, and extracts eigenfunctions.
SpectrumReport eigenvalues_in(const CanonicalProblem& problem, double lambda_min, double lambda_max, int n_scan,
                              const SpectralOptions& options = {});

/// Eigenfunction(s) at an (approximate) eigenvalue. The left and right boundary subspaces are
/// propagated to the midpoint and intersected; the multiplicity is the number of singular values of
/// [Q_left | Q_right] below multiplicity_tol. Throws NotAnEigenvalue when the smallest exceeds
/// eigen_accept_tol.
EigenPair eigenfunction(const CanonicalProblem& problem, cplx lambda_star, const SpectralOptions& options = {});

/// Trapezoid quadrature of f*(x) W(x) g(x) with W the problem weight.
cplx h_inner(const SampledPath& f, const SampledPath& g, const CanonicalProblem& problem);

/// (u, v) with J u' = W v on the common grid.
struct RelationPair {
  SampledPath u;
  SampledPath v;
};

/// |<u,g> - <v,f> - (u*(N) J f(N) - u*(0) J f(0))|.
double greens_identity_residual(const RelationPair& first, const RelationPair& second,
                                const CanonicalProblem& problem);
/// Magnitude the residual should be compared against.
double greens_identity_scale(const RelationPair& first, const RelationPair& second, const CanonicalProblem& problem);

/// Seeded smooth relation pair on [a, b] with n points: v is a random trigonometric vector
/// polynomial, u = u(a) - J int W v (Gauss-Legendre per cell).
RelationPair random_relation_pair(const CanonicalProblem& problem, double a, double b, int n, std::uint64_t seed);

Witnesses symmetry_defect(const SpectrumReport& report, const CanonicalProblem& problem);

/// Re <y, J y' - C0 y> / Re <y, C1 y> with plain L2 pairings; y' by second-order differences.
/// Equals lambda at eigenfunctions and reduces to <y, J y'> / <y, H y> when C0 = 0, C1 = H.
double rayleigh_quotient(const SampledPath& y, const CanonicalProblem& problem);

}  // namespace canosys
