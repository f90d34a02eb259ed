#pragma once

// Line and half-line spectra. The constant-coefficient limits of the pencil give the essential
// spectrum (real lambda admitting oscillatory spatial modes); off it, solutions decaying at -inf and
// +inf are matched at the midpoint of the truncated domain and the determinant of the two frames is
// the Evans function. Zeros are counted by the argument principle on rectangles.

#include <optional>
#include <string>
#include <vector>

#include "canosys/propagate.hpp"

namespace canosys {

enum class Side { Minus, Plus };

struct EvansOptions {
  StepControl step{1e-2, Scheme::Magnus4};
  int renorm_every = 10;
  double gap_tol = 1e-6;
  double band_tol = 1e-8;
  double decay_tol = 1e-6;
  // Essential-spectrum classification grid: [-band_span, band_span] with band_points samples.
  double band_span = 100.0;
  int band_points = 2001;
  // Where the reference bases of the decaying subspaces are taken (the gauge). Defaults to i.
  std::optional<cplx> gauge_point;
  // Values are divided by E(lambda_ref) when set.
  std::optional<cplx> lambda_ref;
  // Optional d x d recombinations of the asymptotic bases (gauge experiments); empty = identity.
  CMat recombination_minus;
  CMat recombination_plus;
  int n_samples = 400;  // per rectangle side
  int max_doublings = 4;
};

/// Constant limits of the pencil at the two ends.
struct AsymptoticSystem {
  SymplecticDim dim{1};
  bool two_sided = true;  // false on a half-line: only the +inf limit is meaningful
  CMat c0_minus, c1_minus;
  CMat c0_plus, c1_plus;

  /// J^{-1}(C0(+-inf) + lambda C1(+-inf)).
  CMat generator(cplx lambda, Side side) const;
  /// Eigenvalues mu of the generator (modes e^{mu x}).
  CVec spatial_eigenvalues(cplx lambda, Side side) const;
};

/// Limits from the closed forms recorded by the problem builder, otherwise C0 at the truncation point
/// checked against C0 at 90% of the distance from the midpoint. Throws NoAsymptoticLimit when the
/// check exceeds decay_tol. On a half-line only the right end is checked.
AsymptoticSystem asymptotic_matrices(const CanonicalProblem& problem, double decay_tol = 1e-6);

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_infinite = false;
  bool hi_infinite = false;

  bool contains(double lambda) const;
  std::string to_string() const;
};

struct EssentialSpectrumBands {
  std::vector<Band> bands;  // disjoint, sorted

  bool contains(double lambda) const;
  /// Distance from a real point to the nearest band (0 inside).
  double distance(double lambda) const;
  std::string to_string() const;
};

EssentialSpectrumBands essential_spectrum(const CanonicalProblem& problem, const EvansOptions& options = {});
EssentialSpectrumBands essential_spectrum(const AsymptoticSystem& asys, const EvansOptions& options = {});

/// Orthonormal basis of the generalized eigenspace of the generator decaying toward the given end
/// (Re mu < 0 for Plus, Re mu > 0 for Minus), via the matrix sign function.
/// Throws OnEssentialSpectrum when some |Re mu| <= gap_tol, UnbalancedDimensions when its size != d.
SubspaceBasis decaying_subspace(const AsymptoticSystem& asys, cplx lambda, Side side, double gap_tol = 1e-6);

/// Spectral projector onto the decaying subspace; analytic in lambda.
CMat decaying_projector(const AsymptoticSystem& asys, cplx lambda, Side side, double gap_tol = 1e-6);

struct EvansValue {
  cplx lambda{};
  cplx value{};            // mantissa; E = value * exp(log_scale)
  double log_scale = 0.0;
  double conditioning = 0.0;  // smallest principal angle between the matched frames

  cplx full() const { return value * std::exp(log_scale); }
  double log_abs() const { return std::log(std::abs(value)) + log_scale; }
};

/// Evaluator with a fixed gauge: initial frames P_-(lambda) V_- at -L and P_+(lambda) V_+ at +L where
/// V_+- span the decaying subspaces at the gauge point, so E is analytic in lambda. On a half-line
/// the left frame is J Theta* from the boundary condition.
class EvansFunction {
 public:
  explicit EvansFunction(const CanonicalProblem& problem, EvansOptions options = {});
  // Holds a reference to the problem, which must outlive the evaluator.
  EvansFunction(CanonicalProblem&&, EvansOptions = {}) = delete;

  EvansValue operator()(cplx lambda) const;
  /// Singular values of [Q_- | Q_+] at the matching point; the number of (near) zeros is the
  /// dimension of the space of solutions decaying at both ends.
  RVec matched_singular_values(cplx lambda) const;
  const AsymptoticSystem& asymptotics() const noexcept { return asys_; }
  const EvansOptions& options() const noexcept { return options_; }

 private:
  EvansValue raw(cplx lambda) const;
  CMat matched_frames(cplx lambda, double* log_scale) const;

  const CanonicalProblem* problem_;
  EvansOptions options_;
  AsymptoticSystem asys_;
  CMat gauge_minus_;
  CMat gauge_plus_;
  std::optional<EvansValue> reference_;
};

EvansValue evans_function(const CanonicalProblem& problem, cplx lambda, const EvansOptions& options = {});

struct Rectangle {
  double re0 = 0.0, re1 = 0.0, im0 = 0.0, im1 = 0.0;

  cplx center() const { return {0.5 * (re0 + re1), 0.5 * (im0 + im1)}; }
  std::string to_string() const;
};

struct WindingReport {
  Rectangle contour;
  int count = 0;
  double winding = 0.0;        // unrounded
  int samples_per_side = 0;
  double max_phase_jump = 0.0;
  double min_conditioning = 0.0;
  std::vector<cplx> power_sums;  // sum_k (z_k - center)^j, j = 1..count
  std::vector<cplx> zeros;       // estimated zero locations
};

/// Winding number of E along the counter-clockwise rectangle boundary. The sample count is doubled
/// (up to max_doublings) while adjacent samples differ in phase by pi/2 or more.
WindingReport count_zeros_winding(const CanonicalProblem& problem, const Rectangle& contour,
                                  const EvansOptions& options = {});

struct ZeroModeReport {
  double residual_y1 = 0.0;  // max |J y' - C0 y| at lambda = 0
  double residual_y2 = 0.0;
  double hnorm_y1 = 0.0;     // int y* H y dx
  double hnorm_y2 = 0.0;
  double max_v1 = 0.0;       // max |v1| on the grid
};

/// Translation and phase zero modes of the NLS soliton evaluated in closed form on the grid.
ZeroModeReport zero_mode_residuals(const CanonicalProblem& problem, const std::vector<double>& grid);

/// Closed-form zero modes in (p, q, p', q') ordering and their derivatives.
CVec nls_translation_mode(double eta, double x);
CVec nls_translation_mode_derivative(double eta, double x);
CVec nls_phase_mode(double eta, double x);
CVec nls_phase_mode_derivative(double eta, double x);

}  // namespace canosys
