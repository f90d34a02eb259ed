#pragma once

// Fundamental solutions of y' = J^{-1}(C0(x) + lambda C1(x)) y.
//
// The default scheme is the midpoint exponential: one exp(h G(x + h/2)) per step. For Hermitian
// pencils and real lambda every step is exactly conjugate-symplectic (E* J E = J), so the
// J-pairing of two solutions is conserved up to roundoff. Magnus4 adds the commutator term at the
// two Gauss points and is fourth order.

#include <functional>
#include <vector>

#include "canosys/hamiltonian.hpp"

namespace canosys {

enum class Scheme { Midpoint, Magnus4 };

struct StepControl {
  double h = 1e-3;
  Scheme scheme = Scheme::Midpoint;
};

/// One-step propagators for a fixed problem and spectral parameter.
class StepPropagator {
 public:
  StepPropagator(const CanonicalProblem& problem, cplx lambda, Scheme scheme);
  /// Propagator from x0 to x1 (either direction).
  CMat step(double x0, double x1) const;
  /// J^{-1}(C0(x) + lambda C1(x)).
  CMat generator(double x) const;

 private:
  const CanonicalProblem* problem_;
  cplx lambda_;
  Scheme scheme_;
};

/// Uniform subdivision of [x_from, x_to] with spacing at most h.
std::vector<double> step_grid(double x_from, double x_to, double h);

struct TransferMatrix {
  CMat value;
  double at_x = 0.0;
  cplx lambda{};
  double structure_defect = 0.0;
};

/// ||T* J T - J||_F.
double structure_defect(const CMat& t);

/// Fundamental solution from the left end of the geometry to x_target (T = I at the left end).
/// Throws StepTooLarge when a single step of a Hermitian pencil at real lambda loses more than
/// 1e-6 of symplecticity, NonFiniteState on overflow.
TransferMatrix transfer_matrix(const CanonicalProblem& problem, cplx lambda, double x_target,
                               const StepControl& step = {});
TransferMatrix transfer_matrix(const CanonicalProblem& problem, cplx lambda, double x_from, double x_to,
                               const StepControl& step = {});

/// The same propagation, recording T every `record_every` steps (and at the end).
std::vector<TransferMatrix> transfer_path(const CanonicalProblem& problem, cplx lambda, double x_from,
                                          double x_to, const StepControl& step = {}, int record_every = 1);

struct PropagatedFrame {
  CMat columns;
  double accumulated_scale = 0.0;  // log |det R| removed by renormalization
  double at_x = 0.0;
  cplx lambda{};
  double max_gram_defect = 0.0;
};

/// Called after every step with the abscissa, the current columns and the R factor that was
/// divided out at this step (empty when no renormalization happened).
using FrameObserver = std::function<void(double x, const CMat& columns, const CMat& r_removed)>;

/// Propagates span(initial) with renormalization by thin QR every `renorm_every` steps
/// (<= 0 disables renormalization entirely). The true solution matrix is
/// columns * R_accumulated with log det R_accumulated = accumulated_scale.
PropagatedFrame propagate_frame(const CanonicalProblem& problem, cplx lambda, const CMat& initial, double x_from,
                                double x_to, const StepControl& step = {}, int renorm_every = 20,
                                const FrameObserver& observer = {});

}  // namespace canosys
