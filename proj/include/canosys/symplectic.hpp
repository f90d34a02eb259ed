#pragma once

// Finite-dimensional symplectic linear algebra on C^{2d} with the form
// b(p, q) = q* J p and J = [[0, I_d], [-I_d, 0]].

#include <string_view>
#include <vector>

#include "canosys/errors.hpp"
#include "canosys/linalg.hpp"

namespace canosys {

/// Half-dimension d of the ambient space C^{2d}.
class SymplecticDim {
 public:
  explicit SymplecticDim(int d) : d_(d) {
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "symplectic half-dimension must be >= 1");
  }
  int half() const noexcept { return d_; }
  int full() const noexcept { return 2 * d_; }
  friend bool operator==(SymplecticDim a, SymplecticDim b) noexcept { return a.d_ == b.d_; }

 private:
  int d_;
};

struct SymplecticTolerances {
  double frame_tol = 1e-10;
  double iso_tol = 1e-10;
  double rank_tol = 1e-8;
  double angle_tol = 1e-8;
};

CMat symplectic_matrix(SymplecticDim dim);

/// Applies J (or J^{-1} = -J) without forming the matrix.
CMat apply_j(const CMat& m);
CMat apply_j_inverse(const CMat& m);

cplx symplectic_form(const CVec& p, const CVec& q, SymplecticDim dim);

/// Linearly independent columns spanning a subspace of C^{2d}.
class SubspaceBasis {
 public:
  explicit SubspaceBasis(CMat columns, double rank_tol = 1e-8);

  const CMat& columns() const noexcept { return columns_; }
  Eigen::Index size() const noexcept { return columns_.cols(); }
  Eigen::Index ambient() const noexcept { return columns_.rows(); }
  /// Orthonormal basis for the same span.
  CMat orthonormal() const;

 private:
  CMat columns_;
};

/// Boundary frame Theta = (theta1, theta2), stored in row form (d x 2d).
class LagrangianFrame {
 public:
  const CMat& theta1() const noexcept { return theta1_; }
  const CMat& theta2() const noexcept { return theta2_; }
  SymplecticDim dim() const { return SymplecticDim(static_cast<int>(theta1_.rows())); }
  /// The d x 2d row matrix (theta1, theta2).
  CMat row_form() const;
  /// Theta*, the 2d x d map whose image is the Lagrangian subspace W.
  CMat adjoint_map() const;

  double orthonormality_defect() const;
  double isotropy_defect() const;

  friend LagrangianFrame make_lagrangian(const CMat&, const CMat&, double);

 private:
  LagrangianFrame(CMat t1, CMat t2) : theta1_(std::move(t1)), theta2_(std::move(t2)) {}
  CMat theta1_;
  CMat theta2_;
};

/// Validates theta1 theta1* + theta2 theta2* = I and theta1 theta2* = theta2 theta1*.
/// Throws NotOrthonormal / NotIsotropic with the defect norm.
LagrangianFrame make_lagrangian(const CMat& theta1, const CMat& theta2, double frame_tol = 1e-10);

/// Nearest frame (polar factor) whose Im Theta* equals the span of a d-dimensional isotropic basis.
LagrangianFrame orthonormalize_lagrangian(const SubspaceBasis& span, const SymplecticTolerances& tol = {});

/// J Theta*: a basis of ker Theta.
SubspaceBasis kernel_basis(const LagrangianFrame& frame);

/// max_{i,j} |w_i* J w_j| over normalized columns.
double isotropy_defect(const SubspaceBasis& span);

/// Principal angles (radians, ascending) between two spans of equal dimension.
std::vector<double> principal_angles(const CMat& a, const CMat& b);
double max_principal_angle(const CMat& a, const CMat& b);

/// Named presets: "dirichlet" = (I, 0), "neumann" = (0, I), "alpha:<angle>" = (cos a I, sin a I).
LagrangianFrame frame_preset(std::string_view name, int d);

}  // namespace canosys
