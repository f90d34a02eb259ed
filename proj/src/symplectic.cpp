#include "canosys/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace canosys {

CMat symplectic_matrix(SymplecticDim dim) {
  const int d = dim.half();
  CMat j = CMat::Zero(2 * d, 2 * d);
  j.topRightCorner(d, d).setIdentity();
  j.bottomLeftCorner(d, d) = -CMat::Identity(d, d);
  return j;
}

CMat apply_j(const CMat& m) {
  const Eigen::Index d = m.rows() / 2;
  CMat out(m.rows(), m.cols());
  out.topRows(d) = m.bottomRows(d);
  out.bottomRows(d) = -m.topRows(d);
  return out;
}

CMat apply_j_inverse(const CMat& m) { return -apply_j(m); }

cplx symplectic_form(const CVec& p, const CVec& q, SymplecticDim dim) {
  if (p.size() != dim.full() || q.size() != dim.full())
    throw Error(ErrorCode::DimensionMismatch, "symplectic_form expects vectors of length 2d");
  const Eigen::Index d = dim.half();
  // J p = (p_2, -p_1)
  return q.head(d).dot(p.tail(d)) - q.tail(d).dot(p.head(d));
}

SubspaceBasis::SubspaceBasis(CMat columns, double rank_tol) : columns_(std::move(columns)) {
  if (columns_.cols() == 0 || columns_.cols() > columns_.rows())
    throw Error(ErrorCode::DimensionMismatch, "subspace basis must have 1..ambient columns");
  Eigen::JacobiSVD<CMat> svd(columns_);
  const RVec& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smax > 0.0) || smin <= rank_tol * smax)
    throw Error(ErrorCode::RankDeficient, "basis columns are numerically dependent", smax > 0 ? smin / smax : 0.0);
}

CMat SubspaceBasis::orthonormal() const { return thin_qr(columns_).q; }

CMat LagrangianFrame::row_form() const {
  CMat out(theta1_.rows(), 2 * theta1_.cols());
  out << theta1_, theta2_;
  return out;
}

CMat LagrangianFrame::adjoint_map() const { return row_form().adjoint(); }

double LagrangianFrame::orthonormality_defect() const {
  const Eigen::Index d = theta1_.rows();
  return (theta1_ * theta1_.adjoint() + theta2_ * theta2_.adjoint() - CMat::Identity(d, d)).norm();
}

double LagrangianFrame::isotropy_defect() const {
  return (theta1_ * theta2_.adjoint() - theta2_ * theta1_.adjoint()).norm();
}

LagrangianFrame make_lagrangian(const CMat& theta1, const CMat& theta2, double frame_tol) {
  if (theta1.rows() != theta1.cols() || theta2.rows() != theta2.cols() || theta1.rows() != theta2.rows() ||
      theta1.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "frame blocks must both be d x d");
  LagrangianFrame frame(theta1, theta2);
  const double ortho = frame.orthonormality_defect();
  if (!(ortho <= frame_tol))
    throw Error(ErrorCode::NotOrthonormal,
                "||theta1 theta1* + theta2 theta2* - I|| = " + std::to_string(ortho), ortho);
  const double iso = frame.isotropy_defect();
  if (!(iso <= frame_tol))
    throw Error(ErrorCode::NotIsotropic, "||theta1 theta2* - theta2 theta1*|| = " + std::to_string(iso), iso);
  return frame;
}

double isotropy_defect(const SubspaceBasis& span) {
  const CMat& w = span.columns();
  const Eigen::Index k = w.cols();
  CMat normalized = w;
  for (Eigen::Index i = 0; i < k; ++i) normalized.col(i).normalize();
  const CMat gram = normalized.adjoint() * apply_j(normalized);
  return gram.cwiseAbs().maxCoeff();
}

LagrangianFrame orthonormalize_lagrangian(const SubspaceBasis& span, const SymplecticTolerances& tol) {
  const CMat& w = span.columns();
  if (w.rows() % 2 != 0 || w.cols() != w.rows() / 2)
    throw Error(ErrorCode::DimensionMismatch, "Lagrangian span must be 2d x d");
  const Eigen::Index d = w.cols();
  const double iso = isotropy_defect(span);
  if (iso > tol.iso_tol) throw Error(ErrorCode::NotIsotropic, "span is not isotropic", iso);

  // Polar factor of the candidate Theta = W*: U V* from its SVD.
  const CMat candidate = w.adjoint();
  Eigen::JacobiSVD<CMat> svd(candidate, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& s = svd.singularValues();
  if (s(d - 1) <= tol.rank_tol * s(0))
    throw Error(ErrorCode::RankDeficient, "span has rank < d", s(d - 1) / s(0));
  const CMat theta = svd.matrixU() * svd.matrixV().adjoint();
  return make_lagrangian(theta.leftCols(d), theta.rightCols(d), tol.frame_tol);
}

SubspaceBasis kernel_basis(const LagrangianFrame& frame) {
  return SubspaceBasis(apply_j(frame.adjoint_map()));
}

std::vector<double> principal_angles(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "principal angles need equal-dimensional spans");
  const CMat qa = thin_qr(a).q;
  const CMat qb = thin_qr(b).q;
  // sin(theta) are the singular values of (I - Qa Qa*) Qb; accurate for small angles.
  const CMat residual = qb - qa * (qa.adjoint() * qb);
  Eigen::JacobiSVD<CMat> svd(residual);
  std::vector<double> angles;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    angles.push_back(std::asin(std::min(1.0, svd.singularValues()(i))));
  std::sort(angles.begin(), angles.end());
  return angles;
}

double max_principal_angle(const CMat& a, const CMat& b) {
  const auto angles = principal_angles(a, b);
  return angles.empty() ? 0.0 : angles.back();
}

LagrangianFrame frame_preset(std::string_view name, int d) {
  const CMat id = CMat::Identity(d, d);
  const CMat zero = CMat::Zero(d, d);
  if (name == "dirichlet") return make_lagrangian(id, zero);
  if (name == "neumann") return make_lagrangian(zero, id);
  if (name.starts_with("alpha:")) {
    const std::string text(name.substr(6));
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size())
      throw Error(ErrorCode::ConfigError, "bad angle in frame preset '" + std::string(name) + "'");
    return make_lagrangian(std::cos(alpha) * id, std::sin(alpha) * id);
  }
  throw Error(ErrorCode::ConfigError, "unknown frame preset '" + std::string(name) + "'");
}

}  // namespace canosys
