#pragma once

#include <complex>

#include <Eigen/Dense>

namespace canosys {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

/// Exponential of a small dense matrix: [6/6] Padé approximant with scaling and squaring.
CMat expm(const CMat& a);

/// Thin QR with a real, nonnegative R diagonal. Q has orthonormal columns.
struct ThinQR {
  CMat q;
  CMat r;
  double log_abs_det_r = 0.0;  // sum of log r_ii
};
ThinQR thin_qr(const CMat& a);

}  // namespace canosys
