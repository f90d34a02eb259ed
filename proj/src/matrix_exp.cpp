#include "canosys/linalg.hpp"

#include <cmath>

namespace canosys {

CMat expm(const CMat& a) {
  const Eigen::Index n = a.rows();
  // Padé [6/6] is accurate to roundoff for ||A||_1 <= 0.5.
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const CMat x = a / std::ldexp(1.0, squarings);

  static constexpr double c[7] = {1.0,
                                  0.5,
                                  5.0 / 44.0,
                                  1.0 / 66.0,
                                  1.0 / 792.0,
                                  1.0 / 15840.0,
                                  1.0 / 665280.0};
  const CMat id = CMat::Identity(n, n);
  const CMat x2 = x * x;
  const CMat x4 = x2 * x2;
  const CMat x6 = x4 * x2;
  const CMat even = c[0] * id + c[2] * x2 + c[4] * x4 + c[6] * x6;
  const CMat odd = x * (c[1] * id + c[3] * x2 + c[5] * x4);
  CMat result = (even - odd).partialPivLu().solve(even + odd);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

ThinQR thin_qr(const CMat& a) {
  const Eigen::Index k = a.cols();
  Eigen::HouseholderQR<CMat> qr(a);
  ThinQR out;
  out.q = qr.householderQ() * CMat::Identity(a.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    const cplx d = out.r(i, i);
    const double mag = std::abs(d);
    if (mag > 0.0) {
      const cplx phase = d / mag;
      out.q.col(i) *= phase;
      out.r.row(i) /= phase;
      out.log_abs_det_r += std::log(mag);
    } else {
      out.log_abs_det_r = -std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

}  // namespace canosys
