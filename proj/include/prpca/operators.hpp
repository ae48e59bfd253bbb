#pragma once

#include "prpca/linalg.hpp"

namespace prpca {

struct SvtResult {
  Matrix X;
  double nuclear = 0.0;  // sum of thresholded singular values, i.e. ||X||_*
  Index rank = 0;
};

inline void require_threshold(double tau) {
  detail::require(tau >= 0.0 && std::isfinite(tau), Errc::InvalidParameter, "threshold must be finite and >= 0");
}

inline SvtResult svt_full(const Matrix& m, double tau) {
  require_threshold(tau);
  const SvdFactors f = svd_thin(m);
  Index k = 0;
  while (k < f.S.size() && f.S(k) > tau) ++k;
  SvtResult r;
  r.rank = k;
  if (k == 0) {
    r.X = Matrix::Zero(m.rows(), m.cols());
    return r;
  }
  const Vector d = f.S.head(k).array() - tau;
  r.nuclear = d.sum();
  r.X = f.U.leftCols(k) * d.asDiagonal() * f.V.leftCols(k).transpose();
  return r;
}

inline Matrix svt(const Matrix& m, double tau) { return svt_full(m, tau).X; }

inline Matrix soft_threshold(const Matrix& m, double tau) {
  require_threshold(tau);
  require_finite(m, "soft_threshold input");
  return m.unaryExpr([tau](double v) {
    const double a = std::abs(v) - tau;
    if (a <= 0.0) return 0.0;
    return v > 0.0 ? a : -a;
  });
}

}  // namespace prpca
