#pragma once

#include <utility>

#include "prpca/linalg.hpp"

namespace prpca {

// Singular-value cutoff (relative to sigma_max of X0) that decides the rank r.
inline constexpr double kLowrankCutoff = 1e-10;
// A projector matrix is considered rank deficient when sigma_min falls below this.
inline constexpr double kFullRankTol = 1e-10;

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

class SupportProjector {
 public:
  explicit SupportProjector(Mask mask) : mask_(std::move(mask)) {}

  Matrix apply(const Matrix& m) const {
    require_same_shape(m, Matrix(mask_.rows(), mask_.cols()), "support projector");
    return mask_.select(m, 0.0);
  }
  Matrix complement(const Matrix& m) const { return m - apply(m); }

  const Mask& mask() const { return mask_; }
  Index support_size() const { return mask_.count(); }
  Index rows() const { return mask_.rows(); }
  Index cols() const { return mask_.cols(); }

 private:
  Mask mask_;
};

inline SupportProjector support_projector(const Matrix& y0) {
  require_finite(y0, "Y0");
  return SupportProjector(y0.array() != 0.0);
}

// M -> L L^T M + M R R^T - L L^T M R R^T for orthonormal L (N x r) and R (M x r).
class TangentProjector {
 public:
  TangentProjector(Matrix left, Matrix right) : left_(std::move(left)), right_(std::move(right)) {}

  Matrix apply(const Matrix& m) const {
    if (m.rows() != left_.rows() || m.cols() != right_.rows()) {
      detail::fail(Errc::ShapeError, "tangent projector applied to a matrix of the wrong shape");
    }
    const Matrix lt_m = left_.transpose() * m;  // r x M
    const Matrix m_r = m * right_;              // N x r
    return left_ * lt_m + m_r * right_.transpose() - left_ * (lt_m * right_) * right_.transpose();
  }
  Matrix complement(const Matrix& m) const { return m - apply(m); }

  Index rank() const { return left_.cols(); }

 protected:
  Matrix left_;
  Matrix right_;
};

// T: the tangent space at P X0 Q^T, spanned through the left singular vectors of P U0 and Q V0.
class SmoothLowrankProjector : public TangentProjector {
 public:
  SmoothLowrankProjector(Matrix ut, Matrix vt) : TangentProjector(std::move(ut), std::move(vt)) {}
  const Matrix& Ut() const { return left_; }
  const Matrix& Vt() const { return right_; }
};

// T0: the tangent space at X0 itself.
class LowrankProjector : public TangentProjector {
 public:
  LowrankProjector(Matrix u0, Matrix v0) : TangentProjector(std::move(u0), std::move(v0)) {}
  const Matrix& U0() const { return left_; }
  const Matrix& V0() const { return right_; }
};

struct LowrankFactors {
  Matrix U0;  // n x r
  Matrix V0;  // m x r
  Vector S;   // r leading singular values
};

inline LowrankFactors lowrank_factors(const Matrix& x0) {
  require_finite(x0, "X0");
  detail::require(x0.size() > 0 && x0.cwiseAbs().maxCoeff() > 0.0, Errc::InvalidMatrix, "X0 is zero");
  const SvdFactors f = svd_thin(x0);
  const Index r = numerical_rank(f.S, kLowrankCutoff);
  return {f.U.leftCols(r), f.V.leftCols(r), f.S.head(r)};
}

inline LowrankProjector lowrank_projector(const Matrix& x0) {
  LowrankFactors f = lowrank_factors(x0);
  return LowrankProjector(std::move(f.U0), std::move(f.V0));
}

inline void require_full_column_rank(const Matrix& a, const char* name) {
  detail::require(a.size() > 0 && a.rows() >= a.cols(), Errc::InvalidProjectorPair,
                  std::string(name) + " must be tall (rows >= cols)");
  require_finite(a, name);
  const Vector s = singular_values(a);
  detail::require(s(s.size() - 1) > kFullRankTol, Errc::InvalidProjectorPair,
                  std::string(name) + " is not of full column rank");
}

inline SmoothLowrankProjector smooth_lowrank_projector(const Matrix& x0, const Matrix& p, const Matrix& q) {
  if (p.cols() != x0.rows() || q.cols() != x0.cols()) {
    detail::fail(Errc::ShapeError, "X0 must be P.cols() x Q.cols()");
  }
  require_full_column_rank(p, "P");
  require_full_column_rank(q, "Q");
  const LowrankFactors f = lowrank_factors(x0);
  const Index r = f.U0.cols();
  // P U0 has full column rank r, so its thin U is exactly the basis we need.
  Matrix ut = svd_thin(p * f.U0).U.leftCols(r);
  Matrix vt = svd_thin(q * f.V0).U.leftCols(r);
  return SmoothLowrankProjector(std::move(ut), std::move(vt));
}

}  // namespace prpca
