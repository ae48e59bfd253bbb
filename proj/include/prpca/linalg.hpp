#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

#include "prpca/error.hpp"

namespace prpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct SvdFactors {
  Matrix U;  // rows x k
  Vector S;  // nonincreasing, length k
  Matrix V;  // cols x k
};

enum class NormKind {
  vec1,
  vec2,
  vec_inf,
  vec0,
  nuclear,
  spectral,
  one_to_one,
  inf_to_inf,
  star,
};

// Singular values below this fraction of sigma_max count as zero in pinv and rank decisions.
inline constexpr double kRankCutoff = 1e-12;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const char* what) {
  detail::require(all_finite(m), Errc::InvalidMatrix, std::string(what) + " has non-finite entries");
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    detail::fail(Errc::ShapeError, std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                                       std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                       "x" + std::to_string(b.cols()));
  }
}

inline SvdFactors svd_thin(const Matrix& m) {
  detail::require(m.size() > 0, Errc::InvalidMatrix, "svd of an empty matrix");
  require_finite(m, "svd input");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) detail::fail(Errc::NumericalFailure, "SVD did not converge");
  SvdFactors f{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  if (!f.S.allFinite()) detail::fail(Errc::NumericalFailure, "SVD produced non-finite values");
  return f;
}

inline Vector singular_values(const Matrix& m) {
  detail::require(m.size() > 0, Errc::InvalidMatrix, "svd of an empty matrix");
  require_finite(m, "svd input");
  Eigen::BDCSVD<Matrix> svd(m);
  if (svd.info() != Eigen::Success) detail::fail(Errc::NumericalFailure, "SVD did not converge");
  return svd.singularValues();
}

inline Index numerical_rank(const Vector& s, double rel_cutoff) {
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = rel_cutoff * s(0);
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

// Max Euclidean row norm, the 2->inf operator norm.
inline double two_to_inf(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.rowwise().norm().maxCoeff();
}

inline double norm(const Matrix& m, NormKind kind, double rho = 1.0) {
  if (kind == NormKind::star) {
    detail::require(rho > 0.0 && std::isfinite(rho), Errc::InvalidParameter, "star norm needs rho > 0");
  }
  if (m.size() == 0) return 0.0;
  switch (kind) {
    case NormKind::vec1: return m.cwiseAbs().sum();
    case NormKind::vec2: return m.norm();
    case NormKind::vec_inf: return m.cwiseAbs().maxCoeff();
    case NormKind::vec0: return static_cast<double>((m.array() != 0.0).count());
    case NormKind::nuclear: return singular_values(m).sum();
    case NormKind::spectral: return singular_values(m)(0);
    case NormKind::one_to_one: return m.cwiseAbs().colwise().sum().maxCoeff();
    case NormKind::inf_to_inf: return m.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::star:
      return std::max(rho * norm(m, NormKind::one_to_one), norm(m, NormKind::inf_to_inf) / rho);
  }
  return 0.0;
}

inline Matrix pseudoinverse(const Matrix& m) {
  if (m.size() == 0) return Matrix(m.cols(), m.rows());
  const SvdFactors f = svd_thin(m);
  const Index r = numerical_rank(f.S, kRankCutoff);
  if (r == 0) return Matrix::Zero(m.cols(), m.rows());
  const Vector inv = f.S.head(r).cwiseInverse();
  return f.V.leftCols(r) * inv.asDiagonal() * f.U.leftCols(r).transpose();
}

// M * pinv(M), formed from the leading left singular vectors so it is symmetric to rounding.
inline Matrix column_space_projector(const Matrix& m) {
  detail::require(m.size() > 0, Errc::InvalidMatrix, "column space of an empty matrix");
  require_finite(m, "column_space_projector input");
  detail::require(m.cwiseAbs().maxCoeff() > 0.0, Errc::InvalidMatrix, "column space of a zero matrix");
  const SvdFactors f = svd_thin(m);
  const Index r = numerical_rank(f.S, kRankCutoff);
  const Matrix u = f.U.leftCols(r);
  return u * u.transpose();
}

// Orthonormal basis for the range of m (rank cutoff relative to sigma_max).
inline Matrix range_basis(const Matrix& m, double rel_cutoff) {
  const SvdFactors f = svd_thin(m);
  return f.U.leftCols(numerical_rank(f.S, rel_cutoff));
}

inline double frob_inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

}  // namespace prpca
