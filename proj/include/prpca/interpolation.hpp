#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "prpca/linalg.hpp"
#include "prpca/projectors.hpp"

namespace prpca {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class PairKind { Identity, Single, Double, RowOnly, ColOnly, Block, Custom };

inline const char* to_string(PairKind k) {
  switch (k) {
    case PairKind::Identity: return "identity";
    case PairKind::Single: return "single";
    case PairKind::Double: return "double";
    case PairKind::RowOnly: return "row_only";
    case PairKind::ColOnly: return "col_only";
    case PairKind::Block: return "block";
    case PairKind::Custom: return "custom";
  }
  return "?";
}

inline PairKind parse_pair_kind(std::string_view s) {
  for (PairKind k : {PairKind::Identity, PairKind::Single, PairKind::Double, PairKind::RowOnly,
                     PairKind::ColOnly, PairKind::Block, PairKind::Custom}) {
    if (s == to_string(k)) return k;
  }
  detail::fail(Errc::InvalidParameter, "unknown pair kind '" + std::string(s) + "'");
}

inline void require_interpolable(Index n, const char* what) {
  if (n < 4 || n % 2 != 0) {
    detail::fail(Errc::UnsupportedDimension,
                 std::string(what) + " must be even and >= 4, got " + std::to_string(n));
  }
}

// J_N as a sparse matrix: row 2j+1 copies column j, even rows average their neighbours (0-based).
inline SparseMatrix interpolation_matrix_sparse(Index n_rows) {
  require_interpolable(n_rows, "interpolation size");
  const Index n = n_rows / 2;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(2 * n_rows));
  t.emplace_back(0, 0, 1.0);
  for (Index j = 0; j < n; ++j) {
    t.emplace_back(2 * j + 1, j, 1.0);
    if (j > 0) t.emplace_back(2 * j, j, 0.5);
    if (j + 1 < n) t.emplace_back(2 * j + 2, j, 0.5);
  }
  SparseMatrix j(n_rows, n);
  j.setFromTriplets(t.begin(), t.end());
  return j;
}

inline Matrix interpolation_matrix(Index n_rows) { return Matrix(interpolation_matrix_sparse(n_rows)); }

struct Spectrum {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

namespace detail {

inline bool is_identity(const SparseMatrix& a) {
  if (a.rows() != a.cols() || a.nonZeros() != a.rows()) return false;
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.row() != it.col() || it.value() != 1.0) return false;
    }
  }
  return true;
}

// Extreme singular values from the eigenvalues of the Gram matrix; tridiagonal Grams take the O(n^2) path.
inline Spectrum gram_spectrum(const SparseMatrix& a) {
  const Matrix g = Matrix(SparseMatrix(a.transpose() * a));
  const Index n = g.rows();
  bool tridiagonal = true;
  for (Index j = 0; j < n && tridiagonal; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (std::abs(i - j) > 1 && g(i, j) != 0.0) {
        tridiagonal = false;
        break;
      }
    }
  }
  Vector ev;
  if (tridiagonal) {
    Vector diag = g.diagonal();
    Vector sub = n > 1 ? Vector(g.diagonal(-1)) : Vector(0);
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    detail::require(es.info() == Eigen::Success, Errc::NumericalFailure, "eigenvalue iteration failed");
    ev = es.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    detail::require(es.info() == Eigen::Success, Errc::NumericalFailure, "eigenvalue iteration failed");
    ev = es.eigenvalues();
  }
  return {std::sqrt(std::max(ev.minCoeff(), 0.0)), std::sqrt(std::max(ev.maxCoeff(), 0.0))};
}

struct FactorData {
  Matrix dense;
  SparseMatrix sparse;
  Matrix pinv;
  Matrix proj;
  Spectrum spectrum;
};

// Structured factors are well conditioned, so the normal equations are safe for the pseudoinverse.
inline std::shared_ptr<const FactorData> structured_factor(SparseMatrix a) {
  auto d = std::make_shared<FactorData>();
  a.makeCompressed();
  d->dense = Matrix(a);
  if (is_identity(a)) {
    d->pinv = Matrix::Identity(a.rows(), a.rows());
    d->proj = d->pinv;
    d->spectrum = {1.0, 1.0};
  } else {
    d->spectrum = gram_spectrum(a);
    require(d->spectrum.sigma_min > kFullRankTol, Errc::InvalidProjectorPair, "factor is rank deficient");
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(SparseMatrix(a.transpose() * a));
    require(ldlt.info() == Eigen::Success, Errc::NumericalFailure, "Gram factorization failed");
    d->pinv = ldlt.solve(Matrix(a.transpose()));
    d->proj = a * d->pinv;
  }
  d->sparse = std::move(a);
  return d;
}

inline std::shared_ptr<const FactorData> dense_factor(const Matrix& a, const char* name) {
  detail::require(a.size() > 0 && a.rows() >= a.cols(), Errc::InvalidProjectorPair,
                  std::string(name) + " must be tall (rows >= cols)");
  detail::require(a.allFinite(), Errc::InvalidMatrix, std::string(name) + " has non-finite entries");
  auto d = std::make_shared<FactorData>();
  const SvdFactors f = svd_thin(a);
  d->spectrum = {f.S(f.S.size() - 1), f.S(0)};
  detail::require(d->spectrum.sigma_min > kFullRankTol, Errc::InvalidProjectorPair,
                  std::string(name) + " is not of full column rank");
  d->dense = a;
  d->sparse = a.sparseView();
  d->pinv = f.V * f.S.cwiseInverse().asDiagonal() * f.U.transpose();
  d->proj = f.U * f.U.transpose();
  return d;
}

inline SparseMatrix sparse_identity(Index n) {
  SparseMatrix i(n, n);
  i.setIdentity();
  return i;
}

}  // namespace detail

// (P, Q) with cached pseudoinverses, column-space projectors and extreme singular values.
// Copies share the cached data.
class ProjectorPair {
 public:
  ProjectorPair(PairKind kind, std::shared_ptr<const detail::FactorData> p,
                std::shared_ptr<const detail::FactorData> q)
      : kind_(kind), p_(std::move(p)), q_(std::move(q)) {}

  PairKind kind() const { return kind_; }

  const Matrix& P() const { return p_->dense; }
  const Matrix& Q() const { return q_->dense; }
  const SparseMatrix& P_sparse() const { return p_->sparse; }
  const SparseMatrix& Q_sparse() const { return q_->sparse; }
  const Matrix& P_pinv() const { return p_->pinv; }
  const Matrix& Q_pinv() const { return q_->pinv; }
  const Matrix& P_proj() const { return p_->proj; }
  const Matrix& Q_proj() const { return q_->proj; }
  Spectrum P_spectrum() const { return p_->spectrum; }
  Spectrum Q_spectrum() const { return q_->spectrum; }

  Index N() const { return p_->dense.rows(); }
  Index n() const { return p_->dense.cols(); }
  Index M() const { return q_->dense.rows(); }
  Index m() const { return q_->dense.cols(); }

  // P X Q^T using the sparse factors.
  Matrix lift(const Matrix& x) const {
    const Matrix px = p_->sparse * x;
    return (q_->sparse * px.transpose()).transpose();
  }
  // P^T G Q using the sparse factors.
  Matrix pullback(const Matrix& g) const {
    const Matrix ptg = p_->sparse.transpose() * g;
    return (q_->sparse.transpose() * ptg.transpose()).transpose();
  }

 private:
  PairKind kind_;
  std::shared_ptr<const detail::FactorData> p_;
  std::shared_ptr<const detail::FactorData> q_;
};

namespace detail {

inline SparseMatrix kind_factor(PairKind kind, Index n, bool interpolate, const char* what) {
  switch (kind) {
    case PairKind::Identity:
      require(n >= 1, Errc::UnsupportedDimension, std::string(what) + " must be >= 1");
      return sparse_identity(n);
    case PairKind::Single:
      return interpolation_matrix_sparse(n);
    case PairKind::Double: {
      if (n % 4 != 0 || n / 2 < 4) {
        fail(Errc::UnsupportedDimension,
             std::string(what) + " must be divisible by 4 with half >= 4 for double interpolation");
      }
      SparseMatrix j = interpolation_matrix_sparse(n) * interpolation_matrix_sparse(n / 2);
      j.prune(0.0);
      return j;
    }
    case PairKind::RowOnly:
    case PairKind::ColOnly:
      if (interpolate) return interpolation_matrix_sparse(n);
      require(n >= 1, Errc::UnsupportedDimension, std::string(what) + " must be >= 1");
      return sparse_identity(n);
    case PairKind::Block: {
      if (n < 2 || n % 2 != 0) fail(Errc::UnsupportedDimension, std::string(what) + " must be even for block");
      std::vector<Eigen::Triplet<double>> t;
      for (Index i = 0; i < n; ++i) t.emplace_back(i, i / 2, 1.0);
      SparseMatrix b(n, n / 2);
      b.setFromTriplets(t.begin(), t.end());
      return b;
    }
    case PairKind::Custom:
      fail(Errc::InvalidParameter, "custom pairs are built with custom_pair(P, Q)");
  }
  fail(Errc::InvalidParameter, "unknown pair kind");
}

}  // namespace detail

inline ProjectorPair projector_pair(PairKind kind, Index N, Index M) {
  const bool p_interp = kind != PairKind::ColOnly;
  const bool q_interp = kind != PairKind::RowOnly;
  auto p = detail::structured_factor(detail::kind_factor(kind, N, p_interp, "N"));
  if (N == M && p_interp == q_interp) return ProjectorPair(kind, p, p);
  auto q = detail::structured_factor(detail::kind_factor(kind, M, q_interp, "M"));
  return ProjectorPair(kind, std::move(p), std::move(q));
}

inline ProjectorPair custom_pair(const Matrix& p, const Matrix& q) {
  return ProjectorPair(PairKind::Custom, detail::dense_factor(p, "P"), detail::dense_factor(q, "Q"));
}

// Spectrum of J_N alone (the single-interpolation factor).
inline Spectrum interpolation_spectrum(Index n_rows) {
  return detail::gram_spectrum(interpolation_matrix_sparse(n_rows));
}

inline Index count_jumps(const Matrix& theta) {
  require_finite(theta, "Theta");
  Index s = 0;
  for (Index j = 0; j < theta.cols(); ++j) {
    for (Index i = 0; i < theta.rows(); ++i) {
      if (i + 1 < theta.rows() && theta(i, j) != theta(i + 1, j)) ++s;
      if (j + 1 < theta.cols() && theta(i, j) != theta(i, j + 1)) ++s;
    }
  }
  return s;
}

struct PiecewiseDecomposition {
  Matrix X0;  // n x m
  Matrix Y0;  // N x M
  Index jumps = 0;
};

namespace detail {

// Smooth column c (length N) in place from its anchor entries: index 1 copies index 0,
// odd interior indices >= 3 (1-based) average their neighbours.
template <typename Get, typename Set>
void fill_from_anchors(Index len, Get get, Set set) {
  set(1, get(0));
  for (Index i = 2; i + 1 < len; i += 2) set(i, 0.5 * (get(i - 1) + get(i + 1)));
}

}  // namespace detail

// Anchors are 1-based indices {1, 4, 6, 8, ...}. Theta* takes Theta there and is extended with
// the J_N smoothing rules; Y0 = Theta - Theta*, X0 = Theta* at even 1-based rows and columns.
inline PiecewiseDecomposition decompose_piecewise(const Matrix& theta) {
  require_finite(theta, "Theta");
  require_interpolable(theta.rows(), "row count");
  require_interpolable(theta.cols(), "column count");
  const Index N = theta.rows();
  const Index M = theta.cols();

  Matrix star = theta;
  // Rows first on anchor rows (0-based 0, 3, 5, ...), then columns everywhere.
  auto anchor_row = [](Index i) { return i == 0 || (i >= 3 && i % 2 == 1); };
  for (Index i = 0; i < N; ++i) {
    if (!anchor_row(i)) continue;
    detail::fill_from_anchors(
        M, [&](Index j) { return star(i, j); }, [&](Index j, double v) { star(i, j) = v; });
  }
  for (Index j = 0; j < M; ++j) {
    detail::fill_from_anchors(
        N, [&](Index i) { return star(i, j); }, [&](Index i, double v) { star(i, j) = v; });
  }

  PiecewiseDecomposition d;
  d.Y0 = theta - star;
  d.X0.resize(N / 2, M / 2);
  for (Index b = 0; b < M / 2; ++b) {
    for (Index a = 0; a < N / 2; ++a) d.X0(a, b) = star(2 * a + 1, 2 * b + 1);
  }
  d.jumps = count_jumps(theta);
  return d;
}

enum class Axis { Rows, Cols };

// Zero exactly when W = J_N U (rows) or W = U J_M^T (cols) for some U.
inline double smoothness_residual(const Matrix& w, Axis axis) {
  require_finite(w, "W");
  const Matrix a = axis == Axis::Rows ? w : Matrix(w.transpose());
  require_interpolable(a.rows(), "smoothed dimension");
  double r = (a.row(0) - a.row(1)).cwiseAbs().maxCoeff();
  for (Index i = 2; i + 1 < a.rows(); i += 2) {
    r = std::max(r, (a.row(i) - 0.5 * (a.row(i - 1) + a.row(i + 1))).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace prpca
