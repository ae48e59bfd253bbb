#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

#include "prpca/interpolation.hpp"
#include "prpca/linalg.hpp"
#include "prpca/operators.hpp"

namespace prpca {

enum class StepMode { FixedLipschitz, Backtracking };

// Where the accelerated solver evaluates the gradient. Extrapolated is standard FISTA; Current keeps the
// gradient at (X_k, Y_k) while the prox step still starts from the extrapolated point.
enum class GradientPoint { Extrapolated, Current };

struct SolveConfig {
  SolveConfig(Matrix z, ProjectorPair p, double l1, double l2)
      : Z(std::move(z)), pair(std::move(p)), lambda1(l1), lambda2(l2) {}

  Matrix Z;
  ProjectorPair pair;
  double lambda1;
  double lambda2;
  int max_iters = 1000;
  double rel_tol = 1e-7;
  StepMode step_mode = StepMode::FixedLipschitz;
  bool accelerate = true;
  GradientPoint gradient_point = GradientPoint::Extrapolated;
};

struct SolveResult {
  Matrix Xhat;
  Matrix Yhat;
  Matrix ThetaHat;
  std::vector<double> objective_trace;  // entry 0 is the objective at the origin
  int iterations = 0;
  double wall_time = 0.0;
  bool converged = false;
  double final_step = 0.0;  // L used in the last iteration
  Index svd_rows = 0;       // largest matrix passed to an SVD
  Index svd_cols = 0;
};

struct Gradients {
  Matrix Gx;
  Matrix Gy;
};

inline void validate(const SolveConfig& c) {
  detail::require(c.lambda1 > 0.0 && std::isfinite(c.lambda1), Errc::InvalidParameter, "lambda1 must be > 0");
  detail::require(c.lambda2 > 0.0 && std::isfinite(c.lambda2), Errc::InvalidParameter, "lambda2 must be > 0");
  detail::require(c.max_iters >= 1, Errc::InvalidParameter, "max_iters must be >= 1");
  detail::require(c.rel_tol > 0.0, Errc::InvalidParameter, "rel_tol must be > 0");
  if (c.Z.rows() != c.pair.N() || c.Z.cols() != c.pair.M()) {
    detail::fail(Errc::ShapeError, "Z must be " + std::to_string(c.pair.N()) + "x" + std::to_string(c.pair.M()));
  }
  require_finite(c.Z, "Z");
}

namespace detail {

inline void check_iterate_shapes(const Matrix& x, const Matrix& y, const SolveConfig& c) {
  if (x.rows() != c.pair.n() || x.cols() != c.pair.m()) detail::fail(Errc::ShapeError, "X has the wrong shape");
  if (y.rows() != c.pair.N() || y.cols() != c.pair.M()) detail::fail(Errc::ShapeError, "Y has the wrong shape");
  if (c.Z.rows() != c.pair.N() || c.Z.cols() != c.pair.M()) detail::fail(Errc::ShapeError, "Z has the wrong shape");
}

}  // namespace detail

inline Matrix residual(const Matrix& x, const Matrix& y, const SolveConfig& c) {
  detail::check_iterate_shapes(x, y, c);
  return c.pair.lift(x) + y - c.Z;
}

inline double smooth_loss(const Matrix& x, const Matrix& y, const SolveConfig& c) {
  return 0.5 * residual(x, y, c).squaredNorm();
}

inline double objective(const Matrix& x, const Matrix& y, const SolveConfig& c) {
  return smooth_loss(x, y, c) + c.lambda1 * norm(x, NormKind::nuclear) + c.lambda2 * norm(y, NormKind::vec1);
}

inline Gradients gradients(const Matrix& x, const Matrix& y, const SolveConfig& c) {
  Matrix gy = residual(x, y, c);
  Matrix gx = c.pair.pullback(gy);
  return {std::move(gx), std::move(gy)};
}

inline double lipschitz_bound(const ProjectorPair& pair) {
  const double p = pair.P_spectrum().sigma_max;
  const double q = pair.Q_spectrum().sigma_max;
  return p * p * q * q + 1.0;
}

struct Penalties {
  double lambda1;
  double lambda2;
};

inline Penalties default_penalties(Index N, double sigma) {
  detail::require(N >= 1, Errc::InvalidParameter, "N must be >= 1");
  detail::require(sigma > 0.0 && std::isfinite(sigma), Errc::InvalidParameter, "sigma must be > 0");
  return {std::sqrt(2.0 * static_cast<double>(N)) * sigma, std::sqrt(2.0) * sigma};
}

namespace detail {

// A flat objective can hide an iterate that is still moving, so a stop is confirmed by one plain
// prox-gradient step from (x, y) with step 1/bound.
inline bool near_fixed_point(const Matrix& x, const Matrix& y, const Matrix& r, const SolveConfig& c,
                             double bound) {
  const Matrix x1 = svt(x - c.pair.pullback(r) / bound, c.lambda1 / bound);
  const Matrix y1 = soft_threshold(y - r / bound, c.lambda2 / bound);
  const double change = std::sqrt((x1 - x).squaredNorm() + (y1 - y).squaredNorm());
  const double size = std::sqrt(x.squaredNorm() + y.squaredNorm());
  return change < 5.0 * c.rel_tol * (1.0 + size);
}

}  // namespace detail

inline SolveResult solve(const SolveConfig& c) {
  validate(c);
  const auto start = std::chrono::steady_clock::now();
  const ProjectorPair& pair = c.pair;

  Matrix x = Matrix::Zero(pair.n(), pair.m());
  Matrix y = Matrix::Zero(pair.N(), pair.M());
  Matrix x_prev = x;
  Matrix y_prev = y;
  Matrix r = -c.Z;  // residual P X Q^T + Y - Z at the current iterate
  Matrix r_prev = r;
  double t = 1.0;
  double t_prev = 1.0;

  const double bound = lipschitz_bound(pair);
  double L = c.step_mode == StepMode::FixedLipschitz ? bound : bound / 4.0;
  const bool at_current = c.accelerate && c.gradient_point == GradientPoint::Current;

  SolveResult res;
  int next_check = 1;
  double f = 0.5 * c.Z.squaredNorm();
  res.objective_trace.push_back(f);

  for (int k = 1; k <= c.max_iters; ++k) {
    const double w = c.accelerate ? (t_prev - 1.0) / t : 0.0;
    Matrix fx = x;
    Matrix fy = y;
    Matrix rf = r;
    if (w != 0.0) {
      fx += w * (x - x_prev);
      fy += w * (y - y_prev);
      rf += w * (r - r_prev);  // the residual is affine in (X, Y)
    }
    const Matrix& gy = at_current ? r : rf;
    const Matrix gx = pair.pullback(gy);
    const Matrix& base_x = at_current ? x : fx;
    const Matrix& base_y = at_current ? y : fy;
    const double base_loss = 0.5 * gy.squaredNorm();

    SvtResult sx;
    Matrix yn;
    Matrix rn;
    for (;;) {
      const Matrix vx = fx - gx / L;
      res.svd_rows = std::max(res.svd_rows, vx.rows());
      res.svd_cols = std::max(res.svd_cols, vx.cols());
      if (!vx.allFinite() || !fy.allFinite()) {
        throw SolverFailure("non-finite iterate at iteration " + std::to_string(k), res.objective_trace);
      }
      sx = svt_full(vx, c.lambda1 / L);
      yn = soft_threshold(fy - gy / L, c.lambda2 / L);
      rn = pair.lift(sx.X) + yn - c.Z;
      if (c.step_mode == StepMode::FixedLipschitz) break;
      const Matrix dx = sx.X - base_x;
      const Matrix dy = yn - base_y;
      const double upper = base_loss + frob_inner(gx, dx) + frob_inner(gy, dy) +
                           0.5 * L * (dx.squaredNorm() + dy.squaredNorm());
      const double loss = 0.5 * rn.squaredNorm();
      if (loss <= upper + 1e-14 * (1.0 + std::abs(upper))) break;
      L *= 2.0;
      if (!std::isfinite(L)) throw SolverFailure("step search diverged", res.objective_trace);
    }

    const double fn = 0.5 * rn.squaredNorm() + c.lambda1 * sx.nuclear + c.lambda2 * yn.cwiseAbs().sum();
    if (!std::isfinite(fn)) {
      throw SolverFailure("non-finite objective at iteration " + std::to_string(k), res.objective_trace);
    }
    x_prev = std::move(x);
    y_prev = std::move(y);
    r_prev = std::move(r);
    x = std::move(sx.X);
    y = std::move(yn);
    r = std::move(rn);
    t_prev = t;
    t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));

    res.objective_trace.push_back(fn);
    res.iterations = k;
    const bool small = std::abs(fn - f) / (1.0 + std::abs(fn)) < c.rel_tol;
    f = fn;
    if (small && k >= next_check) {
      if (detail::near_fixed_point(x, y, r, c, bound)) {
        res.converged = true;
        break;
      }
      next_check = k + 10;
    }
  }

  res.final_step = L;
  res.ThetaHat = pair.lift(x) + y;
  res.Xhat = std::move(x);
  res.Yhat = std::move(y);
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace prpca
