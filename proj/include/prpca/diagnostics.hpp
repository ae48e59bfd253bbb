#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prpca/interpolation.hpp"
#include "prpca/io.hpp"
#include "prpca/linalg.hpp"
#include "prpca/projectors.hpp"
#include "prpca/solver.hpp"

namespace prpca {

inline void require_rho(double rho) {
  detail::require(rho > 0.0 && std::isfinite(rho), Errc::InvalidParameter, "rho must be > 0");
}

struct SupportCounts {
  Index max_per_col = 0;
  Index max_per_row = 0;
};

inline SupportCounts support_counts(const Matrix& y0) {
  require_finite(y0, "Y0");
  if (y0.size() == 0) return {};
  const auto nz = (y0.array() != 0.0).cast<Index>();
  return {nz.colwise().sum().maxCoeff(), nz.rowwise().sum().maxCoeff()};
}

inline double alpha_from_counts(const SupportCounts& c, double rho) {
  require_rho(rho);
  return std::max(rho * static_cast<double>(c.max_per_col), static_cast<double>(c.max_per_row) / rho);
}

inline double alpha(const Matrix& y0, double rho) {
  require_rho(rho);
  return alpha_from_counts(support_counts(y0), rho);
}

// beta(rho) = a / rho + b * rho + c.
struct BetaTerms {
  double a = 0.0;  // ||Ut Ut^T||_vecInf
  double b = 0.0;  // ||Vt Vt^T||_vecInf
  double c = 0.0;  // ||Ut||_2->inf ||Vt||_2->inf

  double at(double rho) const {
    require_rho(rho);
    return a / rho + b * rho + c;
  }
};

// The largest entry of U U^T sits on its diagonal (Cauchy-Schwarz), so it equals ||U||_2->inf^2.
inline BetaTerms beta_terms(const SmoothLowrankProjector& t) {
  const double u = two_to_inf(t.Ut());
  const double v = two_to_inf(t.Vt());
  return {u * u, v * v, u * v};
}

inline BetaTerms beta_terms(const Matrix& x0, const ProjectorPair& pair) {
  return beta_terms(smooth_lowrank_projector(x0, pair.P(), pair.Q()));
}

inline double beta(const Matrix& x0, const ProjectorPair& pair, double rho) {
  require_rho(rho);
  return beta_terms(x0, pair).at(rho);
}

struct GammaQuantities {
  Matrix Gamma;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

inline GammaQuantities gamma_quantities(const Matrix& x0, const ProjectorPair& pair) {
  if (x0.rows() != pair.n() || x0.cols() != pair.m()) detail::fail(Errc::ShapeError, "X0 does not match the pair");
  const LowrankFactors f = lowrank_factors(x0);
  const Matrix pu_pinv_t = pseudoinverse(pair.P() * f.U0).transpose();  // N x r
  const Matrix qv_pinv = pseudoinverse(pair.Q() * f.V0);                // r x M
  GammaQuantities g;
  g.Gamma = pu_pinv_t * (f.V0.transpose() * pair.Q_pinv()) + pair.P_pinv().transpose() * (f.U0 * qv_pinv) -
            pu_pinv_t * qv_pinv;
  g.gamma1 = norm(g.Gamma, NormKind::vec_inf);
  g.gamma2 = norm(g.Gamma, NormKind::spectral);
  return g;
}

// 21 log-spaced points in [sqrt(M/N)/10, 10 sqrt(M/N)].
inline std::vector<double> default_rho_grid(Index N, Index M, int points = 21) {
  detail::require(N >= 1 && M >= 1 && points >= 2, Errc::InvalidParameter, "bad grid request");
  const double centre = std::sqrt(static_cast<double>(M) / static_cast<double>(N));
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double e = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    g[static_cast<std::size_t>(i)] = centre * std::pow(10.0, e);
  }
  return g;
}

struct MarginResult {
  double margin = 0.0;  // min over the grid of alpha * beta
  double rho = 0.0;     // grid point attaining it
};

inline MarginResult identifiability_margin_at(const SupportCounts& counts, const BetaTerms& bt,
                                              const std::vector<double>& grid) {
  detail::require(!grid.empty(), Errc::InvalidParameter, "empty rho grid");
  MarginResult best{std::numeric_limits<double>::infinity(), grid.front()};
  for (double rho : grid) {
    const double v = alpha_from_counts(counts, rho) * bt.at(rho);
    if (v < best.margin) best = {v, rho};
  }
  return best;
}

inline MarginResult identifiability_margin_detail(const Matrix& x0, const Matrix& y0, const ProjectorPair& pair,
                                                  const std::vector<double>& grid) {
  detail::require(!grid.empty(), Errc::InvalidParameter, "empty rho grid");
  if (y0.rows() != pair.N() || y0.cols() != pair.M()) detail::fail(Errc::ShapeError, "Y0 does not match the pair");
  return identifiability_margin_at(support_counts(y0), beta_terms(x0, pair), grid);
}

inline double identifiability_margin(const Matrix& x0, const Matrix& y0, const ProjectorPair& pair,
                                     const std::vector<double>& grid) {
  return identifiability_margin_detail(x0, y0, pair, grid).margin;
}

struct ErrorTerms {
  double eps_2to2 = 0.0;
  double eps_inf = 0.0;
  double eps_inf_prime = 0.0;
  double eps_star = 0.0;
};

inline ErrorTerms error_terms(const Matrix& e, const SmoothLowrankProjector& t, const ProjectorPair& pair) {
  if (e.rows() != pair.N() || e.cols() != pair.M()) detail::fail(Errc::ShapeError, "E does not match the pair");
  require_finite(e, "E");
  const Matrix ep = pair.P_proj() * e * pair.Q_proj();
  const Matrix te = t.apply(e);
  const Matrix tep = t.apply(ep);
  ErrorTerms out;
  out.eps_2to2 = norm(e, NormKind::spectral);
  out.eps_inf = norm(te, NormKind::vec_inf) + norm(e, NormKind::vec_inf);
  out.eps_inf_prime = norm(tep, NormKind::vec_inf) + norm(ep, NormKind::vec_inf);
  out.eps_star = norm(tep, NormKind::nuclear);
  return out;
}

inline ErrorTerms error_terms(const Matrix& e, const Matrix& x0, const ProjectorPair& pair) {
  if (x0.rows() != pair.n() || x0.cols() != pair.m()) detail::fail(Errc::ShapeError, "X0 does not match the pair");
  return error_terms(e, smooth_lowrank_projector(x0, pair.P(), pair.Q()), pair);
}

struct BoundInputs {
  Index r = 0;
  Index s = 0;
  double c = 2.0;
  double rho = 1.0;
  double eta0 = 1.0;
  std::optional<double> eta1;  // when absent, the implied lower bound eta0 / (sigma_max(P) sigma_max(Q)) is used
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

inline void validate(const BoundInputs& in) {
  detail::require(in.r >= 0 && in.s >= 0, Errc::InvalidParameter, "r and s must be >= 0");
  detail::require(in.c > 1.0 && std::isfinite(in.c), Errc::InvalidParameter, "c must be > 1");
  require_rho(in.rho);
  detail::require(in.eta0 > 0.0, Errc::InvalidParameter, "eta0 must be > 0");
  detail::require(!in.eta1 || *in.eta1 > 0.0, Errc::InvalidParameter, "eta1 must be > 0");
  detail::require(in.lambda1 > 0.0 && in.lambda2 > 0.0, Errc::InvalidParameter, "penalties must be > 0");
}

struct DeltaQuantities {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta = 0.0;
};

inline DeltaQuantities delta_quantities(const BoundInputs& in, double alpha, double beta, double gamma1,
                                        double gamma2, const ErrorTerms& eps) {
  validate(in);
  const double ab = alpha * beta;
  if (!(ab < 1.0)) detail::fail(Errc::NotIdentifiable, "alpha * beta = " + std::to_string(ab) + " >= 1");
  const double l1 = in.lambda1;
  const double l2 = in.lambda2;
  const double k = 1.0 / (1.0 - ab);
  DeltaQuantities d;
  d.delta1 = static_cast<double>(in.r) *
             (2.0 * alpha * k * (l2 + gamma1 * l1 + eps.eps_inf) + 2.0 * eps.eps_2to2 + l1 * gamma2);
  d.delta2 = static_cast<double>(in.s) * k * (l2 + l1 * gamma1 + eps.eps_inf);
  d.delta = (l1 * gamma2 + eps.eps_2to2) * d.delta1 + (l2 + eps.eps_inf) * d.delta2;
  return d;
}

struct PenaltyConditions {
  bool c1 = false;
  bool c2 = false;
  bool c3 = false;
  bool all() const { return c1 && c2 && c3; }
};

inline PenaltyConditions penalty_conditions(const BoundInputs& in, double alpha, double beta, double gamma1,
                                            const ErrorTerms& eps, const ProjectorPair& pair) {
  PenaltyConditions pc;
  const double ab = alpha * beta;
  const double c = in.c;
  pc.c1 = ab < 1.0;
  if (!pc.c1) return pc;
  const double k = alpha / (1.0 - ab);
  const double inv = 1.0 / (pair.P_spectrum().sigma_max * pair.Q_spectrum().sigma_max);
  pc.c2 = (inv - c * gamma1 * k) * in.lambda1 >= c * (k * in.lambda2 + k * eps.eps_inf + eps.eps_2to2);
  pc.c3 = (1.0 - (1.0 + c) * ab) * in.lambda2 >= c * (gamma1 * in.lambda1 + (2.0 - ab) * eps.eps_inf);
  return pc;
}

// Smallest (lambda1, lambda2) meeting the second and third conditions with equality, each scaled
// up by `slack`. Empty when no pair exists for this c.
inline std::optional<Penalties> minimal_penalties(double alpha, double beta, double gamma1, const ErrorTerms& eps,
                                                  const ProjectorPair& pair, double c, double slack = 1.01) {
  detail::require(c > 1.0, Errc::InvalidParameter, "c must be > 1");
  const double ab = alpha * beta;
  const double d3 = 1.0 - (1.0 + c) * ab;
  if (!(ab < 1.0) || !(d3 > 0.0)) return std::nullopt;
  // Third condition: lambda2 >= A lambda1 + B.
  const double A = c * gamma1 / d3;
  const double B = c * (2.0 - ab) * eps.eps_inf / d3;
  const double k = alpha / (1.0 - ab);
  const double inv = 1.0 / (pair.P_spectrum().sigma_max * pair.Q_spectrum().sigma_max);
  // Second condition with lambda2 = slack (A lambda1 + B).
  const double coef = inv - c * gamma1 * k - c * k * slack * A;
  if (!(coef > 0.0)) return std::nullopt;
  const double rhs = c * (k * slack * B + k * eps.eps_inf + eps.eps_2to2);
  double l1 = slack * rhs / coef;
  if (!(l1 > 0.0)) l1 = 1e-12;
  double l2 = slack * (A * l1 + B);
  if (!(l2 > 0.0)) l2 = 1e-12;
  return Penalties{l1, l2};
}

struct RecoveryBounds {
  double bound_Y_vec1 = 0.0;        // bounds (1 - alpha beta) ||Yhat - Y0||_vec1
  double bound_PYQ_vec1 = 0.0;      // bounds (1 - alpha beta) ||P*(Yhat - Y0)Q*||_vec1
  double bound_X_nuclear = 0.0;     // bounds ||P (Xhat - X0) Q^T||_*
};

inline RecoveryBounds recovery_bounds(const BoundInputs& in, double alpha, double beta, double gamma1,
                                      const DeltaQuantities& d, const ErrorTerms& eps, const ProjectorPair& pair) {
  validate(in);
  const PenaltyConditions pc = penalty_conditions(in, alpha, beta, gamma1, eps, pair);
  if (!pc.all()) {
    detail::fail(Errc::BoundNotApplicable, std::string("penalty conditions fail (c1=") + (pc.c1 ? "1" : "0") +
                                               " c2=" + (pc.c2 ? "1" : "0") + " c3=" + (pc.c3 ? "1" : "0") + ")");
  }
  const double ab = alpha * beta;
  const double s = static_cast<double>(in.s);
  const double r = static_cast<double>(in.r);
  const double shrink = 1.0 - 1.0 / in.c;
  const double smin = 1.0 / (pair.P_spectrum().sigma_min * pair.Q_spectrum().sigma_min);
  const double smax = pair.P_spectrum().sigma_max * pair.Q_spectrum().sigma_max;
  const double eta1 = in.eta1 ? *in.eta1 : in.eta0 / smax;
  const double tail =
      5.0 * in.lambda2 * s + 2.0 * s * eps.eps_inf + 3.0 * s * eps.eps_inf_prime + 2.0 * smin * in.lambda1 * std::sqrt(s * r);

  RecoveryBounds b;
  b.bound_PYQ_vec1 = d.delta / (in.lambda2 * shrink * in.eta0) + tail;
  b.bound_Y_vec1 = (1.0 + 1.0 / in.eta0) * d.delta / (2.0 * shrink * in.lambda2) + tail;
  b.bound_X_nuclear = d.delta / (2.0 * shrink * in.lambda1 * eta1) + eps.eps_star + 2.0 * smin * in.lambda1 * r +
                      std::sqrt(2.0 * r) * b.bound_PYQ_vec1 / (1.0 - ab);
  return b;
}

struct DiagnoseOptions {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double c = 2.0;
  std::optional<double> rho;  // defaults to the grid minimiser
  double eta0 = 1.0;
  std::optional<double> eta1;
  std::vector<double> rho_grid;  // empty selects default_rho_grid
};

struct DiagnosticsReport {
  Index r = 0;
  Index s = 0;
  double c = 0.0;
  double eta0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double identifiability_margin = 0.0;
  double margin_rho = 0.0;
  ErrorTerms eps;
  bool delta_defined = false;
  DeltaQuantities delta;
  PenaltyConditions penalty_ok;
  bool bounds_defined = false;
  RecoveryBounds bounds;
};

inline DiagnosticsReport diagnose(const Matrix& x0, const Matrix& y0, const Matrix& e, const ProjectorPair& pair,
                                  const DiagnoseOptions& opt) {
  if (y0.rows() != pair.N() || y0.cols() != pair.M()) detail::fail(Errc::ShapeError, "Y0 does not match the pair");
  if (x0.rows() != pair.n() || x0.cols() != pair.m()) detail::fail(Errc::ShapeError, "X0 does not match the pair");
  const SmoothLowrankProjector t = smooth_lowrank_projector(x0, pair.P(), pair.Q());
  const SupportCounts counts = support_counts(y0);
  const BetaTerms bt = beta_terms(t);
  const std::vector<double> grid = opt.rho_grid.empty() ? default_rho_grid(pair.N(), pair.M()) : opt.rho_grid;

  DiagnosticsReport rep;
  const MarginResult mr = identifiability_margin_at(counts, bt, grid);
  rep.identifiability_margin = mr.margin;
  rep.margin_rho = mr.rho;
  rep.rho = opt.rho ? *opt.rho : mr.rho;
  rep.alpha = alpha_from_counts(counts, rep.rho);
  rep.beta = bt.at(rep.rho);
  const GammaQuantities g = gamma_quantities(x0, pair);
  rep.gamma1 = g.gamma1;
  rep.gamma2 = g.gamma2;
  rep.eps = error_terms(e, t, pair);

  BoundInputs in;
  in.r = t.rank();
  in.s = (y0.array() != 0.0).count();
  in.c = opt.c;
  in.rho = rep.rho;
  in.eta0 = opt.eta0;
  in.eta1 = opt.eta1;
  in.lambda1 = opt.lambda1;
  in.lambda2 = opt.lambda2;
  validate(in);
  rep.r = in.r;
  rep.s = in.s;
  rep.c = in.c;
  rep.eta0 = in.eta0;
  rep.lambda1 = in.lambda1;
  rep.lambda2 = in.lambda2;

  rep.penalty_ok = penalty_conditions(in, rep.alpha, rep.beta, rep.gamma1, rep.eps, pair);
  if (rep.penalty_ok.c1) {
    rep.delta = delta_quantities(in, rep.alpha, rep.beta, rep.gamma1, rep.gamma2, rep.eps);
    rep.delta_defined = true;
  }
  if (rep.penalty_ok.all()) {
    rep.bounds = recovery_bounds(in, rep.alpha, rep.beta, rep.gamma1, rep.delta, rep.eps, pair);
    rep.bounds_defined = true;
  }
  return rep;
}

namespace detail {

inline std::vector<std::pair<std::string, std::string>> report_fields(const DiagnosticsReport& r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto f = [](double v) { return format_double(v); };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"r", std::to_string(r.r)},
      {"s", std::to_string(r.s)},
      {"c", f(r.c)},
      {"eta0", f(r.eta0)},
      {"lambda1", f(r.lambda1)},
      {"lambda2", f(r.lambda2)},
      {"rho", f(r.rho)},
      {"alpha", f(r.alpha)},
      {"beta", f(r.beta)},
      {"alpha_beta", f(r.alpha * r.beta)},
      {"gamma1", f(r.gamma1)},
      {"gamma2", f(r.gamma2)},
      {"identifiability_margin", f(r.identifiability_margin)},
      {"margin_rho", f(r.margin_rho)},
      {"identifiable", b(r.identifiability_margin < 1.0)},
      {"eps_2to2", f(r.eps.eps_2to2)},
      {"eps_inf", f(r.eps.eps_inf)},
      {"eps_inf_prime", f(r.eps.eps_inf_prime)},
      {"eps_star", f(r.eps.eps_star)},
      {"delta1", f(r.delta_defined ? r.delta.delta1 : nan)},
      {"delta2", f(r.delta_defined ? r.delta.delta2 : nan)},
      {"delta", f(r.delta_defined ? r.delta.delta : nan)},
      {"penalty_c1", b(r.penalty_ok.c1)},
      {"penalty_c2", b(r.penalty_ok.c2)},
      {"penalty_c3", b(r.penalty_ok.c3)},
      {"bound_Y_vec1", f(r.bounds_defined ? r.bounds.bound_Y_vec1 : nan)},
      {"bound_PYQ_vec1", f(r.bounds_defined ? r.bounds.bound_PYQ_vec1 : nan)},
      {"bound_X_nuclear", f(r.bounds_defined ? r.bounds.bound_X_nuclear : nan)},
  };
}

}  // namespace detail

inline std::string to_key_value(const DiagnosticsReport& r) {
  std::string out;
  for (const auto& [k, v] : detail::report_fields(r)) out += k + "=" + v + "\n";
  return out;
}

inline std::string csv_header(const DiagnosticsReport& r) {
  std::string out;
  for (const auto& [k, v] : detail::report_fields(r)) out += (out.empty() ? "" : ",") + k;
  return out;
}

inline std::string to_csv_row(const DiagnosticsReport& r) {
  std::string out;
  bool first = true;
  for (const auto& [k, v] : detail::report_fields(r)) {
    out += (first ? "" : ",") + v;
    first = false;
  }
  return out;
}

}  // namespace prpca
