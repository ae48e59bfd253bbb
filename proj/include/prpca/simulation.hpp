#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prpca/interpolation.hpp"
#include "prpca/io.hpp"
#include "prpca/linalg.hpp"
#include "prpca/rng.hpp"
#include "prpca/solver.hpp"

namespace prpca {

struct SimulationSpec {
  Index N = 100;
  Index M = 100;
  Index r = 10;
  double sigma = 0.6;
  double rho_s = 0.1;
  int reps = 1;
  std::uint64_t seed = 1;
  std::vector<PairKind> solver_kinds{PairKind::Identity, PairKind::Single, PairKind::Double};
  // Solver knobs. Explicit penalties override the defaults, which are multiplied by lambda_scale.
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  double lambda_scale = 1.0;
  int max_iters = 1000;
  double rel_tol = 1e-7;
  bool accelerate = true;
  bool timing = true;  // false writes 0 in the seconds column so output is byte-reproducible
};

inline void validate(const SimulationSpec& s) {
  auto bad = [](const std::string& m) { detail::fail(Errc::InvalidParameter, m); };
  if (s.N < 4 || s.N % 2 != 0 || s.M < 4 || s.M % 2 != 0) bad("N and M must be even and >= 4");
  if (s.r < 0 || s.r > std::min(s.N, s.M) / 2) bad("r must lie in [0, min(N, M)/2]");
  if (!(s.sigma >= 0.0) || !std::isfinite(s.sigma)) bad("sigma must be >= 0");
  if (!(s.rho_s >= 0.0 && s.rho_s <= 1.0)) bad("rho_s must lie in [0, 1]");
  if (s.reps < 1) bad("reps must be >= 1");
  if (s.solver_kinds.empty()) bad("no solver kinds given");
  for (PairKind k : s.solver_kinds) {
    if (k != PairKind::Identity && k != PairKind::Single && k != PairKind::Double) {
      bad(std::string("solver kind ") + to_string(k) + " is not one of identity, single, double");
    }
  }
  if (!(s.lambda_scale > 0.0)) bad("lambda_scale must be > 0");
  if (s.lambda1 && !(*s.lambda1 > 0.0)) bad("lambda1 must be > 0");
  if (s.lambda2 && !(*s.lambda2 > 0.0)) bad("lambda2 must be > 0");
  if (s.max_iters < 1) bad("max_iters must be >= 1");
  if (!(s.rel_tol > 0.0)) bad("rel_tol must be > 0");
}

struct Instance {
  Matrix Z;
  Matrix X0;
  Matrix Y0;
  Matrix Theta;
  Matrix E;
  ProjectorPair pair0;
};

inline Instance generate_instance(const SimulationSpec& spec, int rep) {
  validate(spec);
  detail::require(rep >= 0, Errc::InvalidParameter, "rep index must be >= 0");
  const Index N = spec.N, M = spec.M, n = N / 2, m = M / 2, r = spec.r;
  const auto rep64 = static_cast<std::uint64_t>(rep);
  const Stream su(spec.seed, rep64, Purpose::LowrankU);
  const Stream sv(spec.seed, rep64, Purpose::LowrankV);
  const Stream ss(spec.seed, rep64, Purpose::SparseSupport);
  const Stream sy(spec.seed, rep64, Purpose::SparseValue);
  const Stream se(spec.seed, rep64, Purpose::Noise);

  Matrix u(n, r), v(m, r);
  for (Index k = 0; k < r; ++k) {
    for (Index i = 0; i < n; ++i) u(i, k) = spec.sigma * su.gaussian(static_cast<std::uint64_t>(i + n * k));
    for (Index j = 0; j < m; ++j) v(j, k) = spec.sigma * sv.gaussian(static_cast<std::uint64_t>(j + m * k));
  }
  Matrix y0 = Matrix::Zero(N, M);
  Matrix e(N, M);
  for (Index j = 0; j < M; ++j) {
    for (Index i = 0; i < N; ++i) {
      const auto idx = static_cast<std::uint64_t>(i + N * j);
      if (ss.uniform(idx) < spec.rho_s) y0(i, j) = -5.0 + 10.0 * sy.uniform(idx);
      e(i, j) = spec.sigma * se.gaussian(idx);
    }
  }
  ProjectorPair pair0 = projector_pair(PairKind::Single, N, M);
  Matrix x0 = u * v.transpose();
  Matrix theta = pair0.P() * x0 * pair0.Q().transpose() + y0;
  Matrix z = theta + e;
  return {std::move(z), std::move(x0), std::move(y0), std::move(theta), std::move(e), std::move(pair0)};
}

inline double rmse(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "rmse");
  detail::require(a.size() > 0, Errc::ShapeError, "rmse of empty matrices");
  return (a - b).norm() / std::sqrt(static_cast<double>(a.size()));
}

struct GridRow {
  Index N = 0;
  Index M = 0;
  Index r = 0;
  double sigma = 0.0;
  double rho_s = 0.0;
  int rep = 0;
  PairKind kind = PairKind::Identity;
  double rmse_lowrank = std::numeric_limits<double>::quiet_NaN();
  double rmse_sparse = std::numeric_limits<double>::quiet_NaN();
  double rmse_theta = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  int iterations = 0;
  std::string status;
};

inline Penalties spec_penalties(const SimulationSpec& spec) {
  if (spec.lambda1 && spec.lambda2) return {*spec.lambda1, *spec.lambda2};
  const Penalties d = default_penalties(spec.N, spec.sigma);
  return {spec.lambda1 ? *spec.lambda1 : d.lambda1 * spec.lambda_scale,
          spec.lambda2 ? *spec.lambda2 : d.lambda2 * spec.lambda_scale};
}

inline GridRow run_one(const SimulationSpec& spec, const Instance& inst, int rep, PairKind kind) {
  GridRow row{spec.N, spec.M, spec.r, spec.sigma, spec.rho_s, rep, kind};
  try {
    const Penalties pen = spec_penalties(spec);
    SolveConfig cfg(inst.Z, projector_pair(kind, spec.N, spec.M), pen.lambda1, pen.lambda2);
    cfg.max_iters = spec.max_iters;
    cfg.rel_tol = spec.rel_tol;
    cfg.accelerate = spec.accelerate;
    const SolveResult res = solve(cfg);
    row.rmse_lowrank = rmse(cfg.pair.lift(res.Xhat), inst.pair0.lift(inst.X0));
    row.rmse_sparse = rmse(res.Yhat, inst.Y0);
    row.rmse_theta = rmse(res.ThetaHat, inst.Theta);
    row.seconds = spec.timing ? res.wall_time : 0.0;
    row.iterations = res.iterations;
    row.status = res.converged ? "ok" : "max_iters";
  } catch (const Error& e) {
    row.status = std::string("error:") + to_string(e.code());
  }
  return row;
}

// Rows come out in canonical order: spec, then rep, then kind as listed in the spec.
inline std::vector<GridRow> run_grid(const std::vector<SimulationSpec>& specs) {
  detail::require(!specs.empty(), Errc::InvalidParameter, "empty spec list");
  for (const SimulationSpec& s : specs) validate(s);
  std::vector<GridRow> rows;
  for (const SimulationSpec& spec : specs) {
    for (int rep = 0; rep < spec.reps; ++rep) {
      const Instance inst = generate_instance(spec, rep);
      for (PairKind kind : spec.solver_kinds) rows.push_back(run_one(spec, inst, rep, kind));
    }
  }
  return rows;
}

inline constexpr const char* kGridCsvHeader =
    "N,M,r,sigma,rho_s,rep,kind,rmse_lowrank,rmse_sparse,rmse_theta,seconds,iterations,status";

inline std::string to_csv_row(const GridRow& r) {
  std::string s;
  s += std::to_string(r.N) + ',' + std::to_string(r.M) + ',' + std::to_string(r.r) + ',';
  s += format_double(r.sigma) + ',' + format_double(r.rho_s) + ',' + std::to_string(r.rep) + ',';
  s += std::string(to_string(r.kind)) + ',';
  s += format_double(r.rmse_lowrank) + ',' + format_double(r.rmse_sparse) + ',' + format_double(r.rmse_theta) + ',';
  s += format_double(r.seconds) + ',' + std::to_string(r.iterations) + ',' + r.status;
  return s;
}

inline std::string grid_to_csv(const std::vector<GridRow>& rows) {
  std::string out = std::string(kGridCsvHeader) + "\n";
  for (const GridRow& r : rows) out += to_csv_row(r) + "\n";
  return out;
}

namespace detail {

template <typename T, typename F>
std::vector<T> parse_list(const std::string& text, F parse) {
  std::vector<T> out;
  for (std::string_view item : split(text, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse(item));
  }
  if (out.empty()) throw FormatError(0, "empty list value '" + text + "'");
  return out;
}

inline bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw FormatError(0, "not a boolean: '" + std::string(s) + "'");
}

}  // namespace detail

// Builds specs from key=value pairs. N, M, r, sigma and rho_s may hold comma-separated lists;
// the cartesian product is expanded in the order N, M, r, sigma, rho_s. M defaults to N.
inline std::vector<SimulationSpec> specs_from_key_values(const std::map<std::string, std::string>& kv) {
  static const char* known[] = {"N", "M", "r", "sigma", "rho_s", "reps", "seed", "kinds", "lambda1", "lambda2",
                                "lambda_scale", "max_iters", "rel_tol", "accelerate", "timing"};
  for (const auto& [k, v] : kv) {
    if (std::find(std::begin(known), std::end(known), k) == std::end(known)) {
      throw FormatError(0, "unknown simulation key '" + k + "'");
    }
  }
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto ints = [](std::string_view s) { return static_cast<Index>(parse_int(s)); };
  auto reals = [](std::string_view s) { return parse_double(s); };

  SimulationSpec base;
  if (auto* v = get("reps")) base.reps = static_cast<int>(parse_int(*v));
  if (auto* v = get("seed")) base.seed = parse_u64(*v);
  if (auto* v = get("kinds")) {
    base.solver_kinds = detail::parse_list<PairKind>(*v, [](std::string_view s) { return parse_pair_kind(s); });
  }
  if (auto* v = get("lambda1")) base.lambda1 = parse_double(*v);
  if (auto* v = get("lambda2")) base.lambda2 = parse_double(*v);
  if (auto* v = get("lambda_scale")) base.lambda_scale = parse_double(*v);
  if (auto* v = get("max_iters")) base.max_iters = static_cast<int>(parse_int(*v));
  if (auto* v = get("rel_tol")) base.rel_tol = parse_double(*v);
  if (auto* v = get("accelerate")) base.accelerate = detail::parse_bool(*v);
  if (auto* v = get("timing")) base.timing = detail::parse_bool(*v);

  const std::vector<Index> Ns = get("N") ? detail::parse_list<Index>(*get("N"), ints) : std::vector<Index>{base.N};
  const std::vector<Index> Ms = get("M") ? detail::parse_list<Index>(*get("M"), ints) : std::vector<Index>{};
  const std::vector<Index> rs = get("r") ? detail::parse_list<Index>(*get("r"), ints) : std::vector<Index>{base.r};
  const std::vector<double> sigmas =
      get("sigma") ? detail::parse_list<double>(*get("sigma"), reals) : std::vector<double>{base.sigma};
  const std::vector<double> rhos =
      get("rho_s") ? detail::parse_list<double>(*get("rho_s"), reals) : std::vector<double>{base.rho_s};

  std::vector<SimulationSpec> out;
  for (Index N : Ns) {
    for (Index M : Ms.empty() ? std::vector<Index>{N} : Ms) {
      for (Index r : rs) {
        for (double sigma : sigmas) {
          for (double rho : rhos) {
            SimulationSpec s = base;
            s.N = N;
            s.M = M;
            s.r = r;
            s.sigma = sigma;
            s.rho_s = rho;
            validate(s);
            out.push_back(std::move(s));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace prpca
