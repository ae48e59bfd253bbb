#include <gtest/gtest.h>

#include <algorithm>

#include "bound_cases.hpp"
#include "test_support.hpp"

using namespace prpca;
using namespace prpca::testing;

namespace {

Matrix orthogonal(Index n, std::mt19937_64& gen) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, gen));
  return qr.householderQ() * Matrix::Identity(n, n);
}

double alpha_oracle(const Matrix& y, double rho) {
  double col = 0, row = 0;
  for (Index j = 0; j < y.cols(); ++j) {
    double k = 0;
    for (Index i = 0; i < y.rows(); ++i) k += y(i, j) != 0.0;
    col = std::max(col, k);
  }
  for (Index i = 0; i < y.rows(); ++i) {
    double k = 0;
    for (Index j = 0; j < y.cols(); ++j) k += y(i, j) != 0.0;
    row = std::max(row, k);
  }
  return std::max(rho * col, row / rho);
}

}  // namespace

TEST(Alpha, Examples) {
  EXPECT_EQ(alpha(Matrix::Zero(3, 3), 1.0), 0.0);
  EXPECT_EQ(alpha(Matrix::Identity(4, 4), 1.0), 1.0);
  Matrix y(2, 2);
  y << 1, 1, 0, 0;
  EXPECT_EQ(alpha(y, 1.0), 2.0);
  EXPECT_EQ(alpha(y, 2.0), 2.0);
  EXPECT_EQ(alpha(y, 0.25), 8.0);
  EXPECT_EQ(error_code_of([&] { alpha(y, 0.0); }), Errc::InvalidParameter);
  EXPECT_EQ(error_code_of([&] { alpha(y, -1.0); }), Errc::InvalidParameter);
}

TEST(Alpha, MatchesCountingOracleAndIgnoresScale) {
  std::mt19937_64 gen(81);
  for (int t = 0; t < 50; ++t) {
    const Matrix y = random_sparse(9, 13, 0.2, gen);
    const double rho = 0.2 + 0.1 * t;
    EXPECT_DOUBLE_EQ(alpha(y, rho), alpha_oracle(y, rho));
    EXPECT_DOUBLE_EQ(alpha(-3.5 * y, rho), alpha(y, rho));
    EXPECT_GE(alpha(y, rho), 0.0);
  }
}

TEST(Beta, UnitSpikeIdentityPair) {
  const ProjectorPair pair = projector_pair(PairKind::Identity, 5, 5);
  Matrix x = Matrix::Zero(5, 5);
  x(0, 0) = 1.0;
  EXPECT_NEAR(beta(x, pair, 1.0), 3.0, 1e-12);
}

TEST(Beta, OrthogonalMatrixMatchesFormula) {
  std::mt19937_64 gen(82);
  const Matrix x = orthogonal(4, gen);
  const ProjectorPair pair = projector_pair(PairKind::Identity, 4, 4);
  // Full rank: U U^T = I, every row of U has unit norm, so the three terms are 1/rho, rho and 1.
  for (double rho : {0.5, 1.0, 3.0}) EXPECT_NEAR(beta(x, pair, rho), 1.0 / rho + rho + 1.0, 1e-10);
}

TEST(Beta, DirectFormulaAndScaleInvariance) {
  std::mt19937_64 gen(83);
  for (PairKind kind : {PairKind::Single, PairKind::Double, PairKind::Identity}) {
    const ProjectorPair pair = projector_pair(kind, 16, 24);
    const Matrix x = random_lowrank(pair.n(), pair.m(), 2, gen);
    const SvdFactors f = svd_thin(pair.lift(x));
    const Matrix U = f.U.leftCols(2);
    const Matrix V = f.V.leftCols(2);
    const double rho = 0.7;
    const double expect = norm(U * U.transpose(), NormKind::vec_inf) / rho +
                          rho * norm(V * V.transpose(), NormKind::vec_inf) + two_to_inf(U) * two_to_inf(V);
    EXPECT_NEAR(beta(x, pair, rho), expect, 1e-10);
    EXPECT_NEAR(beta(5.0 * x, pair, rho), beta(x, pair, rho), 1e-10);
    EXPECT_NEAR(beta(-0.01 * x, pair, rho), beta(x, pair, rho), 1e-10);
  }
  const ProjectorPair pair = projector_pair(PairKind::Single, 8, 8);
  EXPECT_EQ(error_code_of([&] { beta(Matrix::Zero(4, 4), pair, 1.0); }), Errc::InvalidMatrix);
}

TEST(Gamma, IdentityPairGivesSignMatrix) {
  std::mt19937_64 gen(84);
  const ProjectorPair pair = projector_pair(PairKind::Identity, 10, 12);
  const Matrix x = random_lowrank(10, 12, 3, gen);
  const LowrankFactors f = lowrank_factors(x);
  const GammaQuantities g = gamma_quantities(x, pair);
  EXPECT_LT(max_abs_diff(g.Gamma, f.U0 * f.V0.transpose()), 1e-10);
  EXPECT_NEAR(g.gamma2, 1.0, 1e-10);

  Vector u = random_matrix(10, 1, gen).col(0).normalized();
  Vector v = random_matrix(12, 1, gen).col(0).normalized();
  const GammaQuantities h = gamma_quantities(4.0 * u * v.transpose(), pair);
  EXPECT_LT(max_abs_diff(h.Gamma, u * v.transpose()), 1e-10);
}

TEST(Gamma, LiesInTangentSpaceAndIsScaleInvariant) {
  std::mt19937_64 gen(85);
  for (PairKind kind : {PairKind::Single, PairKind::Double, PairKind::RowOnly}) {
    const ProjectorPair pair = projector_pair(kind, 16, 16);
    const Matrix x = random_lowrank(pair.n(), pair.m(), 2, gen);
    const GammaQuantities g = gamma_quantities(x, pair);
    const SmoothLowrankProjector t = smooth_lowrank_projector(x, pair.P(), pair.Q());
    EXPECT_LT(max_abs_diff(t.apply(g.Gamma), g.Gamma), 1e-8);
    // Gamma pairs left and right singular vectors, so it is odd in X0; its norms are invariant.
    const GammaQuantities h = gamma_quantities(-7.0 * x, pair);
    EXPECT_LT(max_abs_diff(h.Gamma, -g.Gamma), 1e-10);
    EXPECT_NEAR(h.gamma1, g.gamma1, 1e-10);
    EXPECT_NEAR(h.gamma2, g.gamma2, 1e-10);
    EXPECT_LT(max_abs_diff(gamma_quantities(0.3 * x, pair).Gamma, g.Gamma), 1e-10);
    EXPECT_LE(g.gamma2, norm(g.Gamma, NormKind::nuclear) + 1e-12);
    EXPECT_GE(g.gamma1, 0.0);
  }
}

TEST(Gamma, MatchesFormulaWithExplicitPseudoinverses) {
  std::mt19937_64 gen(86);
  const ProjectorPair pair = projector_pair(PairKind::Single, 12, 10);
  const Matrix x = random_lowrank(6, 5, 2, gen);
  const SvdFactors f = svd_thin(x);
  const Matrix U0 = f.U.leftCols(2), V0 = f.V.leftCols(2);
  const Matrix& P = pair.P();
  const Matrix& Q = pair.Q();
  const Matrix pu = (P * U0).completeOrthogonalDecomposition().pseudoInverse();
  const Matrix qv = (Q * V0).completeOrthogonalDecomposition().pseudoInverse();
  const Matrix pp = P.completeOrthogonalDecomposition().pseudoInverse();
  const Matrix qp = Q.completeOrthogonalDecomposition().pseudoInverse();
  const Matrix expect = pu.transpose() * V0.transpose() * qp + pp.transpose() * U0 * qv - pu.transpose() * qv;
  EXPECT_LT(max_abs_diff(gamma_quantities(x, pair).Gamma, expect), 1e-10);
}

TEST(Margin, Examples) {
  std::mt19937_64 gen(87);
  const ProjectorPair pair = projector_pair(PairKind::Single, 20, 20);
  const Matrix x = random_lowrank(10, 10, 2, gen);
  const auto grid = default_rho_grid(20, 20);
  EXPECT_EQ(identifiability_margin(x, Matrix::Zero(20, 20), pair, grid), 0.0);
  EXPECT_GE(identifiability_margin(x, Matrix::Ones(20, 20), pair, grid), 1.0);
  EXPECT_EQ(error_code_of([&] { identifiability_margin(x, Matrix::Zero(20, 20), pair, {}); }),
            Errc::InvalidParameter);
}

TEST(Margin, DefaultGrid) {
  const auto g = default_rho_grid(100, 400);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_NEAR(g.front(), 0.2, 1e-12);
  EXPECT_NEAR(g[10], 2.0, 1e-12);
  EXPECT_NEAR(g.back(), 20.0, 1e-10);
}

TEST(Margin, SignOnlyDependence) {
  std::mt19937_64 gen(88);
  const ProjectorPair pair = projector_pair(PairKind::Single, 20, 20);
  const Matrix x = random_lowrank(10, 10, 2, gen);
  const Matrix y = random_sparse(20, 20, 0.05, gen);
  const auto grid = default_rho_grid(20, 20);
  EXPECT_DOUBLE_EQ(identifiability_margin(x, y, pair, grid), identifiability_margin(x, -4.0 * y, pair, grid));
  EXPECT_NEAR(identifiability_margin(x, y, pair, grid), identifiability_margin(3.0 * x, y, pair, grid), 1e-10);
}

TEST(Margin, GridMinimumCloseToRefinedGrid) {
  // alpha * beta is continuous in rho; the 21-point grid should land within 5% of a 10x finer grid.
  const auto coarse = default_rho_grid(40, 40);
  const auto fine = default_rho_grid(40, 40, 201);
  int within = 0;
  const int cases = 20;
  double worst = 0.0;
  for (int t = 0; t < cases; ++t) {
    SimulationSpec spec;
    spec.N = spec.M = 40;
    spec.r = 1 + t % 3;
    spec.rho_s = 0.02 + 0.01 * (t % 5);
    spec.seed = 900 + static_cast<std::uint64_t>(t);
    const Instance inst = generate_instance(spec, 0);
    const double a = identifiability_margin(inst.X0, inst.Y0, inst.pair0, coarse);
    const double b = identifiability_margin(inst.X0, inst.Y0, inst.pair0, fine);
    EXPECT_LE(b, a * (1 + 1e-12));
    worst = std::max(worst, a / b - 1.0);
    within += a <= 1.05 * b;
  }
  EXPECT_EQ(within, cases) << "largest relative gap " << worst;
}

TEST(ErrorTerms, ZeroNoise) {
  std::mt19937_64 gen(89);
  const ProjectorPair pair = projector_pair(PairKind::Single, 12, 12);
  const Matrix x = random_lowrank(6, 6, 2, gen);
  const ErrorTerms e = error_terms(Matrix::Zero(12, 12), x, pair);
  EXPECT_EQ(e.eps_2to2, 0.0);
  EXPECT_EQ(e.eps_inf, 0.0);
  EXPECT_EQ(e.eps_inf_prime, 0.0);
  EXPECT_EQ(e.eps_star, 0.0);
  EXPECT_EQ(error_code_of([&] { error_terms(Matrix::Zero(12, 10), x, pair); }), Errc::ShapeError);
}

TEST(ErrorTerms, IdentityPairAndDirectDefinitions) {
  std::mt19937_64 gen(90);
  const ProjectorPair id = projector_pair(PairKind::Identity, 10, 10);
  const Matrix x = random_lowrank(10, 10, 2, gen);
  const Matrix e = random_matrix(10, 10, gen, 0.3);
  const ErrorTerms t = error_terms(e, x, id);
  const LowrankProjector lp = lowrank_projector(x);
  EXPECT_NEAR(t.eps_inf_prime, t.eps_inf, 1e-12);
  EXPECT_NEAR(t.eps_star, norm(lp.apply(e), NormKind::nuclear), 1e-10);
  EXPECT_NEAR(t.eps_2to2, norm(e, NormKind::spectral), 1e-12);
  EXPECT_NEAR(t.eps_inf, norm(lp.apply(e), NormKind::vec_inf) + norm(e, NormKind::vec_inf), 1e-12);
}

TEST(ErrorTerms, NuclearTermWithinTwiceRankSpectral) {
  std::mt19937_64 gen(91);
  for (int t = 0; t < 20; ++t) {
    const ProjectorPair pair = projector_pair(t % 2 ? PairKind::Single : PairKind::Double, 16, 16);
    const Index r = 1 + t % 3;
    const Matrix x = random_lowrank(pair.n(), pair.m(), r, gen);
    const Matrix e = random_matrix(16, 16, gen, 0.5);
    const ErrorTerms et = error_terms(e, x, pair);
    const Matrix ep = pair.P_proj() * e * pair.Q_proj();
    EXPECT_LE(et.eps_star, 2.0 * static_cast<double>(r) * norm(ep, NormKind::spectral) * (1 + 1e-10));
  }
}

namespace {

BoundInputs some_inputs() {
  BoundInputs in;
  in.r = 2;
  in.s = 7;
  in.c = 1.5;
  in.rho = 1.0;
  in.lambda1 = 0.8;
  in.lambda2 = 0.3;
  return in;
}

}  // namespace

TEST(Delta, VanishingTermsExample) {
  BoundInputs in = some_inputs();
  in.r = 1;
  in.s = 1;
  const double g1 = 0.4, g2 = 1.3;
  const DeltaQuantities d = delta_quantities(in, 0.0, 0.0, g1, g2, ErrorTerms{});
  EXPECT_DOUBLE_EQ(d.delta1, in.lambda1 * g2);
  EXPECT_DOUBLE_EQ(d.delta2, in.lambda2 + in.lambda1 * g1);
  EXPECT_DOUBLE_EQ(d.delta, in.lambda1 * g2 * d.delta1 + in.lambda2 * d.delta2);
}

TEST(Delta, LinearInSparsity) {
  const BoundInputs in = some_inputs();
  BoundInputs twice = in;
  twice.s *= 2;
  const ErrorTerms eps{0.2, 0.1, 0.05, 0.3};
  const DeltaQuantities a = delta_quantities(in, 0.3, 0.5, 0.2, 1.1, eps);
  const DeltaQuantities b = delta_quantities(twice, 0.3, 0.5, 0.2, 1.1, eps);
  EXPECT_NEAR(b.delta2, 2 * a.delta2, 1e-12);
  EXPECT_NEAR(b.delta - a.delta, (in.lambda2 + eps.eps_inf) * a.delta2, 1e-12);
}

TEST(Delta, MatchesIndependentEvaluation) {
  std::mt19937_64 gen(92);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    BoundInputs in;
    in.r = 1 + static_cast<Index>(u(gen) * 5);
    in.s = static_cast<Index>(u(gen) * 50);
    in.lambda1 = 0.1 + u(gen);
    in.lambda2 = 0.1 + u(gen);
    const double a = u(gen), b = 0.9 * u(gen) / std::max(a, 0.1);
    const double g1 = u(gen), g2 = 1 + u(gen);
    const ErrorTerms eps{u(gen), u(gen), u(gen), u(gen)};
    if (a * b >= 1.0) continue;
    const DeltaQuantities d = delta_quantities(in, a, b, g1, g2, eps);
    const double inv = 1.0 / (1.0 - a * b);
    const double l1 = in.lambda1, l2 = in.lambda2, r = static_cast<double>(in.r), s = static_cast<double>(in.s);
    const double d1 = r * (2.0 * a * inv * (l2 + g1 * l1 + eps.eps_inf) + 2.0 * eps.eps_2to2 + l1 * g2);
    const double d2 = s * inv * (l2 + l1 * g1 + eps.eps_inf);
    const double dd = (l1 * g2 + eps.eps_2to2) * d1 + (l2 + eps.eps_inf) * d2;
    EXPECT_NEAR(d.delta1, d1, 1e-12 * (1 + d1));
    EXPECT_NEAR(d.delta2, d2, 1e-12 * (1 + d2));
    EXPECT_NEAR(d.delta, dd, 1e-12 * (1 + dd));
  }
}

TEST(Delta, RejectsNonIdentifiable) {
  EXPECT_EQ(error_code_of([] { delta_quantities(some_inputs(), 2.0, 0.5, 0.1, 1.0, ErrorTerms{}); }),
            Errc::NotIdentifiable);
  BoundInputs bad = some_inputs();
  bad.c = 1.0;
  EXPECT_EQ(error_code_of([&] { delta_quantities(bad, 0.1, 0.1, 0.1, 1.0, ErrorTerms{}); }), Errc::InvalidParameter);
}

TEST(PenaltyConditions, NotIdentifiable) {
  const ProjectorPair pair = projector_pair(PairKind::Identity, 4, 4);
  const PenaltyConditions pc = penalty_conditions(some_inputs(), 2.0, 0.5, 0.1, ErrorTerms{}, pair);
  EXPECT_FALSE(pc.c1);
  EXPECT_FALSE(pc.all());
}

TEST(PenaltyConditions, NoiselessIdentitySpecialisation) {
  // alpha = 0 and no noise: c2 always holds, c3 reads lambda2 >= c gamma1 lambda1.
  const ProjectorPair pair = projector_pair(PairKind::Identity, 4, 4);
  BoundInputs in = some_inputs();
  const double g1 = 0.25;
  for (double l2 : {0.1, 0.2, 0.29, 0.31, 0.5}) {
    in.lambda1 = 0.8;
    in.lambda2 = l2;
    const PenaltyConditions pc = penalty_conditions(in, 0.0, 0.7, g1, ErrorTerms{}, pair);
    EXPECT_TRUE(pc.c1);
    EXPECT_TRUE(pc.c2);
    EXPECT_EQ(pc.c3, l2 >= in.c * g1 * in.lambda1);
  }
}

TEST(PenaltyConditions, MonotoneInC) {
  std::mt19937_64 gen(93);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ProjectorPair pair = projector_pair(PairKind::Single, 8, 8);
  for (int t = 0; t < 200; ++t) {
    BoundInputs in;
    in.lambda1 = u(gen) * 3;
    in.lambda2 = u(gen) * 3;
    const double a = 0.3 * u(gen), b = 0.3 * u(gen), g1 = 0.2 * u(gen);
    const ErrorTerms eps{0.1 * u(gen), 0.1 * u(gen), 0.1 * u(gen), 0.1 * u(gen)};
    PenaltyConditions prev{true, true, true};
    for (double c = 1.1; c <= 10.0; c += 0.1) {
      in.c = c;
      const PenaltyConditions pc = penalty_conditions(in, a, b, g1, eps, pair);
      EXPECT_LE(pc.c2, prev.c2);
      EXPECT_LE(pc.c3, prev.c3);
      prev = pc;
    }
  }
}

TEST(PenaltyConditions, ReciprocalAlphaRatioCannotMeetSecondCondition) {
  // With lambda2 = lambda1 / alpha, c2 needs 1/(sigma_max(P) sigma_max(Q)) > c / (1 - alpha beta), which
  // is impossible once both factors have sigma_max >= 1. Only the ordering lambda2 ~ lambda1 / alpha holds.
  for (PairKind kind : {PairKind::Identity, PairKind::Single, PairKind::Double}) {
    const ProjectorPair pair = projector_pair(kind, 40, 40);
    const BoundCase bc = make_bound_case(5);
    const SmoothLowrankProjector t = smooth_lowrank_projector(bc.X0, bc.pair.P(), bc.pair.Q());
    const ErrorTerms eps = error_terms(bc.E, t, bc.pair);
    const double a = alpha(bc.Y0, 1.0), b = beta_terms(t).at(1.0);
    const double g1 = gamma_quantities(bc.X0, bc.pair).gamma1;
    for (double c : {1.01, 1.5, 3.0}) {
      BoundInputs in;
      in.c = c;
      in.lambda1 = c * std::max(a * eps.eps_inf, eps.eps_2to2);
      in.lambda2 = in.lambda1 / a;
      EXPECT_FALSE(penalty_conditions(in, a, b, g1, eps, pair).c2);
    }
  }
}

TEST(MinimalPenalties, MeetConditionsWhenFeasible) {
  int feasible = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const BoundCase bc = make_bound_case(seed);
    const SmoothLowrankProjector t = smooth_lowrank_projector(bc.X0, bc.pair.P(), bc.pair.Q());
    const double a = alpha(bc.Y0, 1.0), b = beta_terms(t).at(1.0);
    const double g1 = gamma_quantities(bc.X0, bc.pair).gamma1;
    const ErrorTerms eps = error_terms(bc.E, t, bc.pair);
    const auto pen = minimal_penalties(a, b, g1, eps, bc.pair, bc.c);
    if (!pen) continue;
    ++feasible;
    BoundInputs in;
    in.c = bc.c;
    in.lambda1 = pen->lambda1;
    in.lambda2 = pen->lambda2;
    EXPECT_TRUE(penalty_conditions(in, a, b, g1, eps, bc.pair).all());
    in.lambda1 *= 0.95;
    EXPECT_FALSE(penalty_conditions(in, a, b, g1, eps, bc.pair).c2);
  }
  EXPECT_GT(feasible, 0);
  EXPECT_FALSE(minimal_penalties(0.9, 1.0, 0.1, ErrorTerms{}, projector_pair(PairKind::Identity, 4, 4), 2.0));
}

TEST(Bounds, ZeroSparsityNoiselessReducesToDeltaTerm) {
  const ProjectorPair pair = projector_pair(PairKind::Single, 20, 20);
  BoundInputs in;
  in.r = 1;
  in.s = 0;
  in.c = 2.0;
  in.lambda1 = 0.5;
  in.lambda2 = 10.0;
  const double g1 = 0.3, g2 = 1.2;
  const DeltaQuantities d = delta_quantities(in, 0.0, 0.4, g1, g2, ErrorTerms{});
  EXPECT_NEAR(d.delta, in.lambda1 * g2 * in.lambda1 * g2, 1e-14);
  const RecoveryBounds b = recovery_bounds(in, 0.0, 0.4, g1, d, ErrorTerms{}, pair);
  EXPECT_NEAR(b.bound_Y_vec1, 2.0 * d.delta / (2.0 * 0.5 * in.lambda2), 1e-14);
  EXPECT_NEAR(b.bound_PYQ_vec1, d.delta / (in.lambda2 * 0.5), 1e-14);
}

TEST(Bounds, IdentityPairRecomputedIndependently) {
  const ProjectorPair pair = projector_pair(PairKind::Identity, 10, 10);
  BoundInputs in;
  in.r = 2;
  in.s = 3;
  in.c = 1.5;
  in.lambda1 = 1.0;
  in.lambda2 = 0.5;
  const double a = 0.2, b = 0.5, g1 = 0.1, g2 = 1.0;
  const ErrorTerms eps{0.05, 0.02, 0.02, 0.04};
  ASSERT_TRUE(penalty_conditions(in, a, b, g1, eps, pair).all());
  const DeltaQuantities d = delta_quantities(in, a, b, g1, g2, eps);
  const RecoveryBounds t = recovery_bounds(in, a, b, g1, d, eps, pair);
  const double sh = 1 - 1 / in.c;
  const double tail = 5 * 0.5 * 3 + 2 * 3 * 0.02 + 3 * 3 * 0.02 + 2 * 1.0 * std::sqrt(6.0);
  const double pyq = d.delta / (0.5 * sh) + tail;
  EXPECT_NEAR(t.bound_PYQ_vec1, pyq, 1e-12);
  EXPECT_NEAR(t.bound_Y_vec1, 2 * d.delta / (2 * sh * 0.5) + tail, 1e-12);
  EXPECT_NEAR(t.bound_X_nuclear, d.delta / (2 * sh * 1.0) + 0.04 + 2 * 1.0 * 2 + 2.0 * pyq / (1 - a * b), 1e-12);
}

TEST(Bounds, NotApplicableWhenConditionsFail) {
  const ProjectorPair pair = projector_pair(PairKind::Identity, 10, 10);
  BoundInputs in = some_inputs();
  in.lambda2 = 1e-6;
  const DeltaQuantities d = delta_quantities(in, 0.2, 0.5, 0.3, 1.0, ErrorTerms{});
  EXPECT_EQ(error_code_of([&] { recovery_bounds(in, 0.2, 0.5, 0.3, d, ErrorTerms{}, pair); }),
            Errc::BoundNotApplicable);
}

TEST(Bounds, HoldOnAdmissibleSyntheticCases) {
  int admissible = 0;
  for (std::uint64_t seed = 100; seed < 103; ++seed) {
    const BoundCheck chk = check_bound_case(make_bound_case(seed));
    if (!chk.admissible) continue;
    ++admissible;
    EXPECT_LE(chk.measured, chk.bound) << chk.describe();
  }
  EXPECT_GT(admissible, 0);
}

TEST(Diagnose, ReportIsConsistent) {
  const BoundCase bc = make_bound_case(7);
  DiagnoseOptions opt;
  opt.lambda1 = 0.5;
  opt.lambda2 = 0.5;
  const DiagnosticsReport r = diagnose(bc.X0, bc.Y0, bc.E, bc.pair, opt);
  EXPECT_EQ(r.r, 1);
  EXPECT_EQ(r.s, 4);
  EXPECT_EQ(r.rho, r.margin_rho);
  EXPECT_NEAR(r.alpha * r.beta, r.identifiability_margin, 1e-12);
  EXPECT_GE(r.alpha, 0.0);
  EXPECT_GE(r.beta, 0.0);
  EXPECT_TRUE(r.delta_defined);

  opt.rho = 2.0;
  const DiagnosticsReport q = diagnose(bc.X0, bc.Y0, bc.E, bc.pair, opt);
  EXPECT_EQ(q.rho, 2.0);
  EXPECT_DOUBLE_EQ(q.alpha, alpha(bc.Y0, 2.0));

  opt.lambda1 = 0.0;
  EXPECT_EQ(error_code_of([&] { diagnose(bc.X0, bc.Y0, bc.E, bc.pair, opt); }), Errc::InvalidParameter);
}

TEST(Diagnose, Serialisation) {
  const BoundCase bc = make_bound_case(8);
  DiagnoseOptions opt;
  opt.lambda1 = 1e-6;
  opt.lambda2 = 1e-6;
  const DiagnosticsReport r = diagnose(bc.X0, bc.Y0, bc.E, bc.pair, opt);
  EXPECT_FALSE(r.bounds_defined);
  const std::string kv = to_key_value(r);
  const auto parsed = parse_key_values(kv);
  EXPECT_EQ(parsed.at("bound_Y_vec1"), "nan");
  EXPECT_EQ(parsed.at("s"), "4");
  EXPECT_EQ(parse_double(parsed.at("alpha")), r.alpha);
  EXPECT_EQ(parse_double(parsed.at("gamma1")), r.gamma1);

  const std::string header = csv_header(r);
  const std::string row = to_csv_row(r);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
  EXPECT_EQ(std::count(kv.begin(), kv.end(), '\n'), std::count(header.begin(), header.end(), ',') + 1);
  EXPECT_EQ(header.rfind("r,s,c,", 0), 0u);
}
