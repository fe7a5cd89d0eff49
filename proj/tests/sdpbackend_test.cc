#include "ocplmi/sdpbackend.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ocplmi/benchmarks.hpp"

namespace ocplmi {
namespace {

LinearForm Affine(std::vector<std::pair<int, double>> terms, double c = 0.0) {
  LinearForm f;
  f.constant = c;
  f.terms = std::move(terms);
  f.Normalize();
  return f;
}

// [[a, b], [b, d]] with affine entries.
SymbolicMatrix TwoByTwo(LinearForm a, LinearForm b, LinearForm d) {
  SymbolicMatrix m(2);
  m.mutable_entry(0, 0) = std::move(a);
  m.mutable_entry(0, 1) = std::move(b);
  m.mutable_entry(1, 1) = std::move(d);
  return m;
}

ConicProblem NoEqualities(int n) {
  ConicProblem p;
  p.num_vars = n;
  p.c = Eigen::VectorXd::Zero(n);
  p.E = Eigen::MatrixXd::Zero(0, n);
  p.e = Eigen::VectorXd::Zero(0);
  return p;
}

double MinEigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

// Random instance with strictly feasible primal (S = I at x0) and dual
// (X = I, w0), so both optima are attained and equal.
ConicProblem RandomStrictlyFeasible(std::mt19937& rng, int n_vars, int side,
                                    int n_eq) {
  std::normal_distribution<double> g;
  std::vector<Eigen::MatrixXd> A(n_vars);
  for (auto& a : A) {
    a = Eigen::MatrixXd::NullaryExpr(side, side, [&]() { return g(rng); });
    a = (0.5 * (a + a.transpose())).eval();
  }
  const Eigen::VectorXd x0 =
      Eigen::VectorXd::NullaryExpr(n_vars, [&]() { return g(rng); });
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(side, side);
  for (int k = 0; k < n_vars; ++k) C -= x0[k] * A[k];
  ConicProblem p = NoEqualities(n_vars);
  p.E = Eigen::MatrixXd::NullaryExpr(n_eq, n_vars, [&]() { return g(rng); });
  p.e = p.E * x0;
  const Eigen::VectorXd w0 =
      Eigen::VectorXd::NullaryExpr(n_eq, [&]() { return g(rng); });
  for (int k = 0; k < n_vars; ++k) {
    p.c[k] = A[k].trace() + p.E.col(k).dot(w0);
  }
  SymbolicMatrix m(side);
  for (int i = 0; i < side; ++i) {
    for (int j = i; j < side; ++j) {
      LinearForm& f = m.mutable_entry(i, j);
      f.constant = C(i, j);
      for (int k = 0; k < n_vars; ++k) f.terms.emplace_back(k, A[k](i, j));
      f.Normalize();
    }
  }
  p.blocks.push_back(m);
  return p;
}

TEST(SolveConicTest, TwoByTwoMinimum) {
  // min x  s.t. [[1, x], [x, 1]] psd  ->  x = -1.
  ConicProblem p = NoEqualities(1);
  p.c[0] = 1.0;
  p.blocks.push_back(
      TwoByTwo(Affine({}, 1.0), Affine({{0, 1.0}}), Affine({}, 1.0)));
  const ConicSolution sol = SolveConic(p);
  ASSERT_EQ(sol.status, ConicStatus::kOptimal);
  EXPECT_NEAR(sol.primal_objective, -1.0, 1e-7);
  EXPECT_NEAR(sol.dual_objective, -1.0, 1e-7);
  EXPECT_NEAR(sol.x[0], -1.0, 1e-4);
}

TEST(SolveConicTest, EqualityConstrained) {
  // min x1 + x2  s.t. x1 = x2, [[x1, 1], [1, x2]] psd  ->  x1 = x2 = 1.
  ConicProblem p = NoEqualities(2);
  p.c << 1.0, 1.0;
  p.E = Eigen::MatrixXd(1, 2);
  p.E << 1.0, -1.0;
  p.e = Eigen::VectorXd::Zero(1);
  p.blocks.push_back(
      TwoByTwo(Affine({{0, 1.0}}), Affine({}, 1.0), Affine({{1, 1.0}})));
  const ConicSolution sol = SolveConic(p);
  ASSERT_EQ(sol.status, ConicStatus::kOptimal);
  EXPECT_NEAR(sol.primal_objective, 2.0, 1e-7);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-4);
  EXPECT_NEAR(sol.x[1], 1.0, 1e-4);
  ASSERT_EQ(sol.w.size(), 1);
  // Stationarity: c = A^*(X) + E^T w.
  EXPECT_NEAR(sol.X[0](0, 0) + sol.w[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.X[0](1, 1) - sol.w[0], 1.0, 1e-6);
}

TEST(SolveConicTest, DependentEqualityRowsAreDropped) {
  ConicProblem p = NoEqualities(2);
  p.c << 1.0, 1.0;
  p.E = Eigen::MatrixXd(3, 2);
  p.E << 1.0, -1.0, 2.0, -2.0, -1.0, 1.0;
  p.e = Eigen::VectorXd::Zero(3);
  p.blocks.push_back(
      TwoByTwo(Affine({{0, 1.0}}), Affine({}, 1.0), Affine({{1, 1.0}})));
  const ConicSolution sol = SolveConic(p);
  ASSERT_EQ(sol.status, ConicStatus::kOptimal);
  EXPECT_NEAR(sol.primal_objective, 2.0, 1e-7);
  ASSERT_EQ(sol.w.size(), 3);
  // The multipliers still satisfy stationarity on the original rows.
  const Eigen::VectorXd etw = p.E.transpose() * sol.w;
  EXPECT_NEAR(sol.X[0](0, 0) + etw[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.X[0](1, 1) + etw[1], 1.0, 1e-6);
}

TEST(SolveConicTest, InconsistentEqualities) {
  ConicProblem p = NoEqualities(1);
  p.E = Eigen::MatrixXd(2, 1);
  p.E << 1.0, 1.0;
  p.e = Eigen::Vector2d(0.0, 1.0);
  SymbolicMatrix m(1);
  m.mutable_entry(0, 0) = Affine({{0, 1.0}}, 1.0);
  p.blocks.push_back(m);
  const ConicSolution sol = SolveConic(p);
  EXPECT_EQ(sol.status, ConicStatus::kInconsistentEqualities);
  EXPECT_NEAR(sol.equality_inconsistency, 0.5, 1e-9);
}

TEST(SolveConicTest, InfeasibleBlockAndMargin) {
  // [[x, 1], [1, -x]] has determinant -x^2 - 1 < 0 for every x; the
  // smallest shift making it psd is 1.
  ConicProblem p = NoEqualities(1);
  p.blocks.push_back(
      TwoByTwo(Affine({{0, 1.0}}), Affine({}, 1.0), Affine({{0, -1.0}})));
  const ConicSolution sol = SolveConic(p);
  EXPECT_NE(sol.status, ConicStatus::kOptimal);
  EXPECT_NEAR(InfeasibilityMargin(p), 1.0, 1e-6);
}

TEST(SolveConicTest, FeasibleProblemHasNonPositiveMargin) {
  ConicProblem p = NoEqualities(1);
  p.c[0] = 1.0;
  p.blocks.push_back(
      TwoByTwo(Affine({}, 1.0), Affine({{0, 1.0}}), Affine({}, 1.0)));
  EXPECT_LT(InfeasibilityMargin(p), 0.0);
}

TEST(SolveConicTest, UnboundedObjective) {
  // min -x  s.t. x >= 0.
  ConicProblem p = NoEqualities(1);
  p.c[0] = -1.0;
  SymbolicMatrix m(1);
  m.mutable_entry(0, 0) = Affine({{0, 1.0}});
  p.blocks.push_back(m);
  EXPECT_EQ(SolveConic(p).status, ConicStatus::kSuspectUnbounded);
}

TEST(SolveConicTest, DimensionMismatchThrows) {
  ConicProblem p = NoEqualities(2);
  p.c = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(SolveConic(p), std::invalid_argument);
}

TEST(SolveConicTest, RandomStrictlyFeasiblePairsConverge) {
  std::mt19937 rng(20240611);
  for (int trial = 0; trial < 10; ++trial) {
    const ConicProblem p = RandomStrictlyFeasible(rng, 20, 8, 4);
    const ConicSolution sol = SolveConic(p);
    ASSERT_EQ(sol.status, ConicStatus::kOptimal) << "trial " << trial;
    const double scale = 1.0 + std::abs(sol.primal_objective);
    EXPECT_NEAR(sol.primal_objective, sol.dual_objective, 1e-7 * scale);
    // Complementarity and cone membership of the returned pair.
    EXPECT_GE(MinEigenvalue(sol.X[0]), -1e-9);
    EXPECT_GE(MinEigenvalue(sol.S[0]), -1e-9);
    EXPECT_LT((sol.X[0] * sol.S[0]).trace(), 1e-7 * scale);
    EXPECT_LT((p.E * sol.x - p.e).norm(), 1e-8 * (1.0 + p.e.norm()));
  }
}

TEST(SolveConicTest, RandomInstancesAreDeterministic) {
  std::mt19937 rng(7);
  const ConicProblem p = RandomStrictlyFeasible(rng, 15, 6, 3);
  const ConicSolution a = SolveConic(p);
  const ConicSolution b = SolveConic(p);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.primal_objective, b.primal_objective);
  EXPECT_EQ(a.x, b.x);
}

TEST(ToConicTest, CopiesObjectiveRowsAndBlocks) {
  const RelaxationSdp sdp = BuildRelaxation(
      Canonicalize(DoubleIntegratorProblem(Eigen::Vector2d(1.0, 0.0))), 1);
  const ConicProblem p = ToConic(sdp);
  EXPECT_EQ(p.num_vars, sdp.decision_length);
  EXPECT_EQ(p.E.rows(), static_cast<int>(sdp.equalities.size()));
  EXPECT_EQ(p.blocks.size(), sdp.blocks.size());
  const Eigen::VectorXd v =
      Eigen::VectorXd::LinSpaced(sdp.decision_length, -1.0, 2.0);
  for (std::size_t i = 0; i < sdp.equalities.size(); ++i) {
    const EqualityRow& row = sdp.equalities[i];
    EXPECT_NEAR(p.E.row(i).dot(v) - p.e[i], row.form.Evaluate(v) - row.rhs,
                1e-12);
  }
  EXPECT_NEAR(p.c.dot(v) + p.c0, sdp.objective.Evaluate(v), 1e-12);
}

// Moments of a LowerBound solve must satisfy the relaxation.
void ExpectFeasibleMoments(const RelaxationSdp& sdp, const SolveOutcome& out) {
  ASSERT_EQ(out.moments.size(), sdp.decision_length);
  for (const auto& row : sdp.equalities) {
    EXPECT_LE(std::abs(row.form.Evaluate(out.moments) - row.rhs),
              1e-6 * (1.0 + std::abs(row.rhs)));
  }
  for (const auto& b : sdp.blocks) {
    EXPECT_GE(MinEigenvalue(EvaluateSymbolic(b.matrix, out.moments)), -1e-6)
        << b.label;
  }
}

TEST(SolveTest, StartAtTargetGivesZero) {
  const OcpProblem p = DoubleIntegratorProblem(Eigen::Vector2d::Zero(), true);
  const CanonicalProblem cp = Canonicalize(p);
  for (int r = 1; r <= 3; ++r) {
    const RelaxationSdp sdp = BuildRelaxation(cp, r);
    const SolveOutcome out = Solve(sdp);
    ASSERT_EQ(out.status, SolveStatus::kLowerBound) << "r=" << r;
    EXPECT_NEAR(out.bound, 0.0, 1e-6);
    ExpectFeasibleMoments(sdp, out);
  }
}

TEST(SolveTest, LowerBoundCarriesMomentsDualsAndDiagnostics) {
  const OcpProblem p = DoubleIntegratorProblem(Eigen::Vector2d(1.0, 0.0), true);
  const RelaxationSdp sdp = BuildRelaxation(Canonicalize(p), 2);
  const SolverSettings settings;
  const SolveOutcome out = Solve(sdp, settings);
  ASSERT_EQ(out.status, SolveStatus::kLowerBound);
  EXPECT_EQ(out.order, 2);
  EXPECT_TRUE(out.has_duals);
  EXPECT_EQ(out.equality_duals.size(),
            static_cast<int>(sdp.equalities.size()));
  EXPECT_EQ(out.y.size(), sdp.y_length());
  EXPECT_EQ(out.z.size(), sdp.z_length());
  EXPECT_LE(out.diagnostics.primal_residual, settings.feasibility_tolerance);
  EXPECT_LE(out.diagnostics.dual_residual, settings.feasibility_tolerance);
  EXPECT_LE(out.diagnostics.gap, settings.gap_tolerance);
  EXPECT_GT(out.diagnostics.iterations, 0);
  ExpectFeasibleMoments(sdp, out);
  // Weak duality, and the dual constant reproduces the dual objective.
  EXPECT_LE(out.dual_objective, out.bound + 1e-5 * (1.0 + std::abs(out.bound)));
  double wr = 0.0;
  for (std::size_t i = 0; i < sdp.equalities.size(); ++i) {
    wr += out.equality_duals[i] * sdp.equalities[i].rhs;
  }
  EXPECT_NEAR(out.dual_constant + wr, out.dual_objective, 1e-9);
}

TEST(SolveTest, ZermeloDriftDominanceGivesCertificate) {
  const OcpProblem p = ZermeloProblem(Eigen::Vector2d(1.0, 0.0));
  const SolveOutcome out = Solve(BuildRelaxation(Canonicalize(p), 1));
  ASSERT_EQ(out.status, SolveStatus::kInfeasibleCertificate);
  EXPECT_GE(out.diagnostics.infeasibility_margin, 1e-6);
  EXPECT_EQ(ClassifyCertificate(out), Verdict::kProvablyUnreachable);
}

TEST(SolveTest, ZermeloReachablePointGivesBound) {
  const OcpProblem p = ZermeloProblem(Eigen::Vector2d(-2.0, 0.0));
  const SolveOutcome out = Solve(BuildRelaxation(Canonicalize(p), 1));
  ASSERT_EQ(out.status, SolveStatus::kLowerBound);
  EXPECT_GT(out.bound, 0.0);
  // Crossing 1.56 units at speed at most 1.44 takes at least 1.56/1.44.
  EXPECT_LE(out.bound, 1.56 / 1.44 + 1e-6);
  EXPECT_EQ(ClassifyCertificate(out), Verdict::kBoundOnly);
}

TEST(SolveTest, CertificateThresholdIsRespected) {
  // Raising the threshold above any attainable margin turns the
  // certificate into Inaccurate, never into a bound.
  const OcpProblem p = ZermeloProblem(Eigen::Vector2d(1.0, 0.0));
  SolverSettings s;
  s.certificate_threshold = 10.0;
  const SolveOutcome out = Solve(BuildRelaxation(Canonicalize(p), 1), s);
  EXPECT_EQ(out.status, SolveStatus::kInaccurate);
  EXPECT_EQ(ClassifyCertificate(out), Verdict::kUnknown);
}

TEST(SolveTest, IterationLimitYieldsInaccurate) {
  const OcpProblem p = DoubleIntegratorProblem(Eigen::Vector2d(1.0, 0.0), true);
  SolverSettings s;
  s.max_iterations = 3;
  const SolveOutcome out = Solve(BuildRelaxation(Canonicalize(p), 2), s);
  EXPECT_EQ(out.status, SolveStatus::kInaccurate);
  EXPECT_EQ(ClassifyCertificate(out), Verdict::kUnknown);
}

TEST(SolveTest, RepeatedSolvesAgree) {
  const OcpProblem p = DoubleIntegratorProblem(Eigen::Vector2d(-1.0, 1.0), true);
  const RelaxationSdp sdp = BuildRelaxation(Canonicalize(p), 2);
  const SolveOutcome a = Solve(sdp);
  const SolveOutcome b = Solve(sdp);
  ASSERT_EQ(a.status, SolveStatus::kLowerBound);
  EXPECT_NEAR(a.bound, b.bound, 1e-9);
}

TEST(ClassifyCertificateTest, Mapping) {
  SolveOutcome o;
  o.status = SolveStatus::kInfeasibleCertificate;
  EXPECT_EQ(ClassifyCertificate(o), Verdict::kProvablyUnreachable);
  o.status = SolveStatus::kLowerBound;
  o.bound = 2.1;
  EXPECT_EQ(ClassifyCertificate(o), Verdict::kBoundOnly);
  o.status = SolveStatus::kInaccurate;
  EXPECT_EQ(ClassifyCertificate(o), Verdict::kUnknown);
  o.status = SolveStatus::kUnbounded;
  EXPECT_EQ(ClassifyCertificate(o), Verdict::kUnknown);
}

TEST(RunHierarchyTest, BoundsAreNondecreasingAndInOriginalUnits) {
  const OcpProblem p = DoubleIntegratorProblem(Eigen::Vector2d(1.0, 0.0), true);
  const auto outs = RunHierarchy(p, 1, 3);
  ASSERT_EQ(outs.size(), 3u);
  for (std::size_t i = 0; i < outs.size(); ++i) {
    ASSERT_EQ(outs[i].status, SolveStatus::kLowerBound);
    EXPECT_EQ(outs[i].order, static_cast<int>(i) + 1);
    // The oracle minimum time from (1, 0) is 2.
    EXPECT_LE(outs[i].bound, 2.0 + 1e-6);
    if (i > 0) {
      EXPECT_GE(outs[i].bound,
                outs[i - 1].bound - 1e-5 * (1.0 + std::abs(outs[i].bound)));
    }
  }
  EXPECT_GT(outs[2].bound, outs[0].bound);
}

TEST(RunHierarchyTest, InitialStateInTargetGivesZeroBounds) {
  const OcpProblem p = ZermeloProblem(Eigen::Vector2d(0.1, -0.2), true);
  for (const auto& o : RunHierarchy(p, 1, 2)) {
    ASSERT_EQ(o.status, SolveStatus::kLowerBound);
    EXPECT_NEAR(o.bound, 0.0, 1e-6);
  }
}

TEST(RunHierarchyTest, CertificateShortCircuits) {
  const OcpProblem p = ZermeloProblem(Eigen::Vector2d(1.5, 1.0));
  const auto outs = RunHierarchy(p, 1, 3);
  ASSERT_EQ(outs.size(), 1u);
  EXPECT_EQ(outs[0].status, SolveStatus::kInfeasibleCertificate);
}

TEST(RunHierarchyTest, EmptyRangeThrows) {
  const OcpProblem p = DoubleIntegratorProblem(Eigen::Vector2d(1.0, 0.0));
  EXPECT_THROW(RunHierarchy(p, 3, 2), std::invalid_argument);
}

TEST(RunHierarchyTest, ReachablePointsAreNeverCertifiedUnreachable) {
  // Each start below is steered to the target by an explicit control, so a
  // certificate would be a false claim.
  const std::vector<Eigen::Vector2d> di = {
      {1.0, 0.0}, {-1.0, 1.0}, {0.0, -1.0}, {2.0, 2.0}, {-2.5, 0.5}};
  for (const auto& x0 : di) {
    for (const auto& o : RunHierarchy(DoubleIntegratorProblem(x0, true), 1, 2)) {
      EXPECT_NE(o.status, SolveStatus::kInfeasibleCertificate) << x0.transpose();
    }
  }
  const std::vector<Eigen::Vector3d> brockett = {
      {0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}, {1.0, -1.0, 0.5}};
  for (const auto& x0 : brockett) {
    for (const auto& o : RunHierarchy(BrockettProblem(x0, true), 1, 2)) {
      EXPECT_NE(o.status, SolveStatus::kInfeasibleCertificate) << x0.transpose();
    }
  }
  // Zermelo: with u = 0 the line x2 = 0 drifts into the target disc. Off
  // the line, u = (-0.44, -0.44 sign(x2)) first returns x2 to 0 while x1
  // advances by at most 0.71 |x2| / 0.44, which stays left of the disc here.
  const std::vector<Eigen::Vector2d> zermelo = {
      {-2.0, 0.0}, {-5.0, 1.0}, {-4.0, -1.5}, {0.3, 0.0}};
  for (const auto& x0 : zermelo) {
    for (const auto& o : RunHierarchy(ZermeloProblem(x0), 1, 2)) {
      EXPECT_NE(o.status, SolveStatus::kInfeasibleCertificate) << x0.transpose();
    }
  }
}

}  // namespace
}  // namespace ocplmi
