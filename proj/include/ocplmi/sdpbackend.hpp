#pragma once

/// @file
/// Conic solve of moment relaxations and classification of the outcome.
///
/// The native backend is a dense primal-dual interior-point method
/// (Nesterov-Todd direction, Mehrotra predictor-corrector, infeasible start,
/// equalities eliminated through an orthonormal null-space basis) for
///   min  c.x + c0   s.t.  E x = e,  S_b = C_b + sum_k x_k A_bk  psd
/// and its dual
///   max  e.w - sum_b <C_b, X_b> + c0
///   s.t. sum_b <A_bk, X_b> + (E^T w)_k = c_k,  X_b psd.
/// Infeasibility is only claimed after a separate phase-one solve
///   min tau  s.t.  E x = e,  S_b + tau I psd,  tau >= -1
/// returns a certified optimal value above the certificate threshold.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "ocplmi/momentstruct.hpp"
#include "ocplmi/problem.hpp"
#include "ocplmi/relaxation.hpp"

namespace ocplmi {

struct SolverSettings {
  double gap_tolerance{1e-8};
  double feasibility_tolerance{1e-8};
  int max_iterations{120};
  /// Minimum phase-one value for an infeasibility certificate.
  double certificate_threshold{1e-6};
  /// Dual iterates above this norm are read as a primal infeasibility sign.
  double divergence_threshold{1e10};
  bool verbose{false};
};

/// min c.x + c0 subject to E x = e and affine PSD blocks.
struct ConicProblem {
  int num_vars{0};
  Eigen::VectorXd c;
  double c0{0.0};
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
  /// Entries are affine forms in x; constants form C_b.
  std::vector<SymbolicMatrix> blocks;
};

enum class ConicStatus {
  kOptimal,
  /// E x = e has no solution.
  kInconsistentEqualities,
  /// Dual iterates diverged.
  kSuspectInfeasible,
  /// Primal objective diverged to minus infinity.
  kSuspectUnbounded,
  kStalled,
  kMaxIterations,
};

std::string ToString(ConicStatus status);

struct ConicSolution {
  ConicStatus status{ConicStatus::kStalled};
  Eigen::VectorXd x;
  /// One multiplier per row of E (zero for rows dropped as dependent).
  Eigen::VectorXd w;
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> S;
  double primal_objective{0.0};
  double dual_objective{0.0};
  double primal_residual{0.0};
  double dual_residual{0.0};
  double gap{0.0};
  int iterations{0};
  /// Residual of the least-squares solution of E x = e.
  double equality_inconsistency{0.0};
};

ConicSolution SolveConic(const ConicProblem& problem,
                         const SolverSettings& settings = {});

/// Optimal value of min tau s.t. E x = e, S_b + tau I psd, tau >= -1.
/// Returns the dual objective of the phase-one problem, a lower bound on the
/// optimal shift whenever the returned dual point is feasible to tolerance;
/// NaN when no such point was found.
double InfeasibilityMargin(const ConicProblem& problem,
                           const SolverSettings& settings = {});

enum class SolveStatus { kLowerBound, kInfeasibleCertificate, kUnbounded, kInaccurate };

std::string ToString(SolveStatus status);

struct SolveDiagnostics {
  int iterations{0};
  double primal_residual{0.0};
  double dual_residual{0.0};
  double gap{0.0};
  double primal_objective{0.0};
  double dual_objective{0.0};
  /// Phase-one value when it was computed (NaN otherwise).
  double infeasibility_margin{0.0};
  double seconds{0.0};
  std::string message;
};

struct SolveOutcome {
  SolveStatus status{SolveStatus::kInaccurate};
  int order{0};
  /// Lower bound in original units (LowerBound only).
  double bound{0.0};
  /// Decision vector (y, z) in canonical coordinates (LowerBound only).
  Eigen::VectorXd moments;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  /// One multiplier per equality row of the relaxation.
  Eigen::VectorXd equality_duals;
  bool has_duals{false};
  /// Dual objective value; equals e.w - <C, X> + c0.
  double dual_objective{0.0};
  /// Dual objective minus sum_g w_g g(0, x0): the constant the value
  /// polynomial needs so that its value at (0, x0) is the dual objective.
  double dual_constant{0.0};
  SolveDiagnostics diagnostics;
};

/// Translates the relaxation into a conic problem.
ConicProblem ToConic(const RelaxationSdp& sdp);

SolveOutcome Solve(const RelaxationSdp& sdp,
                   const SolverSettings& settings = {});

/// Solves orders r_min..r_max. Stops after the first infeasibility
/// certificate since every higher order is then infeasible too.
std::vector<SolveOutcome> RunHierarchy(const OcpProblem& problem, int r_min,
                                       int r_max,
                                       const SolverSettings& settings = {},
                                       const RelaxationOptions& options = {});

enum class Verdict { kProvablyUnreachable, kBoundOnly, kUnknown };

std::string ToString(Verdict verdict);

Verdict ClassifyCertificate(const SolveOutcome& outcome);

}  // namespace ocplmi
