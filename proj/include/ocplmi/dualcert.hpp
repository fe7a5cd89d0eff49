#pragma once

/// @file
/// Value-function polynomials rebuilt from the equality multipliers of a
/// solved relaxation, and sampled checks of what they certify.
///
/// With multipliers w_g on the rows L_y(g_T) - L_z(A g) = g(0, x0), the
/// polynomial Lambda = sum_g w_g g + kappa satisfies h + A Lambda >= 0 on the
/// support of the occupation measure and H - Lambda >= 0 on the target, and
/// Lambda(0, x0) equals the dual objective.

#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ocplmi/problem.hpp"
#include "ocplmi/relaxation.hpp"
#include "ocplmi/sdpbackend.hpp"

namespace ocplmi {

struct ValueCertificate {
  int order{0};
  /// True when lambda is a polynomial in x only.
  bool homogeneous{false};
  /// Over (t | x) or (x), in original units of time and state.
  Polynomial lambda;
  ScalingRecord scaling;
  /// lambda(0, x0), equal to the dual objective of the solve.
  double dual_value{0.0};
  Eigen::VectorXd x0;

  /// lambda(t, x); t is ignored for homogeneous certificates.
  double Evaluate(double t, const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// lambda(0, x).
  double Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return Evaluate(0.0, x);
  }
};

/// Throws std::invalid_argument unless the outcome is a LowerBound with
/// equality multipliers that match the relaxation's rows.
ValueCertificate ExtractValuePolynomial(const SolveOutcome& outcome,
                                        const RelaxationSdp& sdp);

/// Exact value at a state; NaN where it is undefined.
using ValueOracle = std::function<double(const Eigen::VectorXd&)>;

struct ValueGapRow {
  Eigen::VectorXd x;
  double lambda{0.0};
  double oracle{0.0};
  /// lambda - oracle; NaN where the oracle is undefined.
  double gap{0.0};
};

std::vector<ValueGapRow> ValueGapGrid(const ValueCertificate& cert,
                                      const ValueOracle& oracle,
                                      const std::vector<Eigen::VectorXd>& grid);

/// Header x-names..., lambda, oracle, gap. Values use 17 significant digits
/// and "nan" for undefined entries.
void WriteValueGapCsv(const std::vector<ValueGapRow>& rows,
                      const std::vector<std::string>& state_names,
                      std::ostream& out);

/// Points of a tensor grid, first coordinate varying slowest. An axis with
/// one point uses the interval's lower end.
std::vector<Eigen::VectorXd> RegularGrid(const std::vector<Interval>& axes,
                                         const std::vector<int>& counts);

/// A point (t, x, u) of the running-constraint set.
struct RunningSample {
  double t{0.0};
  Eigen::VectorXd x;
  Eigen::VectorXd u;
};

/// Whether (t, x, u) lies in [0, T] x X x U (T from the time mode).
bool IsAdmissible(const OcpProblem& problem, const RunningSample& sample,
                  double tol = 0.0);

/// Rejection sampling over the rescaling boxes. Throws std::runtime_error if
/// fewer than `count` points are accepted within 1000 * count draws.
std::vector<RunningSample> SampleRunningSet(const OcpProblem& problem,
                                            int count, std::mt19937_64& rng);

/// Rejection sampling of the target (the point itself for a point target).
std::vector<Eigen::VectorXd> SampleTarget(const OcpProblem& problem, int count,
                                          std::mt19937_64& rng);

struct DualResidualReport {
  /// min of h + A lambda over the accepted running samples.
  double min_running{0.0};
  /// min of H - lambda(T, .) over the target samples.
  double min_terminal{0.0};
  int accepted{0};
  /// Running samples outside [0, T] x X x U, left out of the minimum.
  int rejected{0};
};

/// Sampled check of the dual constraints; both minima should be >= -tol.
/// Terminal samples are taken at t = T for a fixed horizon and at t = 0, T/2
/// and T for a free one. Empty sample sets leave the minimum at +infinity.
DualResidualReport PutinarResidualCheck(
    const ValueCertificate& cert, const OcpProblem& problem,
    const std::vector<RunningSample>& running,
    const std::vector<Eigen::VectorXd>& terminal);

}  // namespace ocplmi
