#pragma once

/// @file
/// Moment relaxation of order r for the occupation-measure formulation of a
/// canonical optimal control problem.
///
/// Decision vector v = (y, z): y holds moments of the terminal measure and z
/// moments of the occupation measure. For every test monomial g the
/// relaxation imposes
///   L_y(g_T) - L_z(A g) = g(0, x0)
/// where g_T = g(1, .) for a fixed horizon and g itself for a free one.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ocplmi/momentstruct.hpp"
#include "ocplmi/problem.hpp"

namespace ocplmi {

/// Which monomials index the rows of a localizing matrix.
enum class LocalizerScope {
  /// Only the variables the constraint acts on (x for X and K, u for U,
  /// t for the time window).
  kMarginal,
  /// Every variable of the measure.
  kFull,
};

struct RelaxationOptions {
  LocalizerScope scope{LocalizerScope::kFull};
};

/// How the terminal-measure moments enter the decision vector.
enum class TerminalMoments {
  /// Moments over x (fixed horizon, time-homogeneous) or (t, x) (free).
  kFull,
  /// Point target with a free horizon: only the time moments remain free.
  kTimeOnly,
  /// Point target with fixed horizon or time-homogeneous dynamics: the
  /// terminal measure is a known Dirac mass.
  kEliminated,
};

struct PsdBlock {
  std::string label;
  /// Entries are affine in the decision vector.
  SymbolicMatrix matrix;
};

struct EqualityRow {
  /// Exponents over the test block (t, x) or x.
  MultiIndex test_monomial;
  /// form(v) = rhs; form.constant collects eliminated terminal moments.
  LinearForm form;
  double rhs{0.0};
};

struct RelaxationSdp {
  int order{0};
  TimeMode time;
  bool homogeneous{false};
  LocalizerScope scope{LocalizerScope::kFull};
  TerminalMoments terminal{TerminalMoments::kFull};

  /// Variables of the test polynomials: (t | x) or x alone.
  VariableBlock test_block;
  MomentLayout y_layout;
  MomentLayout z_layout;
  int y_offset{0};
  int z_offset{0};
  int decision_length{0};

  std::vector<PsdBlock> blocks;
  std::vector<EqualityRow> equalities;
  /// Minimised; the constant carries eliminated terminal-cost terms.
  LinearForm objective;

  ScalingRecord scaling;
  /// Canonical initial state that produced the right-hand sides.
  Eigen::VectorXd x0;

  /// Recomputes every rhs for a new canonical initial state.
  void SetInitialState(const Eigen::VectorXd& x0_canonical);

  int y_length() const { return z_offset - y_offset; }
  int z_length() const { return z_layout.size(); }
};

/// Fixed horizon relaxation (terminal moments over x at time 1).
RelaxationSdp BuildFixedTime(const CanonicalProblem& problem, int r,
                             const RelaxationOptions& options = {});

/// Free horizon relaxation. Time-homogeneous problems use test functions of
/// x only and drop t from both measures.
RelaxationSdp BuildFreeTime(const CanonicalProblem& problem, int r,
                            const RelaxationOptions& options = {});

/// Dispatches on the time mode.
RelaxationSdp BuildRelaxation(const CanonicalProblem& problem, int r,
                              const RelaxationOptions& options = {});

/// Largest total degree of the test monomials t^p x^a (or x^a) at order r.
int TestMonomialDegree(const OcpProblem& problem, int r);

struct RelaxationSize {
  int decision_length{0};
  int y_length{0};
  int z_length{0};
  int equalities{0};
  std::vector<std::pair<std::string, int>> blocks;
};

RelaxationSize Describe(const RelaxationSdp& sdp);
std::string ToString(const RelaxationSize& size);

/// Writes the relaxation in SDPA sparse format (min c.x subject to
/// sum x_i F_i - F_0 psd). Equalities become a pair of diagonal blocks
/// a.x - b >= 0 and b - a.x >= 0. The objective constant is listed in a
/// leading comment line.
void WriteSdpa(const RelaxationSdp& sdp, std::ostream& out);

}  // namespace ocplmi
