#pragma once

/// @file
/// Polynomial optimal control problems and their canonical rescaling onto
/// s in [0, 1], x in [-1, 1]^n, u in [-1, 1]^m.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ocplmi/polyalg.hpp"

namespace ocplmi {

struct Interval {
  double lo{0.0};
  double hi{0.0};
  double center() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }
};

enum class VariableGroup { kState, kControl };

/// {v : g_j(v) >= 0 for all j}. The polynomials live on the problem's full
/// (t | x | u) block but may only use the variables of `group`.
/// The box is a user-supplied bound used for rescaling; it is not imposed as
/// a constraint unless it is also listed among the inequalities.
struct SemialgebraicSet {
  VariableGroup group{VariableGroup::kState};
  std::vector<Polynomial> inequalities;
  std::vector<Interval> box;

  int dimension() const { return static_cast<int>(box.size()); }
  /// Largest inequality degree (0 if there are none).
  int max_degree() const;
  /// Checks every inequality at `point` (group coordinates) with slack tol.
  bool Contains(const Eigen::Ref<const Eigen::VectorXd>& point,
                double tol = 0.0) const;
};

struct FixedHorizon {
  double T{1.0};
};
struct FreeHorizon {
  double T0{1.0};
};
/// Free final time for dynamics and running cost that do not depend on t.
struct FreeHomogeneous {
  double T0{1.0};
};
using TimeMode = std::variant<FixedHorizon, FreeHorizon, FreeHomogeneous>;

double TimeScale(const TimeMode& mode);
std::string TimeModeName(const TimeMode& mode);

/// Terminal set: either an exact point or a semialgebraic set.
struct TargetSet {
  std::optional<Eigen::VectorXd> point;
  SemialgebraicSet set{VariableGroup::kState, {}, {}};

  bool is_point() const { return point.has_value(); }
};

/// Polynomial optimal control problem
///   min  int_0^T h(t, x, u) dt + H(x(T))
///   s.t. dx/dt = f(t, x, u),  x(t) in X,  u(t) in U,  x(T) in K,  x(0) = x0.
/// Every polynomial lives on `block`, which always carries a time variable.
struct OcpProblem {
  VariableBlock block;
  std::vector<Polynomial> f;
  Polynomial h;
  Polynomial H;
  SemialgebraicSet X{VariableGroup::kState, {}, {}};
  SemialgebraicSet U{VariableGroup::kControl, {}, {}};
  TargetSet K;
  Eigen::VectorXd x0;
  TimeMode time{FreeHomogeneous{1.0}};
  bool add_ball_constraint{false};
  /// Set by Canonicalize.
  bool canonical{false};

  int n() const { return block.n(); }
  int m() const { return block.m(); }
  bool is_homogeneous() const {
    return std::holds_alternative<FreeHomogeneous>(time);
  }

  /// Throws std::invalid_argument describing the first violated invariant.
  void Validate() const;
};

/// Maps between original and canonical coordinates:
///   x = state_center + state_half_width .* x~,
///   u = control_center + control_half_width .* u~,
///   t = time_scale * s.
struct ScalingRecord {
  Eigen::VectorXd state_center;
  Eigen::VectorXd state_half_width;
  Eigen::VectorXd control_center;
  Eigen::VectorXd control_half_width;
  double time_scale{1.0};
  /// Factor multiplying the running cost (the Jacobian of t = T_ref s).
  double objective_scale{1.0};

  static ScalingRecord Identity(int n, int m);

  Eigen::VectorXd StateToCanonical(const Eigen::VectorXd& x) const;
  Eigen::VectorXd StateFromCanonical(const Eigen::VectorXd& xc) const;
  Eigen::VectorXd ControlToCanonical(const Eigen::VectorXd& u) const;
  Eigen::VectorXd ControlFromCanonical(const Eigen::VectorXd& uc) const;

  /// Original -> canonical substitution maps for a (t | x | u) block
  /// (variables of groups the block lacks are skipped).
  std::vector<AffineMap> ForwardMaps(const VariableBlock& block) const;
  /// Canonical -> original maps, i.e. x~ = (x - c) / w and s = t / T_ref.
  std::vector<AffineMap> InverseMaps(const VariableBlock& block) const;
};

struct CanonicalProblem {
  OcpProblem problem;
  ScalingRecord scaling;
};

/// Rescales the problem onto the unit horizon and unit boxes. Dynamics become
/// T_ref W^-1 f, the running cost becomes T_ref h, and every constraint is
/// composed with the same affine maps. With add_ball_constraint set, the
/// redundant inequalities n - |x~|^2 >= 0 and m - |u~|^2 >= 0 are appended.
CanonicalProblem Canonicalize(const OcpProblem& problem);

struct PutinarReport {
  bool certified{false};
  bool recommend_ball{false};
  std::string reason;
};

/// Cheap sufficient test for the Archimedean (Putinar) condition: a single
/// inequality with negative definite quadratic leading form, or linear
/// inequalities that pair up into bounded slabs spanning every direction.
PutinarReport PutinarPrecheck(const SemialgebraicSet& set,
                              const VariableBlock& block);

struct DegreeProfile {
  int deg_f{0};
  int deg_h{0};
  int deg_H{0};
  /// Largest constraint degree over X, K and U.
  int set_degree{0};
  /// Smallest r with 2r >= max(deg f, deg h, deg H, 2 * set_degree).
  int r0{1};
  /// Smallest order at which every moment and localizing matrix of the
  /// relaxation is defined: 2r >= max(deg f, deg h, deg H) and
  /// r >= ceil(deg g / 2) for every constraint g.
  int r_min{1};
};

DegreeProfile ComputeDegreeProfile(const OcpProblem& problem);

}  // namespace ocplmi
