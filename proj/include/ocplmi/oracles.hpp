#pragma once

/// @file
/// Exact minimum times for the built-in problems and a trajectory simulator
/// that produces the moments of occupation and terminal measures.

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "ocplmi/momentstruct.hpp"
#include "ocplmi/problem.hpp"
#include "ocplmi/relaxation.hpp"
#include "ocplmi/sdpbackend.hpp"

namespace ocplmi {

/// Branches of the double integrator time, checked in this order with
/// closed inequalities.
enum class DoubleIntegratorBranch {
  /// x1 >= 1 - x2^2/2: the optimal path rides the speed limit x2 = -1.
  kSpeedLimited,
  /// On or right of the switching curve x1 = -x2|x2|/2: brake first.
  kRightOfSwitching,
  /// Left of the switching curve: accelerate first.
  kLeftOfSwitching,
};

/// Throws std::invalid_argument when x2 < -1.
DoubleIntegratorBranch ClassifyDoubleIntegrator(const Eigen::Vector2d& x);

/// Closed form of one branch, evaluated wherever its square root is defined
/// (tiny negative radicands from rounding are clamped).
double DoubleIntegratorBranchTime(DoubleIntegratorBranch branch,
                                  const Eigen::Vector2d& x);

/// Minimum time to the origin for dx1 = x2, dx2 = u, |u| <= 1, x2 >= -1.
/// Throws std::invalid_argument when x2 < -1.
double DoubleIntegratorTime(const Eigen::Vector2d& x);

/// Solution in [0, pi) of (a - sin a cos a) / sin^2 a * (x1^2 + x2^2) = 2|x3|,
/// found by bisection down to adjacent doubles. Returns pi on the singular
/// line x1^2 + x2^2 <= 1e-12 (the limit of the equation there).
double BrockettAngle(const Eigen::Vector3d& x);

/// Left minus right side of the angle equation at `angle`.
double BrockettAngleResidual(const Eigen::Vector3d& x, double angle);

/// Minimum time between the origin and x for the Brockett integrator with
/// u1^2 + u2^2 <= 1; sqrt(2 pi |x3|) on the singular line.
double BrockettTime(const Eigen::Vector3d& x);

/// ProvablyUnreachable when x1 > 0.44: on X the drift keeps dx1/dt >= 0.36.
/// Unknown otherwise. Throws std::invalid_argument outside [-6, 2] x [-2, 2].
Verdict ZermeloUnreachable(const Eigen::Vector2d& x);

using ControlLaw =
    std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;

struct TrajectorySample {
  /// Strictly increasing from 0.
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> controls;
  Eigen::VectorXd terminal_state;
};

struct EmpiricalMoments {
  /// Terminal Dirac at (T, x(T)), over the (t | x) block.
  MomentLayout terminal_layout;
  Eigen::VectorXd y;
  /// Occupation measure on [0, T], over the (t | x | u) block.
  MomentLayout occupation_layout;
  Eigen::VectorXd z;
  double step{0.0};
  double horizon{0.0};
  /// Some grid state lies outside the bounding box of X.
  bool left_box{false};
  TrajectorySample trajectory;
};

/// Integrates dx/dt = f(t, x, law(t, x)) from problem.x0 over [0, T] with
/// classical RK4 on a uniform grid of an even number of steps no longer
/// than `step`, and accumulates every moment of degree <= max_degree with
/// composite Simpson quadrature on the same grid. Throws
/// std::invalid_argument for a non-positive step or horizon.
EmpiricalMoments SimulateOccupation(const OcpProblem& problem,
                                    const ControlLaw& law, double horizon,
                                    int max_degree, double step);

/// The relaxation's decision vector (y, z) filled from simulated moments.
/// Throws std::invalid_argument if the relaxation needs a moment of higher
/// degree than was simulated.
Eigen::VectorXd ToDecisionVector(const EmpiricalMoments& moments,
                                 const RelaxationSdp& sdp);

}  // namespace ocplmi
