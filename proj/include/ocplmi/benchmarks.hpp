#pragma once

/// @file
/// Built-in minimum-time test problems.

#include <Eigen/Core>

#include "ocplmi/problem.hpp"

namespace ocplmi {

/// dx1/dt = x2, dx2/dt = u, |u| <= 1, x2 >= -1, target the origin.
/// The state box [-3, 3] x [-1, 2] only fixes the rescaling.
OcpProblem DoubleIntegratorProblem(const Eigen::Vector2d& x0,
                                   bool add_ball_constraint = false);

/// dx/dt = (u1, u2, u1 x2 - u2 x1), u1^2 + u2^2 <= 1, X = R^3, target the
/// origin. Rescaled with the box [-3, 3]^3.
OcpProblem BrockettProblem(const Eigen::Vector3d& x0,
                           bool add_ball_constraint = false);

/// dx1/dt = 1 - 0.1 x2 + u1, dx2/dt = u2 on X = [-6, 2] x [-2, 2] with
/// |u| <= 0.44; the target is the disc of radius 0.44 about the origin.
OcpProblem ZermeloProblem(const Eigen::Vector2d& x0,
                          bool add_ball_constraint = false);

/// Radius of the Zermelo control disc and target disc.
inline constexpr double kZermeloRadius = 0.44;

}  // namespace ocplmi
