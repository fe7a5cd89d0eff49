#include "ocplmi/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ocplmi {

namespace {

constexpr double kPi = std::numbers::pi;

// a - sin a cos a, with a series near 0 where the difference cancels.
double AngleNumerator(double a) {
  if (a < 0.1) {
    // a - sin(2a)/2 = sum_k>=1 (-1)^(k+1) (2a)^(2k+1) / (2 (2k+1)!)
    const double b = 2.0 * a;
    double term = b * b * b / 12.0;
    double sum = 0.0;
    for (int k = 1; k < 12; ++k) {
      sum += term;
      term *= -b * b / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return sum;
  }
  return a - std::sin(a) * std::cos(a);
}

double AngleRatio(double a) {
  const double s = std::sin(a);
  return AngleNumerator(a) / (s * s);
}

std::vector<double> MonomialValues(const MomentLayout& layout,
                                   const Eigen::VectorXd& point) {
  const int nv = layout.block().size();
  const int d = layout.max_degree();
  Eigen::MatrixXd powers(nv, d + 1);
  for (int v = 0; v < nv; ++v) {
    powers(v, 0) = 1.0;
    for (int k = 1; k <= d; ++k) powers(v, k) = powers(v, k - 1) * point[v];
  }
  std::vector<double> out(layout.size());
  for (int i = 0; i < layout.size(); ++i) {
    const MultiIndex& m = layout.monomial(i);
    double value = 1.0;
    for (int v = 0; v < nv; ++v) value *= powers(v, m[v]);
    out[i] = value;
  }
  return out;
}

// Position in `target` of a monomial of `source_block`, padding the
// variable groups the source block lacks with zero exponents.
int LiftPosition(const MultiIndex& m, const VariableBlock& source_block,
                 const MomentLayout& target) {
  const VariableBlock& tb = target.block();
  std::vector<int> e(tb.size(), 0);
  int k = 0;
  if (source_block.has_time()) {
    if (!tb.has_time()) return -1;
    e[tb.time_index()] = m[k];
    ++k;
  }
  for (int i = 0; i < source_block.n(); ++i) e[tb.state_index(i)] = m[k++];
  for (int i = 0; i < source_block.m(); ++i) {
    if (i >= tb.m()) return -1;
    e[tb.control_index(i)] = m[k++];
  }
  return target.position(MultiIndex(std::move(e)));
}

}  // namespace

DoubleIntegratorBranch ClassifyDoubleIntegrator(const Eigen::Vector2d& x) {
  const double x1 = x[0];
  const double x2 = x[1];
  if (x2 < -1.0) {
    throw std::invalid_argument("double integrator state needs x2 >= -1");
  }
  if (x1 >= 1.0 - 0.5 * x2 * x2) return DoubleIntegratorBranch::kSpeedLimited;
  const double sign = (x2 > 0.0) - (x2 < 0.0);
  if (x1 >= -0.5 * x2 * x2 * sign) {
    return DoubleIntegratorBranch::kRightOfSwitching;
  }
  return DoubleIntegratorBranch::kLeftOfSwitching;
}

double DoubleIntegratorBranchTime(DoubleIntegratorBranch branch,
                                  const Eigen::Vector2d& x) {
  const double x1 = x[0];
  const double x2 = x[1];
  const double half_sq = 0.5 * x2 * x2;
  switch (branch) {
    case DoubleIntegratorBranch::kSpeedLimited:
      return half_sq + x1 + x2 + 1.0;
    case DoubleIntegratorBranch::kRightOfSwitching:
      return 2.0 * std::sqrt(std::max(half_sq + x1, 0.0)) + x2;
    case DoubleIntegratorBranch::kLeftOfSwitching:
      return 2.0 * std::sqrt(std::max(half_sq - x1, 0.0)) - x2;
  }
  return 0.0;
}

double DoubleIntegratorTime(const Eigen::Vector2d& x) {
  return DoubleIntegratorBranchTime(ClassifyDoubleIntegrator(x), x);
}

double BrockettAngle(const Eigen::Vector3d& x) {
  const double rho_sq = x[0] * x[0] + x[1] * x[1];
  if (rho_sq <= 1e-12) return kPi;
  const double target = 2.0 * std::abs(x[2]) / rho_sq;
  if (target == 0.0) return 0.0;
  double lo = 0.0;
  double hi = kPi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (AngleRatio(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Pick the end with the smaller residual.
  const double rlo = std::abs(AngleRatio(lo) - target);
  const double rhi = hi < kPi ? std::abs(AngleRatio(hi) - target)
                              : std::numeric_limits<double>::infinity();
  return lo > 0.0 && rlo <= rhi ? lo : hi;
}

double BrockettAngleResidual(const Eigen::Vector3d& x, double angle) {
  const double rho_sq = x[0] * x[0] + x[1] * x[1];
  const double lhs = angle == 0.0 ? 0.0 : AngleRatio(angle) * rho_sq;
  return lhs - 2.0 * std::abs(x[2]);
}

double BrockettTime(const Eigen::Vector3d& x) {
  const double rho_sq = x[0] * x[0] + x[1] * x[1];
  if (rho_sq <= 1e-12) return std::sqrt(2.0 * kPi * std::abs(x[2]));
  const double a = BrockettAngle(x);
  const double radius = std::sqrt(rho_sq + 2.0 * std::abs(x[2]));
  if (a == 0.0) return radius;
  const double s = std::sin(a);
  return a * radius / std::sqrt(s * s + AngleNumerator(a));
}

Verdict ZermeloUnreachable(const Eigen::Vector2d& x) {
  if (x[0] < -6.0 || x[0] > 2.0 || x[1] < -2.0 || x[1] > 2.0) {
    throw std::invalid_argument("Zermelo state outside [-6, 2] x [-2, 2]");
  }
  return x[0] > 0.44 ? Verdict::kProvablyUnreachable : Verdict::kUnknown;
}

EmpiricalMoments SimulateOccupation(const OcpProblem& problem,
                                    const ControlLaw& law, double horizon,
                                    int max_degree, double step) {
  if (!(step > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("simulation needs a positive step and horizon");
  }
  const int n = problem.n();
  const int m = problem.m();
  const VariableBlock full(true, n, m);
  if (problem.x0.size() != n) {
    throw std::invalid_argument("initial state dimension mismatch");
  }

  int steps = static_cast<int>(std::ceil(horizon / step - 1e-9));
  steps = std::max(2, steps + (steps % 2));
  const double h = horizon / steps;

  auto point = [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd p(1 + n + m);
    p[0] = t;
    p.segment(1, n) = x;
    p.segment(1 + n, m) = u;
    return p;
  };
  auto field = [&](double t, const Eigen::VectorXd& x) {
    const Eigen::VectorXd p = point(t, x, law(t, x));
    Eigen::VectorXd dx(n);
    for (int i = 0; i < n; ++i) dx[i] = problem.f[i].Evaluate(p);
    return dx;
  };
  auto outside = [&](const Eigen::VectorXd& x) {
    for (int i = 0; i < n && i < static_cast<int>(problem.X.box.size()); ++i) {
      if (x[i] < problem.X.box[i].lo || x[i] > problem.X.box[i].hi) return true;
    }
    return false;
  };

  EmpiricalMoments out;
  out.step = h;
  out.horizon = horizon;
  out.occupation_layout = MomentLayout(full, max_degree);
  out.terminal_layout = MomentLayout(full.Subblock(true, true, false), max_degree);
  out.z = Eigen::VectorXd::Zero(out.occupation_layout.size());

  TrajectorySample& traj = out.trajectory;
  Eigen::VectorXd x = problem.x0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * h;
    const Eigen::VectorXd u = law(t, x);
    if (u.size() != m) throw std::invalid_argument("control law dimension");
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(u);
    out.left_box = out.left_box || outside(x);

    const double weight =
        (k == 0 || k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const std::vector<double> values =
        MonomialValues(out.occupation_layout, point(t, x, u));
    for (int i = 0; i < out.occupation_layout.size(); ++i) {
      out.z[i] += weight * values[i];
    }
    if (k == steps) break;

    const Eigen::VectorXd k1 = field(t, x);
    const Eigen::VectorXd k2 = field(t + 0.5 * h, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = field(t + 0.5 * h, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = field(t + h, x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  out.z *= h / 3.0;
  // The quadrature of the constant is the horizon up to rounding; make it exact.
  out.z[out.occupation_layout.position(MultiIndex::Zero(full.size()))] = horizon;

  traj.terminal_state = x;
  Eigen::VectorXd tx(1 + n);
  tx[0] = horizon;
  tx.tail(n) = x;
  const std::vector<double> yv = MonomialValues(out.terminal_layout, tx);
  out.y = Eigen::Map<const Eigen::VectorXd>(yv.data(), yv.size());
  return out;
}

Eigen::VectorXd ToDecisionVector(const EmpiricalMoments& moments,
                                 const RelaxationSdp& sdp) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(sdp.decision_length);
  for (int i = 0; i < sdp.y_layout.size(); ++i) {
    const int pos = LiftPosition(sdp.y_layout.monomial(i),
                                 sdp.y_layout.block(), moments.terminal_layout);
    if (pos < 0) {
      throw std::invalid_argument("terminal moment missing from simulation");
    }
    v[sdp.y_offset + i] = moments.y[pos];
  }
  for (int i = 0; i < sdp.z_layout.size(); ++i) {
    const int pos = LiftPosition(sdp.z_layout.monomial(i),
                                 sdp.z_layout.block(), moments.occupation_layout);
    if (pos < 0) {
      throw std::invalid_argument("occupation moment missing from simulation");
    }
    v[sdp.z_offset + i] = moments.z[pos];
  }
  return v;
}

}  // namespace ocplmi
