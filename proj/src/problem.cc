#include "ocplmi/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace ocplmi {

namespace {

int CeilHalf(int d) { return (d + 1) / 2; }

// Full (t | x | u) point with the group coordinates filled in.
Eigen::VectorXd EmbedGroupPoint(const VariableBlock& block, VariableGroup group,
                                const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(block.size());
  const int count = group == VariableGroup::kState ? block.n() : block.m();
  if (v.size() != count) {
    throw std::invalid_argument("point dimension does not match the set");
  }
  for (int k = 0; k < count; ++k) {
    const int idx = group == VariableGroup::kState ? block.state_index(k)
                                                   : block.control_index(k);
    full[idx] = v[k];
  }
  return full;
}

bool UsesOnlyGroup(const Polynomial& p, VariableGroup group) {
  const VariableBlock& b = p.block();
  for (int v = 0; v < b.size(); ++v) {
    if (!p.depends_on(v)) continue;
    if (group == VariableGroup::kState && !b.is_state(v)) return false;
    if (group == VariableGroup::kControl && !b.is_control(v)) return false;
  }
  return true;
}

void ValidateBox(const std::vector<Interval>& box, const std::string& what) {
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Interval& iv = box[i];
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo <= iv.hi)) {
      throw std::invalid_argument(what + " box coordinate " +
                                  std::to_string(i + 1) +
                                  " is empty or not finite");
    }
  }
}

}  // namespace

int SemialgebraicSet::max_degree() const {
  int d = 0;
  for (const auto& g : inequalities) d = std::max(d, g.degree());
  return d;
}

bool SemialgebraicSet::Contains(const Eigen::Ref<const Eigen::VectorXd>& point,
                                double tol) const {
  for (const auto& g : inequalities) {
    const Eigen::VectorXd full = EmbedGroupPoint(g.block(), group, point);
    if (g.Evaluate(full) < -tol) return false;
  }
  return true;
}

double TimeScale(const TimeMode& mode) {
  return std::visit(
      [](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, FixedHorizon>) {
          return m.T;
        } else {
          return m.T0;
        }
      },
      mode);
}

std::string TimeModeName(const TimeMode& mode) {
  if (std::holds_alternative<FixedHorizon>(mode)) return "fixed";
  if (std::holds_alternative<FreeHorizon>(mode)) return "free";
  return "free-homogeneous";
}

void OcpProblem::Validate() const {
  if (!block.has_time()) {
    throw std::invalid_argument("problem block must carry a time variable");
  }
  if (static_cast<int>(f.size()) != n()) {
    throw std::invalid_argument("dynamics must have one component per state");
  }
  auto same_block = [&](const Polynomial& p, const std::string& what) {
    if (p.block() != block) {
      throw std::invalid_argument(what + " is not defined on the problem block");
    }
  };
  for (const auto& fk : f) same_block(fk, "dynamics");
  same_block(h, "running cost");
  same_block(H, "terminal cost");
  if (!UsesOnlyGroup(H, VariableGroup::kState)) {
    throw std::invalid_argument("terminal cost H may depend on x only");
  }
  const double scale = TimeScale(time);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("time horizon must be positive");
  }
  if (is_homogeneous()) {
    for (const auto& fk : f) {
      if (fk.depends_on(block.time_index())) {
        throw std::invalid_argument(
            "time-homogeneous mode requires dynamics independent of t");
      }
    }
    if (h.depends_on(block.time_index())) {
      throw std::invalid_argument(
          "time-homogeneous mode requires a running cost independent of t");
    }
  }
  auto check_set = [&](const SemialgebraicSet& s, int dim,
                       const std::string& what) {
    if (s.dimension() != dim) {
      throw std::invalid_argument(what + " needs a bounding box with " +
                                  std::to_string(dim) + " intervals");
    }
    ValidateBox(s.box, what);
    for (const auto& g : s.inequalities) {
      same_block(g, what + " inequality");
      if (!UsesOnlyGroup(g, s.group)) {
        throw std::invalid_argument(what + " inequality '" + ToString(g) +
                                    "' uses variables outside its group");
      }
    }
  };
  check_set(X, n(), "state set X");
  check_set(U, m(), "control set U");
  if (K.is_point()) {
    if (K.point->size() != n()) {
      throw std::invalid_argument("target point has wrong dimension");
    }
  } else {
    if (K.set.dimension() != 0) ValidateBox(K.set.box, "target set K");
    for (const auto& g : K.set.inequalities) {
      same_block(g, "target inequality");
      if (!UsesOnlyGroup(g, VariableGroup::kState)) {
        throw std::invalid_argument("target inequality '" + ToString(g) +
                                    "' may use states only");
      }
    }
  }
  if (x0.size() != n()) {
    throw std::invalid_argument("initial state has wrong dimension");
  }
  auto inside_box = [&](const Eigen::VectorXd& p) {
    for (int k = 0; k < n(); ++k) {
      if (p[k] < X.box[k].lo - 1e-12 || p[k] > X.box[k].hi + 1e-12) return false;
    }
    return true;
  };
  if (!inside_box(x0)) {
    throw std::invalid_argument("initial state lies outside the state box");
  }
  if (K.is_point() && !inside_box(*K.point)) {
    throw std::invalid_argument("target point lies outside the state box");
  }
}

// ---------------------------------------------------------------------------

ScalingRecord ScalingRecord::Identity(int n, int m) {
  ScalingRecord s;
  s.state_center = Eigen::VectorXd::Zero(n);
  s.state_half_width = Eigen::VectorXd::Ones(n);
  s.control_center = Eigen::VectorXd::Zero(m);
  s.control_half_width = Eigen::VectorXd::Ones(m);
  return s;
}

Eigen::VectorXd ScalingRecord::StateToCanonical(const Eigen::VectorXd& x) const {
  return (x - state_center).cwiseQuotient(state_half_width);
}

Eigen::VectorXd ScalingRecord::StateFromCanonical(
    const Eigen::VectorXd& xc) const {
  return state_center + state_half_width.cwiseProduct(xc);
}

Eigen::VectorXd ScalingRecord::ControlToCanonical(
    const Eigen::VectorXd& u) const {
  return (u - control_center).cwiseQuotient(control_half_width);
}

Eigen::VectorXd ScalingRecord::ControlFromCanonical(
    const Eigen::VectorXd& uc) const {
  return control_center + control_half_width.cwiseProduct(uc);
}

std::vector<AffineMap> ScalingRecord::ForwardMaps(
    const VariableBlock& block) const {
  std::vector<AffineMap> maps(block.size());
  if (block.has_time()) maps[block.time_index()] = {time_scale, 0.0};
  for (int k = 0; k < block.n(); ++k) {
    maps[block.state_index(k)] = {state_half_width[k], state_center[k]};
  }
  for (int k = 0; k < block.m(); ++k) {
    maps[block.control_index(k)] = {control_half_width[k], control_center[k]};
  }
  return maps;
}

std::vector<AffineMap> ScalingRecord::InverseMaps(
    const VariableBlock& block) const {
  std::vector<AffineMap> maps(block.size());
  if (block.has_time()) maps[block.time_index()] = {1.0 / time_scale, 0.0};
  for (int k = 0; k < block.n(); ++k) {
    maps[block.state_index(k)] = {1.0 / state_half_width[k],
                                  -state_center[k] / state_half_width[k]};
  }
  for (int k = 0; k < block.m(); ++k) {
    maps[block.control_index(k)] = {1.0 / control_half_width[k],
                                    -control_center[k] / control_half_width[k]};
  }
  return maps;
}

CanonicalProblem Canonicalize(const OcpProblem& problem) {
  problem.Validate();
  const int n = problem.n();
  const int m = problem.m();
  ScalingRecord s;
  s.state_center.resize(n);
  s.state_half_width.resize(n);
  s.control_center.resize(m);
  s.control_half_width.resize(m);
  for (int k = 0; k < n; ++k) {
    const Interval& iv = problem.X.box[k];
    if (!(iv.half_width() > 0.0)) {
      throw std::invalid_argument("state box coordinate " +
                                  std::to_string(k + 1) + " has zero width");
    }
    s.state_center[k] = iv.center();
    s.state_half_width[k] = iv.half_width();
  }
  for (int k = 0; k < m; ++k) {
    const Interval& iv = problem.U.box[k];
    if (!(iv.half_width() > 0.0)) {
      throw std::invalid_argument("control box coordinate " +
                                  std::to_string(k + 1) + " has zero width");
    }
    s.control_center[k] = iv.center();
    s.control_half_width[k] = iv.half_width();
  }
  s.time_scale = TimeScale(problem.time);
  s.objective_scale = s.time_scale;

  const VariableBlock& block = problem.block;
  const std::vector<AffineMap> maps = s.ForwardMaps(block);
  auto compose = [&](const Polynomial& p) { return AffineSubstitute(p, maps); };

  OcpProblem out;
  out.block = block;
  out.f.reserve(n);
  for (int k = 0; k < n; ++k) {
    out.f.push_back(compose(problem.f[k]) *
                    (s.time_scale / s.state_half_width[k]));
  }
  out.h = compose(problem.h) * s.time_scale;
  out.H = compose(problem.H);

  auto scale_set = [&](const SemialgebraicSet& in, int dim) {
    SemialgebraicSet r{in.group, {}, {}};
    for (const auto& g : in.inequalities) r.inequalities.push_back(compose(g));
    r.box.assign(dim, Interval{-1.0, 1.0});
    return r;
  };
  out.X = scale_set(problem.X, n);
  out.U = scale_set(problem.U, m);
  if (problem.K.is_point()) {
    out.K.point = s.StateToCanonical(*problem.K.point);
  } else {
    out.K.set.group = VariableGroup::kState;
    for (const auto& g : problem.K.set.inequalities) {
      out.K.set.inequalities.push_back(compose(g));
    }
    for (int k = 0; k < problem.K.set.dimension(); ++k) {
      const Interval& iv = problem.K.set.box[k];
      out.K.set.box.push_back(
          {(iv.lo - s.state_center[k]) / s.state_half_width[k],
           (iv.hi - s.state_center[k]) / s.state_half_width[k]});
    }
  }
  if (problem.add_ball_constraint) {
    if (n > 0) {
      Polynomial ball = Polynomial::Constant(block, n);
      for (int k = 0; k < n; ++k) {
        ball -= Polynomial::Variable(block, block.state_index(k)).Pow(2);
      }
      out.X.inequalities.push_back(ball);
    }
    if (m > 0) {
      Polynomial ball = Polynomial::Constant(block, m);
      for (int k = 0; k < m; ++k) {
        ball -= Polynomial::Variable(block, block.control_index(k)).Pow(2);
      }
      out.U.inequalities.push_back(ball);
    }
  }
  out.x0 = s.StateToCanonical(problem.x0);
  std::visit(
      [&](const auto& mode) {
        using M = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<M, FixedHorizon>) {
          out.time = FixedHorizon{1.0};
        } else if constexpr (std::is_same_v<M, FreeHorizon>) {
          out.time = FreeHorizon{1.0};
        } else {
          out.time = FreeHomogeneous{1.0};
        }
      },
      problem.time);
  out.add_ball_constraint = problem.add_ball_constraint;
  out.canonical = true;
  return {std::move(out), s};
}

// ---------------------------------------------------------------------------

PutinarReport PutinarPrecheck(const SemialgebraicSet& set,
                              const VariableBlock& block) {
  std::vector<int> vars;
  const int count =
      set.group == VariableGroup::kState ? block.n() : block.m();
  for (int k = 0; k < count; ++k) {
    vars.push_back(set.group == VariableGroup::kState ? block.state_index(k)
                                                      : block.control_index(k));
  }
  PutinarReport report;
  if (vars.empty()) {
    report.certified = true;
    report.reason = "zero-dimensional set";
    return report;
  }

  // A single inequality whose top-degree form is negative definite has a
  // compact superlevel set.
  for (std::size_t j = 0; j < set.inequalities.size(); ++j) {
    const Polynomial& g = set.inequalities[j];
    const int d = g.degree();
    if (d < 2 || d % 2 != 0) continue;
    bool certified = false;
    if (d == 2) {
      const int k = static_cast<int>(vars.size());
      Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(k, k);
      for (const auto& [mi, c] : g.terms()) {
        if (mi.degree() != 2) continue;
        std::vector<int> hit;
        for (int a = 0; a < k; ++a) {
          for (int e = 0; e < mi[vars[a]]; ++e) hit.push_back(a);
        }
        if (hit[0] == hit[1]) {
          Q(hit[0], hit[0]) += c;
        } else {
          Q(hit[0], hit[1]) += 0.5 * c;
          Q(hit[1], hit[0]) += 0.5 * c;
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
      certified = es.eigenvalues().maxCoeff() < 0.0;
    } else {
      // -sum c_i v_i^d with every c_i > 0 and no other top-degree terms.
      std::vector<bool> seen(vars.size(), false);
      bool pure = true;
      for (const auto& [mi, c] : g.terms()) {
        if (mi.degree() != d) continue;
        int which = -1;
        for (std::size_t a = 0; a < vars.size(); ++a) {
          if (mi[vars[a]] == d) which = static_cast<int>(a);
        }
        if (which < 0 || c >= 0.0) {
          pure = false;
          break;
        }
        seen[which] = true;
      }
      certified = pure && std::all_of(seen.begin(), seen.end(),
                                      [](bool b) { return b; });
    }
    if (certified) {
      report.certified = true;
      report.reason = "inequality " + std::to_string(j + 1) + " (" +
                      ToString(g) + ") alone has a compact superlevel set";
      return report;
    }
  }

  // Linear inequalities a.v + b >= 0 and -c a.v + b' >= 0 (c > 0) bound a
  // slab; slabs spanning every direction bound a polytope.
  std::vector<Eigen::VectorXd> normals;
  for (const auto& g : set.inequalities) {
    if (g.degree() != 1) continue;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<int>(vars.size()));
    for (std::size_t i = 0; i < vars.size(); ++i) {
      a[static_cast<int>(i)] =
          g.coefficient(MultiIndex::Unit(block.size(), vars[i]));
    }
    if (a.norm() > 0.0) normals.push_back(a.normalized());
  }
  std::vector<Eigen::VectorXd> slabs;
  for (std::size_t i = 0; i < normals.size(); ++i) {
    for (std::size_t j = i + 1; j < normals.size(); ++j) {
      if ((normals[i] + normals[j]).norm() < 1e-12) slabs.push_back(normals[i]);
    }
  }
  if (!slabs.empty()) {
    Eigen::MatrixXd S(static_cast<int>(vars.size()),
                      static_cast<int>(slabs.size()));
    for (std::size_t i = 0; i < slabs.size(); ++i) {
      S.col(static_cast<int>(i)) = slabs[i];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    if (lu.rank() == static_cast<int>(vars.size())) {
      report.certified = true;
      report.reason = "linear inequalities bound a polytope";
      return report;
    }
  }
  report.certified = false;
  report.recommend_ball = true;
  report.reason =
      "no inequality certifies compactness; enable the ball constraint so "
      "the convergence guarantee applies";
  return report;
}

DegreeProfile ComputeDegreeProfile(const OcpProblem& problem) {
  DegreeProfile p;
  for (const auto& fk : problem.f) p.deg_f = std::max(p.deg_f, fk.degree());
  p.deg_h = problem.h.degree();
  p.deg_H = problem.H.degree();
  p.set_degree = std::max(problem.X.max_degree(), problem.U.max_degree());
  if (!problem.K.is_point()) {
    p.set_degree = std::max(p.set_degree, problem.K.set.max_degree());
  }
  const int data_degree = std::max({p.deg_f, p.deg_h, p.deg_H});
  p.r0 = std::max(1, CeilHalf(std::max(data_degree, 2 * p.set_degree)));
  p.r_min = std::max({1, CeilHalf(data_degree), CeilHalf(p.set_degree)});
  return p;
}

}  // namespace ocplmi
