// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ocplmi/benchmarks.hpp"
#include "ocplmi/cli.hpp"
#include "ocplmi/dualcert.hpp"
#include "ocplmi/momentstruct.hpp"
#include "ocplmi/oracles.hpp"
#include "ocplmi/relaxation.hpp"
#include "ocplmi/sdpbackend.hpp"
#include "test_support.hpp"

namespace ocplmi {
namespace {

using testing_support::DirectMoments;
using testing_support::MinEigenvalue;
using testing_support::OpenTargetDoubleIntegrator;

constexpr double kPi = std::numbers::pi;

struct CriterionResult {
  bool pass{false};
  std::string detail;
};

struct SolvedInstance {
  std::string label;
  SolveOutcome outcome;
  RelaxationSdp sdp;
};

// Every solve from criteria 1-4, kept for the weak duality check.
std::vector<SolvedInstance> g_instances;

const SolveOutcome& SolveAt(const std::string& label, const OcpProblem& problem,
                            int r) {
  const CanonicalProblem cp = Canonicalize(problem);
  RelaxationSdp sdp = BuildRelaxation(cp, r);
  SolveOutcome outcome = Solve(sdp);
  g_instances.push_back({label + " r=" + std::to_string(r), std::move(outcome),
                         std::move(sdp)});
  return g_instances.back().outcome;
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

bool IsBound(const SolveOutcome& o) {
  return o.status == SolveStatus::kLowerBound;
}

CriterionResult BrockettSingularLine() {
  const double reference[] = {0.0140, 0.2012, 0.7665, 1.2554};
  const double exact = std::sqrt(2.0 * kPi);
  const OcpProblem p = BrockettProblem(Eigen::Vector3d(0.0, 0.0, 1.0), true);
  CriterionResult v{true, "bounds"};
  double previous = -INFINITY;
  for (int r = 1; r <= 4; ++r) {
    const SolveOutcome& o = SolveAt("brockett (0,0,1)", p, r);
    if (!IsBound(o)) {
      v.pass = false;
      v.detail += " r" + std::to_string(r) + "=" + ToString(o.status);
      continue;
    }
    const bool ok = std::abs(o.bound - reference[r - 1]) <= 0.05 &&
                    o.bound > previous && o.bound <= exact;
    v.pass = v.pass && ok;
    v.detail += " r" + std::to_string(r) + "=" + Fmt("%.4f", o.bound) +
                Fmt(" (ref %.4f)", reference[r - 1]);
    previous = o.bound;
  }
  return v;
}

CriterionResult BrockettCorner() {
  const Eigen::Vector3d x0(0.0, 3.0, 3.0);
  const SolveOutcome& o = SolveAt("brockett (0,3,3)", BrockettProblem(x0, true), 4);
  if (!IsBound(o)) return {false, "r4 status " + ToString(o.status)};
  const double exact = BrockettTime(x0);
  const double gap = (exact - o.bound) / exact;
  return {std::abs(o.bound - 3.4254) <= 0.05 && gap < 0.02,
          "r4=" + Fmt("%.4f", o.bound) + Fmt(" oracle=%.4f", exact) +
              Fmt(" gap=%.2f%%", 100.0 * gap)};
}

CriterionResult BrockettNearExact() {
  const SolveOutcome& o =
      SolveAt("brockett (0,1,0)", BrockettProblem(Eigen::Vector3d(0.0, 1.0, 0.0), true), 3);
  if (!IsBound(o)) return {false, "r3 status " + ToString(o.status)};
  return {std::abs(o.bound - 1.0) <= 0.01, "r3=" + Fmt("%.6f", o.bound)};
}

CriterionResult DoubleIntegratorConvergence() {
  const Eigen::Vector2d x0(1.0, 0.0);
  const double exact = DoubleIntegratorTime(x0);
  const OcpProblem p = DoubleIntegratorProblem(x0, true);
  CriterionResult v{true, Fmt("oracle=%.1f", exact)};
  double previous = -INFINITY;
  double last = 0.0;
  for (int r : {2, 3, 5}) {
    const SolveOutcome& o = SolveAt("double integrator (1,0)", p, r);
    if (!IsBound(o)) {
      v.pass = false;
      v.detail += " r" + std::to_string(r) + "=" + ToString(o.status);
      continue;
    }
    v.pass = v.pass && o.bound >= previous && o.bound <= exact + 1e-3;
    v.detail += " r" + std::to_string(r) + "=" + Fmt("%.5f", o.bound);
    previous = o.bound;
    last = o.bound;
  }
  const double ratio = last / exact;
  v.pass = v.pass && ratio >= 0.8;
  v.detail += Fmt(" ratio r5=%.3f", ratio);
  return v;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

CriterionResult ZermeloCertificates() {
  ProblemFile file;
  file.problem = ZermeloProblem(Eigen::Vector2d(-2.0, 0.0), true);
  file.r_min = 1;
  file.r_max = 1;
  SweepCommand cmd;
  cmd.r_min = 1;
  cmd.r_max = 1;
  cmd.grid = {{{-6.0, 2.0}, 41}, {{-2.0, 2.0}, 21}};
  cmd.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::stringstream csv;
  RunSweepCommand(file, cmd, csv);

  std::string line;
  std::getline(csv, line);
  int rows = 0, right = 0, right_infeasible = 0, bounds = 0, infeasible = 0;
  while (std::getline(csv, line)) {
    const std::vector<std::string> cells = SplitCsv(line);
    if (cells.size() < 4) continue;
    ++rows;
    const double x1 = std::stod(cells[0]);
    const bool is_infeasible = cells[3] == "INFEASIBLE";
    infeasible += is_infeasible;
    if (!is_infeasible && cells[3] != "INACCURATE" && cells[3] != "ERROR") ++bounds;
    if (x1 > 0.5 + 1e-9) {
      ++right;
      right_infeasible += is_infeasible;
    }
  }
  const SolveOutcome o = Solve(BuildRelaxation(Canonicalize(file.problem), 1));
  const bool point_ok = IsBound(o);
  return {rows == 41 * 21 && right > 0 && right == right_infeasible && point_ok,
          std::to_string(rows) + " points, x1>0.5 infeasible " +
              std::to_string(right_infeasible) + "/" + std::to_string(right) +
              ", " + std::to_string(bounds) + " bounds, " +
              std::to_string(infeasible) + " infeasible; (-2,0) " +
              ToString(o.status) + (point_ok ? Fmt(" %.6f", o.bound) : "")};
}

CriterionResult OccupationFeasibility() {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_residual = 0.0;
  double worst_eigenvalue = INFINITY;
  bool left_box = false;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector2d x0(2.0 * unit(rng) - 1.0, unit(rng));
    const CanonicalProblem cp = Canonicalize(OpenTargetDoubleIntegrator(x0));
    const RelaxationSdp sdp = BuildRelaxation(cp, 2);
    const double a = unit(rng);
    const double b = 1.0 - a;
    const double w = 1.0 + 5.0 * unit(rng);
    const double phase = 6.0 * unit(rng);
    const ScalingRecord& s = cp.scaling;
    const ControlLaw law = [&, a, b, w, phase](double t, const Eigen::VectorXd& xc) {
      const Eigen::VectorXd x = s.StateFromCanonical(xc);
      const double u =
          a * std::sin(w * s.time_scale * t + phase) + b * std::tanh(2.0 * x[0] - x[1]);
      return s.ControlToCanonical(Eigen::VectorXd::Constant(1, u));
    };
    const EmpiricalMoments sim =
        SimulateOccupation(cp.problem, law, 1.0, 2 * sdp.order, 1e-3);
    left_box = left_box || sim.left_box;
    const Eigen::VectorXd v = ToDecisionVector(sim, sdp);
    for (const auto& row : sdp.equalities) {
      worst_residual = std::max(worst_residual, std::abs(row.form.Evaluate(v) - row.rhs));
    }
    for (const auto& block : sdp.blocks) {
      worst_eigenvalue =
          std::min(worst_eigenvalue, MinEigenvalue(EvaluateSymbolic(block.matrix, v)));
    }
  }
  return {!left_box && worst_residual <= 1e-5 && worst_eigenvalue >= -1e-6,
          Fmt("20 laws, max residual %.2e", worst_residual) +
              Fmt(", min eigenvalue %.2e", worst_eigenvalue)};
}

CriterionResult WeakDuality() {
  int checked = 0;
  double worst = 0.0;
  bool pass = !g_instances.empty();
  std::string failures;
  for (const SolvedInstance& inst : g_instances) {
    if (!IsBound(inst.outcome)) continue;
    const ValueCertificate cert = ExtractValuePolynomial(inst.outcome, inst.sdp);
    const double b = inst.outcome.bound;
    const double err = std::abs(cert.Evaluate(0.0, cert.x0) - b);
    const double rel = err / (1.0 + std::abs(b));
    worst = std::max(worst, rel);
    if (rel > 1e-5) {
      pass = false;
      failures += "; " + inst.label;
    }
    ++checked;
  }
  return {pass, std::to_string(checked) + " instances" +
                    Fmt(", max |L(0,x0)-bound|/(1+|bound|) %.2e", worst) + failures};
}

CriterionResult MomentStructure() {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> dim(1, 3), count(1, 5), order(1, 3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0), weight(0.05, 1.0);
  int inside_ok = 0, outside_detected = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int nv = dim(rng);
    const int na = count(rng);
    int d = 0;
    while (MonomialCount(nv, d) <= static_cast<std::size_t>(na)) ++d;
    const int r = std::max(d + 1, order(rng));
    const VariableBlock block(false, nv, 0);
    const MomentLayout layout(block, 2 * r);
    Polynomial theta = Polynomial::Constant(block, 1.0);
    for (int k = 0; k < nv; ++k) theta -= Polynomial::Variable(block, k).Pow(2);
    std::vector<Eigen::VectorXd> atoms;
    std::vector<double> weights;
    for (int a = 0; a < na; ++a) {
      Eigen::VectorXd p(nv);
      do {
        for (int k = 0; k < nv; ++k) p[k] = uni(rng);
      } while (p.squaredNorm() > 1.0);
      atoms.push_back(p);
      weights.push_back(weight(rng));
    }
    const SymbolicMatrix moment = MomentMatrix(layout, r);
    const SymbolicMatrix loc = LocalizingMatrix(layout, theta, r - 1);
    const Eigen::VectorXd y = DirectMoments(layout, atoms, weights);
    if (MinEigenvalue(EvaluateSymbolic(moment, y)) >= -1e-10 &&
        MinEigenvalue(EvaluateSymbolic(loc, y)) >= -1e-10) {
      ++inside_ok;
    }
    Eigen::VectorXd outside(nv);
    for (int k = 0; k < nv; ++k) outside[k] = 1.5 * (uni(rng) > 0 ? 1 : -1);
    atoms.push_back(outside);
    weights.push_back(0.5 + std::abs(uni(rng)));
    const Eigen::VectorXd y_bad = DirectMoments(layout, atoms, weights);
    if (MinEigenvalue(EvaluateSymbolic(moment, y_bad)) >= -1e-10 &&
        MinEigenvalue(EvaluateSymbolic(loc, y_bad)) < 0.0) {
      ++outside_detected;
    }
  }
  return {inside_ok == 100 && outside_detected == 100,
          "PSD inside " + std::to_string(inside_ok) + "/100, outside atom detected " +
              std::to_string(outside_detected) + "/100"};
}

CriterionResult BrockettOracleSelfTest() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  double worst_residual = 0.0;
  for (int checked = 0; checked < 10000;) {
    const Eigen::Vector3d x(coord(rng), coord(rng), coord(rng));
    if (x[0] * x[0] + x[1] * x[1] <= 1e-6) continue;
    worst_residual =
        std::max(worst_residual, std::abs(BrockettAngleResidual(x, BrockettAngle(x))));
    ++checked;
  }
  std::uniform_real_distribution<double> height(0.1, 3.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst_jump = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x3 = (i % 2 == 0 ? 1.0 : -1.0) * height(rng);
    const Eigen::Vector3d on_line(0.0, 0.0, x3);
    Eigen::Vector3d offset(unit(rng), unit(rng), unit(rng));
    offset *= 1e-3 * std::abs(unit(rng)) / offset.norm();
    worst_jump = std::max(
        worst_jump, std::abs(BrockettTime(on_line + offset) - BrockettTime(on_line)));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst_residual <= 1e-10 && worst_jump <= 0.02 && seconds < 1.0,
          Fmt("max residual %.2e", worst_residual) +
              Fmt(", max jump within 1e-3 of the line %.2e", worst_jump) +
              Fmt(", %.3f s", seconds)};
}

}  // namespace
}  // namespace ocplmi

int main() {
  using ocplmi::CriterionResult;
  const std::vector<std::pair<std::string, std::function<CriterionResult()>>> criteria = {
      {"brockett singular line", ocplmi::BrockettSingularLine},
      {"brockett corner", ocplmi::BrockettCorner},
      {"brockett near-exact", ocplmi::BrockettNearExact},
      {"double integrator convergence", ocplmi::DoubleIntegratorConvergence},
      {"zermelo certificates", ocplmi::ZermeloCertificates},
      {"occupation feasibility", ocplmi::OccupationFeasibility},
      {"weak duality", ocplmi::WeakDuality},
      {"moment structure", ocplmi::MomentStructure},
      {"brockett oracle self-test", ocplmi::BrockettOracleSelfTest},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::printf("criterion %zu %s  %s: %s [%.1f s]\n", i + 1, v.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), v.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
