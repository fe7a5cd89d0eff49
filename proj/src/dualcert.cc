#include "ocplmi/dualcert.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ocplmi {

namespace {

double Horizon(const TimeMode& mode) { return TimeScale(mode); }

// (t, x, u) in the problem block's variable order.
Eigen::VectorXd BlockPoint(const VariableBlock& block, double t,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(block.size());
  if (block.has_time()) p[block.time_index()] = t;
  for (int k = 0; k < block.n() && k < x.size(); ++k) p[block.state_index(k)] = x[k];
  for (int k = 0; k < block.m() && k < u.size(); ++k) p[block.control_index(k)] = u[k];
  return p;
}

std::string FormatValue(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double ValueCertificate::Evaluate(double t,
                                  const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const VariableBlock& block = lambda.block();
  if (x.size() != block.n()) {
    throw std::invalid_argument("state dimension does not match certificate");
  }
  Eigen::VectorXd p(block.size());
  int k = 0;
  if (block.has_time()) p[k++] = t;
  for (int i = 0; i < x.size(); ++i) p[k++] = x[i];
  return lambda.Evaluate(p);
}

ValueCertificate ExtractValuePolynomial(const SolveOutcome& outcome,
                                        const RelaxationSdp& sdp) {
  if (outcome.status != SolveStatus::kLowerBound) {
    throw std::invalid_argument("value polynomial needs a LowerBound outcome");
  }
  if (!outcome.has_duals) {
    throw std::invalid_argument("solve outcome carries no equality multipliers");
  }
  if (outcome.equality_duals.size() !=
      static_cast<Eigen::Index>(sdp.equalities.size())) {
    throw std::invalid_argument(
        "equality multipliers do not match the relaxation rows");
  }
  Polynomial canonical =
      Polynomial::Constant(sdp.test_block, outcome.dual_constant);
  for (std::size_t i = 0; i < sdp.equalities.size(); ++i) {
    canonical.AddTerm(sdp.equalities[i].test_monomial, outcome.equality_duals[i]);
  }
  ValueCertificate cert;
  cert.order = sdp.order;
  cert.homogeneous = !sdp.test_block.has_time();
  cert.scaling = sdp.scaling;
  cert.lambda =
      AffineSubstitute(canonical, sdp.scaling.InverseMaps(sdp.test_block));
  cert.x0 = sdp.scaling.StateFromCanonical(sdp.x0);
  cert.dual_value = outcome.dual_objective;
  return cert;
}

std::vector<ValueGapRow> ValueGapGrid(const ValueCertificate& cert,
                                      const ValueOracle& oracle,
                                      const std::vector<Eigen::VectorXd>& grid) {
  std::vector<ValueGapRow> rows;
  rows.reserve(grid.size());
  for (const Eigen::VectorXd& x : grid) {
    ValueGapRow row;
    row.x = x;
    row.lambda = cert.Evaluate(x);
    row.oracle = oracle(x);
    row.gap = std::isfinite(row.oracle)
                  ? row.lambda - row.oracle
                  : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteValueGapCsv(const std::vector<ValueGapRow>& rows,
                      const std::vector<std::string>& state_names,
                      std::ostream& out) {
  for (const auto& name : state_names) out << name << ',';
  out << "lambda,oracle,gap\n";
  for (const auto& row : rows) {
    if (row.x.size() != static_cast<Eigen::Index>(state_names.size())) {
      throw std::invalid_argument("grid point dimension does not match names");
    }
    for (Eigen::Index i = 0; i < row.x.size(); ++i) {
      out << FormatValue(row.x[i]) << ',';
    }
    out << FormatValue(row.lambda) << ',' << FormatValue(row.oracle) << ','
        << FormatValue(row.gap) << '\n';
  }
}

std::vector<Eigen::VectorXd> RegularGrid(const std::vector<Interval>& axes,
                                         const std::vector<int>& counts) {
  if (axes.size() != counts.size()) {
    throw std::invalid_argument("one point count per axis is required");
  }
  std::size_t total = 1;
  for (int c : counts) {
    if (c < 1) throw std::invalid_argument("grid counts must be positive");
    total *= static_cast<std::size_t>(c);
  }
  const int d = static_cast<int>(axes.size());
  std::vector<Eigen::VectorXd> out;
  out.reserve(total);
  std::vector<int> idx(d, 0);
  for (std::size_t n = 0; n < total; ++n) {
    Eigen::VectorXd p(d);
    for (int k = 0; k < d; ++k) {
      p[k] = counts[k] == 1 ? axes[k].lo
                            : axes[k].lo + (axes[k].hi - axes[k].lo) * idx[k] /
                                               (counts[k] - 1);
    }
    out.push_back(std::move(p));
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < counts[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

bool IsAdmissible(const OcpProblem& problem, const RunningSample& sample,
                  double tol) {
  if (sample.x.size() != problem.n() || sample.u.size() != problem.m()) {
    return false;
  }
  if (sample.t < -tol || sample.t > Horizon(problem.time) + tol) return false;
  return problem.X.Contains(sample.x, tol) && problem.U.Contains(sample.u, tol);
}

std::vector<RunningSample> SampleRunningSet(const OcpProblem& problem,
                                            int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const std::vector<Interval>& box) {
    Eigen::VectorXd v(box.size());
    for (std::size_t k = 0; k < box.size(); ++k) {
      v[k] = box[k].lo + (box[k].hi - box[k].lo) * unit(rng);
    }
    return v;
  };
  std::vector<RunningSample> out;
  const long max_draws = 1000L * std::max(count, 1);
  for (long draws = 0; static_cast<int>(out.size()) < count; ++draws) {
    if (draws >= max_draws) {
      throw std::runtime_error("running set sampler accepted too few points");
    }
    RunningSample s;
    s.t = Horizon(problem.time) * unit(rng);
    s.x = draw(problem.X.box);
    s.u = draw(problem.U.box);
    if (IsAdmissible(problem, s)) out.push_back(std::move(s));
  }
  return out;
}

std::vector<Eigen::VectorXd> SampleTarget(const OcpProblem& problem, int count,
                                          std::mt19937_64& rng) {
  if (problem.K.is_point()) return {*problem.K.point};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& box = problem.K.set.box;
  std::vector<Eigen::VectorXd> out;
  const long max_draws = 1000L * std::max(count, 1);
  for (long draws = 0; static_cast<int>(out.size()) < count; ++draws) {
    if (draws >= max_draws) {
      throw std::runtime_error("target sampler accepted too few points");
    }
    Eigen::VectorXd x(box.size());
    for (std::size_t k = 0; k < box.size(); ++k) {
      x[k] = box[k].lo + (box[k].hi - box[k].lo) * unit(rng);
    }
    if (problem.K.set.Contains(x)) out.push_back(std::move(x));
  }
  return out;
}

DualResidualReport PutinarResidualCheck(
    const ValueCertificate& cert, const OcpProblem& problem,
    const std::vector<RunningSample>& running,
    const std::vector<Eigen::VectorXd>& terminal) {
  const Polynomial lambda = Reblock(cert.lambda, problem.block);
  const Polynomial running_poly = problem.h + ApplyGenerator(lambda, problem.f);
  const Polynomial terminal_poly = problem.H - lambda;

  DualResidualReport report;
  report.min_running = std::numeric_limits<double>::infinity();
  report.min_terminal = std::numeric_limits<double>::infinity();
  for (const RunningSample& s : running) {
    if (!IsAdmissible(problem, s, 1e-12)) {
      ++report.rejected;
      continue;
    }
    ++report.accepted;
    report.min_running =
        std::min(report.min_running,
                 running_poly.Evaluate(BlockPoint(problem.block, s.t, s.x, s.u)));
  }

  const double T = Horizon(problem.time);
  std::vector<double> times = {0.0};
  if (std::holds_alternative<FixedHorizon>(problem.time)) {
    times = {T};
  } else if (std::holds_alternative<FreeHorizon>(problem.time)) {
    times = {0.0, 0.5 * T, T};
  }
  const Eigen::VectorXd no_control = Eigen::VectorXd::Zero(problem.m());
  for (const Eigen::VectorXd& x : terminal) {
    for (double t : times) {
      report.min_terminal = std::min(
          report.min_terminal,
          terminal_poly.Evaluate(BlockPoint(problem.block, t, x, no_control)));
    }
  }
  return report;
}

}  // namespace ocplmi
