#pragma once

/// @file
/// Problem files and the command-line front end.
///
/// A problem file is line oriented. `#` starts a comment, `[name]` opens a
/// section and every other line is `key = value`. Keys marked (list) may
/// repeat.
///
///   [variables]    states = x1, x2          controls = u1
///   [dynamics]     <state name> = <polynomial>, one line per state
///   [cost]         running = <polynomial>   terminal = <polynomial in x>
///   [state_set]    constraint = <g>  (list)  box = [lo, hi] x [lo, hi] ...
///   [control_set]  constraint = <g>  (list)  box = ...
///   [target]       point = 0, 0   or   constraint = <g> (list) and box = ...
///   [initial]      state = 1, 0
///   [time]         mode = fixed | free | homogeneous    horizon = <T or T0>
///   [options]      ball_constraint = true|false  r_min = 1  r_max = 3
///                  oracle = double-integrator | brockett | none
///                  gap_tolerance, feasibility_tolerance,
///                  certificate_threshold, max_iterations
///
/// Polynomials use the declared names and `t`.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocplmi/dualcert.hpp"
#include "ocplmi/problem.hpp"
#include "ocplmi/sdpbackend.hpp"

namespace ocplmi {

/// Parse or validation failure. line and column are 1-based; both are 0
/// when the failure concerns the file as a whole.
class ProblemFileError : public std::runtime_error {
 public:
  ProblemFileError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

struct ProblemFile {
  OcpProblem problem;
  int r_min{1};
  int r_max{3};
  SolverSettings settings;
  /// Registered exact-value oracle, empty when none.
  std::string oracle;
};

/// Parses and validates. Throws ProblemFileError.
ProblemFile ParseProblemFile(std::istream& in);
/// Throws ProblemFileError when the file cannot be opened or parsed.
ProblemFile LoadProblemFile(const std::string& path);

/// Exact minimum-time oracles by name; an empty function for unknown names.
ValueOracle LookupOracle(const std::string& name);
std::vector<std::string> OracleNames();

/// "lo:hi:count" per coordinate, comma separated. Throws
/// std::invalid_argument on malformed specs, count < 1 or lo > hi.
struct GridAxis {
  Interval range;
  int count{1};
};
std::vector<GridAxis> ParseGridSpec(const std::string& spec);
std::vector<Eigen::VectorXd> GridPoints(const std::vector<GridAxis>& axes);

/// 0 if some order gave a bound, 2 if some order proved infeasibility,
/// 3 otherwise.
int HierarchyExitCode(const std::vector<SolveOutcome>& outcomes);

struct SolveCommand {
  int r_min{1};
  int r_max{1};
  SolverSettings settings;
};
/// Human-readable table on `table`; deterministic CSV (no timings) on `csv`
/// when it is non-null. Returns the exit code.
int RunSolveCommand(const ProblemFile& file, const SolveCommand& cmd,
                    std::ostream& table, std::ostream* csv);

struct SweepCommand {
  int r_min{1};
  int r_max{1};
  SolverSettings settings;
  std::vector<GridAxis> grid;
  int workers{1};
  /// Report only INFEASIBLE or UNKNOWN per point.
  bool certificates_only{false};
};
/// One CSV row per grid point in grid order:
/// x..., order, result, oracle, ratio, note. result is the bound, INFEASIBLE
/// or INACCURATE; per-point errors go to note. Throws std::invalid_argument
/// when the grid leaves the state box.
void RunSweepCommand(const ProblemFile& file, const SweepCommand& cmd,
                     std::ostream& csv);

struct ValueCommand {
  int order{1};
  SolverSettings settings;
  std::vector<GridAxis> grid;
};
/// Solves at `order` from the file's initial state and writes the value gap
/// CSV. Throws std::invalid_argument for an order below the problem's
/// minimum and std::runtime_error when the solve gives no multipliers.
void RunValueCommand(const ProblemFile& file, const ValueCommand& cmd,
                     std::ostream& csv);

/// Entry point of the executable.
int RunCli(int argc, char** argv);

}  // namespace ocplmi
