#include "ocplmi/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "ocplmi/benchmarks.hpp"
#include "ocplmi/oracles.hpp"
#include "ocplmi/relaxation.hpp"

namespace ocplmi {

ProblemFileError::ProblemFileError(const std::string& message, int line,
                                   int column)
    : std::runtime_error(line > 0 ? std::to_string(line) + ":" +
                                        std::to_string(column) + ": " + message
                                  : message),
      message_(message),
      line_(line),
      column_(column) {}

namespace {

std::string Format(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool IsBlank(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line{0};
  /// 0-based offsets into the line.
  int key_col{0};
  int value_col{0};
};

[[noreturn]] void Fail(const Entry& e, const std::string& message,
                       int offset = 0) {
  throw ProblemFileError(message, e.line, e.value_col + offset + 1);
}

const std::map<std::string, std::vector<std::string>>& KnownKeys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"variables", {"states", "controls"}},
      {"dynamics", {}},
      {"cost", {"running", "terminal"}},
      {"state_set", {"constraint", "box"}},
      {"control_set", {"constraint", "box"}},
      {"target", {"point", "constraint", "box"}},
      {"initial", {"state"}},
      {"time", {"mode", "horizon"}},
      {"options",
       {"ball_constraint", "r_min", "r_max", "oracle", "gap_tolerance",
        "feasibility_tolerance", "certificate_threshold", "max_iterations"}},
  };
  return keys;
}

bool Repeatable(const std::string& key) { return key == "constraint"; }

std::vector<Entry> Tokenize(std::istream& in) {
  std::vector<Entry> entries;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = raw.substr(0, raw.find('#'));
    std::size_t first = 0;
    while (first < line.size() && IsBlank(line[first])) ++first;
    if (first == line.size()) continue;
    std::size_t last = line.size();
    while (last > first && IsBlank(line[last - 1])) --last;
    if (line[first] == '[') {
      if (line[last - 1] != ']') {
        throw ProblemFileError("unterminated section header", line_no,
                               static_cast<int>(first) + 1);
      }
      section = line.substr(first + 1, last - first - 2);
      if (!KnownKeys().count(section)) {
        throw ProblemFileError("unknown section '" + section + "'", line_no,
                               static_cast<int>(first) + 2);
      }
      continue;
    }
    const std::size_t eq = line.find('=', first);
    if (eq == std::string::npos || eq >= last) {
      throw ProblemFileError("expected 'key = value'", line_no,
                             static_cast<int>(first) + 1);
    }
    if (section.empty()) {
      throw ProblemFileError("entry outside of any section", line_no,
                             static_cast<int>(first) + 1);
    }
    Entry e;
    e.section = section;
    e.line = line_no;
    e.key_col = static_cast<int>(first);
    std::size_t key_end = eq;
    while (key_end > first && IsBlank(line[key_end - 1])) --key_end;
    e.key = line.substr(first, key_end - first);
    std::size_t vstart = eq + 1;
    while (vstart < last && IsBlank(line[vstart])) ++vstart;
    e.value_col = static_cast<int>(vstart);
    e.value = vstart < last ? line.substr(vstart, last - vstart) : "";
    if (e.key.empty()) {
      throw ProblemFileError("missing key", line_no, e.key_col + 1);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

// Simple cursor over an entry value for numbers, lists and intervals.
class ValueCursor {
 public:
  explicit ValueCursor(const Entry& e) : e_(e), s_(e.value) {}

  void SkipBlanks() {
    while (pos_ < s_.size() && IsBlank(s_[pos_])) ++pos_;
  }
  bool AtEnd() {
    SkipBlanks();
    return pos_ >= s_.size();
  }
  bool Accept(char c) {
    SkipBlanks();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void Expect(char c) {
    if (!Accept(c)) {
      Fail(e_, std::string("expected '") + c + "'", static_cast<int>(pos_));
    }
  }
  double Number() {
    SkipBlanks();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) Fail(e_, "expected a number", static_cast<int>(pos_));
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  const Entry& e_;
  const std::string& s_;
  std::size_t pos_{0};
};

std::vector<double> ParseNumberList(const Entry& e) {
  ValueCursor c(e);
  std::vector<double> out;
  if (c.AtEnd()) Fail(e, "expected a comma-separated list of numbers");
  do {
    out.push_back(c.Number());
  } while (c.Accept(','));
  if (!c.AtEnd()) Fail(e, "unexpected text after list", static_cast<int>(c.pos()));
  return out;
}

std::vector<Interval> ParseBox(const Entry& e) {
  ValueCursor c(e);
  std::vector<Interval> box;
  do {
    c.Expect('[');
    const std::size_t at = c.pos();
    Interval iv;
    iv.lo = c.Number();
    c.Expect(',');
    iv.hi = c.Number();
    c.Expect(']');
    if (!(iv.lo < iv.hi)) Fail(e, "box interval needs lo < hi", static_cast<int>(at));
    box.push_back(iv);
  } while (c.Accept('x'));
  if (!c.AtEnd()) Fail(e, "unexpected text after box", static_cast<int>(c.pos()));
  return box;
}

std::vector<std::string> ParseNames(const Entry& e) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  const std::string& s = e.value;
  while (pos < s.size()) {
    while (pos < s.size() && IsBlank(s[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] != ',') ++pos;
    std::size_t end = pos;
    while (end > start && IsBlank(s[end - 1])) --end;
    const std::string name = s.substr(start, end - start);
    const bool ident =
        !name.empty() && std::isalpha(static_cast<unsigned char>(name[0])) &&
        std::all_of(name.begin(), name.end(), [](char ch) {
          return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
        });
    if (!ident) Fail(e, "invalid variable name '" + name + "'", static_cast<int>(start));
    if (name == "t") Fail(e, "'t' is reserved for time", static_cast<int>(start));
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      Fail(e, "duplicate variable name '" + name + "'", static_cast<int>(start));
    }
    names.push_back(name);
    if (pos < s.size()) ++pos;  // comma
  }
  return names;
}

Polynomial ParseEntryPolynomial(const Entry& e, const VariableBlock& block) {
  try {
    return ParsePolynomial(e.value, block);
  } catch (const ParseError& err) {
    Fail(e, err.what(), static_cast<int>(err.position()));
  }
}

int ParseInt(const Entry& e) {
  ValueCursor c(e);
  const double v = c.Number();
  if (!c.AtEnd() || v != std::floor(v)) Fail(e, "expected an integer");
  return static_cast<int>(v);
}

double ParseDouble(const Entry& e) {
  ValueCursor c(e);
  const double v = c.Number();
  if (!c.AtEnd()) Fail(e, "unexpected text after number", static_cast<int>(c.pos()));
  return v;
}

bool ParseBool(const Entry& e) {
  if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "0") return false;
  Fail(e, "expected true or false");
}

// Checks that p only uses variables of the allowed groups.
void RequireVariables(const Entry& e, const Polynomial& p, bool time, bool state,
                      bool control, const std::string& what) {
  const VariableBlock& b = p.block();
  for (int v = 0; v < b.size(); ++v) {
    if (!p.depends_on(v)) continue;
    const bool is_t = b.has_time() && v == b.time_index();
    const bool is_x = !is_t && v < b.state_index(0) + b.n();
    const bool ok = is_t ? time : (is_x ? state : control);
    if (!ok) Fail(e, what + " may not use '" + b.name(v) + "'");
  }
}

}  // namespace

ProblemFile ParseProblemFile(std::istream& in) {
  const std::vector<Entry> entries = Tokenize(in);

  std::map<std::pair<std::string, std::string>, const Entry*> seen;
  for (const Entry& e : entries) {
    const auto& keys = KnownKeys().at(e.section);
    if (e.section != "dynamics" &&
        std::find(keys.begin(), keys.end(), e.key) == keys.end()) {
      throw ProblemFileError("unknown key '" + e.key + "' in [" + e.section + "]",
                             e.line, e.key_col + 1);
    }
    const auto id = std::make_pair(e.section, e.key);
    if (seen.count(id) && !Repeatable(e.key)) {
      throw ProblemFileError("duplicate key '" + e.key + "'", e.line,
                             e.key_col + 1);
    }
    seen[id] = &e;
  }
  auto find = [&](const std::string& section,
                  const std::string& key) -> const Entry* {
    const auto it = seen.find({section, key});
    return it == seen.end() ? nullptr : it->second;
  };
  auto require = [&](const std::string& section,
                     const std::string& key) -> const Entry& {
    const Entry* e = find(section, key);
    if (!e) {
      throw ProblemFileError("missing '" + key + "' in [" + section + "]", 0, 0);
    }
    return *e;
  };

  const std::vector<std::string> states = ParseNames(require("variables", "states"));
  if (states.empty()) {
    throw ProblemFileError("at least one state is required", 0, 0);
  }
  std::vector<std::string> controls;
  if (const Entry* e = find("variables", "controls")) {
    controls = ParseNames(*e);
    for (const auto& c : controls) {
      if (std::find(states.begin(), states.end(), c) != states.end()) {
        Fail(*e, "control name '" + c + "' is already a state");
      }
    }
  }

  ProblemFile file;
  OcpProblem& p = file.problem;
  p.block = VariableBlock(true, states, controls);
  p.f.assign(states.size(), Polynomial(p.block));
  std::vector<bool> have_dynamics(states.size(), false);
  p.h = Polynomial(p.block);
  p.H = Polynomial(p.block);
  p.X = {VariableGroup::kState, {}, {}};
  p.U = {VariableGroup::kControl, {}, {}};
  p.K = TargetSet{};
  bool have_time = false;
  std::optional<std::string> mode;
  double horizon = 0.0;
  const Entry* mode_entry = nullptr;

  for (const Entry& e : entries) {
    if (e.section == "dynamics") {
      const auto it = std::find(states.begin(), states.end(), e.key);
      if (it == states.end()) {
        throw ProblemFileError("'" + e.key + "' is not a declared state", e.line,
                               e.key_col + 1);
      }
      const std::size_t k = static_cast<std::size_t>(it - states.begin());
      p.f[k] = ParseEntryPolynomial(e, p.block);
      have_dynamics[k] = true;
    } else if (e.section == "cost") {
      const Polynomial q = ParseEntryPolynomial(e, p.block);
      if (e.key == "running") {
        p.h = q;
      } else {
        RequireVariables(e, q, false, true, false, "terminal cost");
        p.H = q;
      }
    } else if (e.section == "state_set" || e.section == "control_set" ||
               (e.section == "target" && e.key != "point")) {
      SemialgebraicSet& set = e.section == "state_set"
                                  ? p.X
                                  : (e.section == "control_set" ? p.U : p.K.set);
      const bool on_states = e.section != "control_set";
      if (e.key == "box") {
        set.box = ParseBox(e);
      } else {
        const Polynomial g = ParseEntryPolynomial(e, p.block);
        RequireVariables(e, g, false, on_states, !on_states,
                         e.section + " constraint");
        set.inequalities.push_back(g);
      }
    } else if (e.section == "target") {
      const std::vector<double> v = ParseNumberList(e);
      p.K.point = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    } else if (e.section == "initial") {
      const std::vector<double> v = ParseNumberList(e);
      p.x0 = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    } else if (e.section == "time") {
      if (e.key == "mode") {
        if (e.value != "fixed" && e.value != "free" && e.value != "homogeneous") {
          Fail(e, "time mode must be fixed, free or homogeneous");
        }
        mode = e.value;
        mode_entry = &e;
      } else {
        horizon = ParseDouble(e);
        if (!(horizon > 0.0)) Fail(e, "horizon must be positive");
        have_time = true;
      }
    } else if (e.section == "options") {
      if (e.key == "ball_constraint") {
        p.add_ball_constraint = ParseBool(e);
      } else if (e.key == "r_min") {
        file.r_min = ParseInt(e);
      } else if (e.key == "r_max") {
        file.r_max = ParseInt(e);
      } else if (e.key == "oracle") {
        file.oracle = e.value == "none" ? "" : e.value;
        if (!file.oracle.empty() && !LookupOracle(file.oracle)) {
          Fail(e, "unknown oracle '" + e.value + "'");
        }
      } else if (e.key == "gap_tolerance") {
        file.settings.gap_tolerance = ParseDouble(e);
      } else if (e.key == "feasibility_tolerance") {
        file.settings.feasibility_tolerance = ParseDouble(e);
      } else if (e.key == "certificate_threshold") {
        file.settings.certificate_threshold = ParseDouble(e);
      } else if (e.key == "max_iterations") {
        file.settings.max_iterations = ParseInt(e);
      }
    }
  }

  for (std::size_t k = 0; k < states.size(); ++k) {
    if (!have_dynamics[k]) {
      throw ProblemFileError("missing dynamics for '" + states[k] + "'", 0, 0);
    }
  }
  if (!mode || !have_time) {
    throw ProblemFileError("[time] needs both mode and horizon", 0, 0);
  }
  if (*mode == "fixed") {
    p.time = FixedHorizon{horizon};
  } else if (*mode == "free") {
    p.time = FreeHorizon{horizon};
  } else {
    p.time = FreeHomogeneous{horizon};
  }
  if (p.x0.size() == 0) {
    throw ProblemFileError("missing 'state' in [initial]", 0, 0);
  }
  if (file.r_min < 1 || file.r_min > file.r_max) {
    throw ProblemFileError("options need 1 <= r_min <= r_max", 0, 0);
  }
  try {
    p.Validate();
  } catch (const std::invalid_argument& err) {
    if (mode_entry && std::string(err.what()).find("homogeneous") != std::string::npos) {
      Fail(*mode_entry, err.what());
    }
    throw ProblemFileError(err.what(), 0, 0);
  }
  return file;
}

ProblemFile LoadProblemFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemFileError("cannot open '" + path + "'", 0, 0);
  try {
    return ParseProblemFile(in);
  } catch (const ProblemFileError& err) {
    throw ProblemFileError(
        err.line() > 0 ? path + ":" + err.what() : path + ": " + err.what(),
        0, 0);
  }
}

ValueOracle LookupOracle(const std::string& name) {
  if (name == "double-integrator") {
    return [](const Eigen::VectorXd& x) {
      if (x.size() != 2 || x[1] < -1.0) return std::nan("");
      return DoubleIntegratorTime(Eigen::Vector2d(x[0], x[1]));
    };
  }
  if (name == "brockett") {
    return [](const Eigen::VectorXd& x) {
      if (x.size() != 3) return std::nan("");
      return BrockettTime(Eigen::Vector3d(x[0], x[1], x[2]));
    };
  }
  return {};
}

std::vector<std::string> OracleNames() { return {"double-integrator", "brockett"}; }

std::vector<GridAxis> ParseGridSpec(const std::string& spec) {
  std::vector<GridAxis> axes;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    GridAxis axis;
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> axis.range.lo >> c1 >> axis.range.hi >> c2 >> axis.count) ||
        c1 != ':' || c2 != ':' || !(is >> std::ws).eof()) {
      throw std::invalid_argument("grid axis '" + item +
                                  "' is not of the form lo:hi:count");
    }
    if (axis.count < 1) throw std::invalid_argument("grid counts must be >= 1");
    if (axis.range.lo > axis.range.hi) {
      throw std::invalid_argument("grid axis needs lo <= hi");
    }
    axes.push_back(axis);
  }
  if (axes.empty()) throw std::invalid_argument("empty grid spec");
  return axes;
}

std::vector<Eigen::VectorXd> GridPoints(const std::vector<GridAxis>& axes) {
  std::vector<Interval> ranges;
  std::vector<int> counts;
  for (const GridAxis& a : axes) {
    ranges.push_back(a.range);
    counts.push_back(a.count);
  }
  return RegularGrid(ranges, counts);
}

int HierarchyExitCode(const std::vector<SolveOutcome>& outcomes) {
  bool certificate = false;
  for (const SolveOutcome& o : outcomes) {
    if (o.status == SolveStatus::kLowerBound) return 0;
    certificate = certificate || o.status == SolveStatus::kInfeasibleCertificate;
  }
  return certificate ? 2 : 3;
}

namespace {

int LargestBlock(const RelaxationSdp& sdp) {
  int side = 0;
  for (const PsdBlock& b : sdp.blocks) side = std::max(side, b.matrix.side());
  return side;
}

std::string ResultCell(const SolveOutcome& o) {
  switch (o.status) {
    case SolveStatus::kLowerBound:
      return Format(o.bound);
    case SolveStatus::kInfeasibleCertificate:
      return "INFEASIBLE";
    case SolveStatus::kUnbounded:
      return "UNBOUNDED";
    case SolveStatus::kInaccurate:
      return "INACCURATE";
  }
  return "";
}

void RequireOrder(const OcpProblem& problem, int r) {
  const int r_min = ComputeDegreeProfile(problem).r_min;
  if (r < r_min) {
    throw std::invalid_argument("order " + std::to_string(r) +
                                " is below the minimal order " +
                                std::to_string(r_min));
  }
}

// Runs task(i) for i in [0, count) on up to `workers` threads.
template <typename Task>
void ParallelFor(int count, int workers, const Task& task) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

int RunSolveCommand(const ProblemFile& file, const SolveCommand& cmd,
                    std::ostream& table, std::ostream* csv) {
  if (cmd.r_min > cmd.r_max) throw std::invalid_argument("empty order range");
  RequireOrder(file.problem, cmd.r_min);
  const CanonicalProblem canonical = Canonicalize(file.problem);
  std::vector<SolveOutcome> outcomes;
  char line[256];
  std::snprintf(line, sizeof(line), "%-3s %-22s %-20s %9s %8s %8s %6s\n", "r",
                "status", "bound", "seconds", "vars", "rows", "block");
  table << line;
  if (csv) *csv << "order,status,bound,decision_length,equalities,largest_block\n";
  for (int r = cmd.r_min; r <= cmd.r_max; ++r) {
    const RelaxationSdp sdp = BuildRelaxation(canonical, r);
    const SolveOutcome o = Solve(sdp, cmd.settings);
    outcomes.push_back(o);
    const std::string bound =
        o.status == SolveStatus::kLowerBound ? Format(o.bound) : "";
    std::snprintf(line, sizeof(line), "%-3d %-22s %-20s %9.3f %8d %8zu %6d\n", r,
                  ToString(o.status).c_str(), bound.c_str(), o.diagnostics.seconds,
                  sdp.decision_length, sdp.equalities.size(), LargestBlock(sdp));
    table << line;
    if (csv) {
      *csv << r << ',' << ToString(o.status) << ',' << bound << ','
           << sdp.decision_length << ',' << sdp.equalities.size() << ','
           << LargestBlock(sdp) << '\n';
    }
    if (o.status == SolveStatus::kInfeasibleCertificate) break;
  }
  return HierarchyExitCode(outcomes);
}

void RunSweepCommand(const ProblemFile& file, const SweepCommand& cmd,
                     std::ostream& csv) {
  const OcpProblem& base = file.problem;
  if (static_cast<int>(cmd.grid.size()) != base.n()) {
    throw std::invalid_argument("grid dimension does not match the state");
  }
  for (int k = 0; k < base.n(); ++k) {
    if (cmd.grid[k].range.lo < base.X.box[k].lo ||
        cmd.grid[k].range.hi > base.X.box[k].hi) {
      throw std::invalid_argument("grid leaves the state box along " +
                                  base.block.name(base.block.state_index(k)));
    }
  }
  if (cmd.r_min > cmd.r_max) throw std::invalid_argument("empty order range");
  RequireOrder(base, cmd.r_min);
  const ValueOracle oracle = LookupOracle(file.oracle);
  const std::vector<Eigen::VectorXd> points = GridPoints(cmd.grid);

  struct Row {
    int order{0};
    std::string result;
    double oracle{std::nan("")};
    double ratio{std::nan("")};
    std::string note;
  };
  std::vector<Row> rows(points.size());
  ParallelFor(static_cast<int>(points.size()), cmd.workers, [&](int i) {
    Row& row = rows[i];
    try {
      OcpProblem p = base;
      p.x0 = points[i];
      p.Validate();
      if (!p.X.Contains(p.x0, 1e-12)) {
        throw std::invalid_argument("initial state violates the state constraints");
      }
      const std::vector<SolveOutcome> outs =
          RunHierarchy(p, cmd.r_min, cmd.r_max, cmd.settings);
      const SolveOutcome& last = outs.back();
      row.order = last.order;
      if (cmd.certificates_only) {
        row.result = last.status == SolveStatus::kInfeasibleCertificate
                         ? "INFEASIBLE"
                         : "UNKNOWN";
        return;
      }
      row.result = ResultCell(last);
      if (oracle) {
        row.oracle = oracle(points[i]);
        if (last.status == SolveStatus::kLowerBound && row.oracle > 0.0) {
          row.ratio = last.bound / row.oracle;
        }
      }
    } catch (const std::exception& err) {
      row.result = "ERROR";
      row.note = err.what();
      std::replace(row.note.begin(), row.note.end(), ',', ';');
      std::replace(row.note.begin(), row.note.end(), '\n', ' ');
    }
  });

  for (int k = 0; k < base.n(); ++k) {
    csv << base.block.name(base.block.state_index(k)) << ',';
  }
  csv << "order,result,oracle,ratio,note\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int k = 0; k < base.n(); ++k) csv << Format(points[i][k]) << ',';
    const Row& row = rows[i];
    csv << row.order << ',' << row.result << ',' << Format(row.oracle) << ','
        << Format(row.ratio) << ',' << row.note << '\n';
  }
}

void RunValueCommand(const ProblemFile& file, const ValueCommand& cmd,
                     std::ostream& csv) {
  const OcpProblem& p = file.problem;
  RequireOrder(p, cmd.order);
  if (static_cast<int>(cmd.grid.size()) != p.n()) {
    throw std::invalid_argument("grid dimension does not match the state");
  }
  const RelaxationSdp sdp = BuildRelaxation(Canonicalize(p), cmd.order);
  const SolveOutcome outcome = Solve(sdp, cmd.settings);
  if (outcome.status != SolveStatus::kLowerBound || !outcome.has_duals) {
    throw std::runtime_error("order " + std::to_string(cmd.order) +
                             " gave " + ToString(outcome.status) +
                             " without equality multipliers");
  }
  const ValueCertificate cert = ExtractValuePolynomial(outcome, sdp);
  ValueOracle oracle = LookupOracle(file.oracle);
  if (!oracle) {
    oracle = [](const Eigen::VectorXd&) { return std::nan(""); };
  }
  std::vector<std::string> names;
  for (int k = 0; k < p.n(); ++k) {
    names.push_back(p.block.name(p.block.state_index(k)));
  }
  WriteValueGapCsv(ValueGapGrid(cert, oracle, GridPoints(cmd.grid)), names, csv);
}

namespace {

struct CommonFlags {
  std::string path;
  std::optional<int> r_min;
  std::optional<int> r_max;
  std::optional<double> tol;
  std::optional<double> certificate_threshold;
  bool ball{false};
  std::string output;
};

void AddCommon(CLI::App* cmd, CommonFlags& f, bool orders) {
  cmd->add_option("problem", f.path, "Problem file")->required();
  if (orders) {
    cmd->add_option("--r-min", f.r_min, "Lowest relaxation order");
    cmd->add_option("--r-max", f.r_max, "Highest relaxation order");
  }
  cmd->add_option("--tol", f.tol, "Gap and feasibility tolerance");
  cmd->add_option("--certificate-threshold", f.certificate_threshold,
                  "Smallest infeasibility margin accepted as a certificate");
  cmd->add_flag("--ball-constraint", f.ball,
                "Add the redundant ball inequalities");
  cmd->add_option("-o,--output", f.output, "CSV output file (default stdout)");
}

ProblemFile LoadWithFlags(const CommonFlags& f) {
  ProblemFile file = LoadProblemFile(f.path);
  if (f.ball) file.problem.add_ball_constraint = true;
  if (f.tol) {
    file.settings.gap_tolerance = *f.tol;
    file.settings.feasibility_tolerance = *f.tol;
  }
  if (f.certificate_threshold) {
    file.settings.certificate_threshold = *f.certificate_threshold;
  }
  if (f.r_min) file.r_min = *f.r_min;
  if (f.r_max) file.r_max = *f.r_max;
  return file;
}

// stdout unless a path was given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool to_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

}  // namespace

int RunCli(int argc, char** argv) {
  CLI::App app{"Moment-SOS relaxations for polynomial optimal control"};
  app.require_subcommand(1);

  CommonFlags solve_flags, sweep_flags, value_flags, export_flags;
  std::string sweep_grid, value_grid;
  int workers = 1;
  bool certificates_only = false;
  std::optional<int> value_order, export_order;

  CLI::App* solve = app.add_subcommand("solve", "Run the hierarchy from x0");
  AddCommon(solve, solve_flags, true);

  CLI::App* sweep = app.add_subcommand("sweep", "Solve over a grid of initial states");
  AddCommon(sweep, sweep_flags, true);
  sweep->add_option("--grid", sweep_grid, "lo:hi:count per state, comma separated")
      ->required();
  sweep->add_option("--workers", workers, "Parallel solves")
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--certificates-only", certificates_only,
                  "Report INFEASIBLE or UNKNOWN only");

  CLI::App* value = app.add_subcommand("value", "Value polynomial against the oracle");
  AddCommon(value, value_flags, false);
  value->add_option("--order", value_order, "Relaxation order (default r_max)");
  value->add_option("--grid", value_grid, "lo:hi:count per state")->required();

  CLI::App* exp = app.add_subcommand("export-sdp", "Write the relaxation in SDPA format");
  AddCommon(exp, export_flags, false);
  exp->add_option("--order", export_order, "Relaxation order (default r_max)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*solve) {
      const ProblemFile file = LoadWithFlags(solve_flags);
      Output out(solve_flags.output);
      SolveCommand cmd{file.r_min, file.r_max, file.settings};
      return RunSolveCommand(file, cmd, out.to_file() ? std::cout : std::cerr,
                             out.to_file() ? &out.stream() : &std::cout);
    }
    if (*sweep) {
      const ProblemFile file = LoadWithFlags(sweep_flags);
      Output out(sweep_flags.output);
      SweepCommand cmd;
      cmd.r_min = file.r_min;
      cmd.r_max = file.r_max;
      cmd.settings = file.settings;
      cmd.grid = ParseGridSpec(sweep_grid);
      cmd.workers = workers;
      cmd.certificates_only = certificates_only;
      RunSweepCommand(file, cmd, out.stream());
      return 0;
    }
    if (*value) {
      const ProblemFile file = LoadWithFlags(value_flags);
      Output out(value_flags.output);
      ValueCommand cmd;
      cmd.order = value_order.value_or(file.r_max);
      cmd.settings = file.settings;
      cmd.grid = ParseGridSpec(value_grid);
      RunValueCommand(file, cmd, out.stream());
      return 0;
    }
    if (*exp) {
      const ProblemFile file = LoadWithFlags(export_flags);
      const int order = export_order.value_or(file.r_max);
      RequireOrder(file.problem, order);
      Output out(export_flags.output);
      WriteSdpa(BuildRelaxation(Canonicalize(file.problem), order), out.stream());
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace ocplmi
