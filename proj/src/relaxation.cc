#include "ocplmi/relaxation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ocplmi {

namespace {

int CeilHalf(int d) { return (d + 1) / 2; }

void AddScaled(LinearForm& dst, const LinearForm& src, double scale,
               int offset) {
  dst.constant += scale * src.constant;
  for (const auto& [pos, c] : src.terms) {
    dst.terms.emplace_back(pos + offset, scale * c);
  }
}

SymbolicMatrix Shifted(const SymbolicMatrix& m, int offset) {
  if (offset == 0) return m;
  SymbolicMatrix out(m.side());
  for (int i = 0; i < m.side(); ++i) {
    for (int j = i; j < m.side(); ++j) {
      LinearForm& e = out.mutable_entry(i, j);
      AddScaled(e, m.entry(i, j), 1.0, offset);
    }
  }
  return out;
}

std::vector<int> GroupVariables(const VariableBlock& b, bool time, bool state,
                                bool control) {
  std::vector<int> vars;
  if (time && b.has_time()) vars.push_back(b.time_index());
  if (state) {
    for (int k = 0; k < b.n(); ++k) vars.push_back(b.state_index(k));
  }
  if (control) {
    for (int k = 0; k < b.m(); ++k) vars.push_back(b.control_index(k));
  }
  return vars;
}

double EvaluateAtState(const Polynomial& p, const Eigen::VectorXd& x) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(p.block().size());
  for (int k = 0; k < p.block().n(); ++k) full[p.block().state_index(k)] = x[k];
  return p.Evaluate(full);
}

class Builder {
 public:
  Builder(const CanonicalProblem& cp, int r, const RelaxationOptions& options)
      : p_(cp.problem), r_(r), options_(options) {
    sdp_.order = r;
    sdp_.time = p_.time;
    sdp_.homogeneous = p_.is_homogeneous();
    sdp_.scope = options.scope;
    sdp_.scaling = cp.scaling;
  }

  RelaxationSdp Build() {
    Check();
    const bool fixed = std::holds_alternative<FixedHorizon>(p_.time);
    const bool homog = p_.is_homogeneous();
    const VariableBlock& full = p_.block;
    z_block_ = homog ? full.Subblock(false, true, true) : full;
    sdp_.test_block = homog ? full.Subblock(false, true, false)
                            : full.Subblock(true, true, false);

    if (p_.K.is_point()) {
      sdp_.terminal = (fixed || homog) ? TerminalMoments::kEliminated
                                       : TerminalMoments::kTimeOnly;
    } else {
      sdp_.terminal = TerminalMoments::kFull;
    }
    switch (sdp_.terminal) {
      case TerminalMoments::kFull:
        sdp_.y_layout = MomentLayout((fixed || homog)
                                         ? full.Subblock(false, true, false)
                                         : full.Subblock(true, true, false),
                                     2 * r_);
        break;
      case TerminalMoments::kTimeOnly:
        sdp_.y_layout =
            MomentLayout(full.Subblock(true, false, false), 2 * r_);
        break;
      case TerminalMoments::kEliminated:
        break;
    }
    sdp_.z_layout = MomentLayout(z_block_, 2 * r_);
    sdp_.y_offset = 0;
    sdp_.z_offset = sdp_.y_layout.size();
    sdp_.decision_length = sdp_.z_offset + sdp_.z_layout.size();

    AddEqualities(fixed);
    AddObjective();
    AddOccupationBlocks(homog);
    AddTerminalBlocks(fixed, homog);
    sdp_.SetInitialState(p_.x0);
    return std::move(sdp_);
  }

 private:
  void Check() const {
    if (!p_.canonical) {
      throw std::invalid_argument("relaxations require a canonical problem");
    }
    p_.Validate();
    const DegreeProfile prof = ComputeDegreeProfile(p_);
    if (r_ < prof.r_min) {
      throw std::invalid_argument(
          "relaxation order " + std::to_string(r_) +
          " is below the minimal order " + std::to_string(prof.r_min));
    }
  }

  // Terminal contribution L_y(q) for a polynomial q on the test block.
  LinearForm Terminal(const Polynomial& q) const {
    LinearForm form;
    switch (sdp_.terminal) {
      case TerminalMoments::kEliminated:
        form.constant = EvaluateAtState(q, *p_.K.point);
        break;
      case TerminalMoments::kTimeOnly: {
        const Polynomial qt = SubstituteStates(q, *p_.K.point);
        AddScaled(form, sdp_.y_layout.Riesz(Reblock(qt, sdp_.y_layout.block())),
                  1.0, sdp_.y_offset);
        break;
      }
      case TerminalMoments::kFull:
        AddScaled(form, sdp_.y_layout.Riesz(Reblock(q, sdp_.y_layout.block())),
                  1.0, sdp_.y_offset);
        break;
    }
    return form;
  }

  void AddEqualities(bool fixed) {
    int deg_f = 0;
    for (const auto& fk : p_.f) deg_f = std::max(deg_f, fk.degree());
    const int max_deg = 2 * r_ + 1 - std::max(deg_f, 1);
    const VariableBlock& gb = sdp_.test_block;
    for (const MultiIndex& mi : MonomialBasis(gb.size(), max_deg)) {
      const Polynomial g = Reblock(Polynomial::Monomial(gb, mi), p_.block);
      const Polynomial ag = Reblock(ApplyGenerator(g, p_.f), z_block_);
      EqualityRow row;
      row.test_monomial = mi;
      const Polynomial g_terminal = fixed ? SubstituteTime(g, 1.0) : g;
      row.form = Terminal(g_terminal);
      AddScaled(row.form, sdp_.z_layout.Riesz(ag), -1.0, sdp_.z_offset);
      row.form.Normalize();
      sdp_.equalities.push_back(std::move(row));
    }
  }

  void AddObjective() {
    LinearForm obj;
    AddScaled(obj, sdp_.z_layout.Riesz(Reblock(p_.h, z_block_)), 1.0,
              sdp_.z_offset);
    const LinearForm terminal = Terminal(p_.H);
    obj.constant += terminal.constant;
    obj.terms.insert(obj.terms.end(), terminal.terms.begin(),
                     terminal.terms.end());
    obj.Normalize();
    sdp_.objective = std::move(obj);
  }

  void AddLocalizers(const MomentLayout& layout, int offset,
                     const std::vector<Polynomial>& thetas,
                     const std::vector<int>& marginal_rows,
                     const std::string& label) {
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      const Polynomial theta = Reblock(thetas[j], layout.block());
      const int d = r_ - CeilHalf(theta.degree());
      const std::vector<int> rows = options_.scope == LocalizerScope::kMarginal
                                        ? marginal_rows
                                        : std::vector<int>{};
      sdp_.blocks.push_back(
          {label + "[" + std::to_string(j + 1) + "]",
           Shifted(LocalizingMatrix(layout, theta, d, rows), offset)});
    }
  }

  void AddOccupationBlocks(bool homog) {
    const MomentLayout& zl = sdp_.z_layout;
    sdp_.blocks.push_back(
        {"moment z", Shifted(MomentMatrix(zl, r_), sdp_.z_offset)});
    AddLocalizers(zl, sdp_.z_offset, p_.X.inequalities,
                  GroupVariables(z_block_, false, true, false), "X z");
    AddLocalizers(zl, sdp_.z_offset, p_.U.inequalities,
                  GroupVariables(z_block_, false, false, true), "U z");
    if (!homog) {
      AddLocalizers(zl, sdp_.z_offset, {TimeWindow(z_block_)},
                    GroupVariables(z_block_, true, false, false), "time z");
    }
  }

  void AddTerminalBlocks(bool fixed, bool homog) {
    if (sdp_.terminal == TerminalMoments::kEliminated) return;
    const MomentLayout& yl = sdp_.y_layout;
    const VariableBlock& yb = yl.block();
    sdp_.blocks.push_back(
        {"moment y", Shifted(MomentMatrix(yl, r_), sdp_.y_offset)});
    if (sdp_.terminal == TerminalMoments::kFull) {
      AddLocalizers(yl, sdp_.y_offset, p_.K.set.inequalities,
                    GroupVariables(yb, false, true, false), "K y");
    }
    if (!fixed && !homog) {
      AddLocalizers(yl, sdp_.y_offset, {TimeWindow(yb)},
                    GroupVariables(yb, true, false, false), "time y");
    }
  }

  static Polynomial TimeWindow(const VariableBlock& b) {
    const Polynomial t = Polynomial::Variable(b, b.time_index());
    return t - t * t;
  }

  const OcpProblem& p_;
  int r_;
  RelaxationOptions options_;
  VariableBlock z_block_;
  RelaxationSdp sdp_;
};

}  // namespace

void RelaxationSdp::SetInitialState(const Eigen::VectorXd& x0_canonical) {
  if (x0_canonical.size() != test_block.n()) {
    throw std::invalid_argument("initial state has wrong dimension");
  }
  x0 = x0_canonical;
  for (EqualityRow& row : equalities) {
    const MultiIndex& mi = row.test_monomial;
    if (test_block.has_time() && mi[test_block.time_index()] > 0) {
      row.rhs = 0.0;
      continue;
    }
    double v = 1.0;
    for (int k = 0; k < test_block.n(); ++k) {
      v *= std::pow(x0[k], mi[test_block.state_index(k)]);
    }
    row.rhs = v;
  }
}

RelaxationSdp BuildFixedTime(const CanonicalProblem& problem, int r,
                             const RelaxationOptions& options) {
  if (!std::holds_alternative<FixedHorizon>(problem.problem.time)) {
    throw std::invalid_argument("BuildFixedTime needs a fixed horizon");
  }
  return Builder(problem, r, options).Build();
}

RelaxationSdp BuildFreeTime(const CanonicalProblem& problem, int r,
                            const RelaxationOptions& options) {
  if (std::holds_alternative<FixedHorizon>(problem.problem.time)) {
    throw std::invalid_argument("BuildFreeTime needs a free horizon");
  }
  return Builder(problem, r, options).Build();
}

RelaxationSdp BuildRelaxation(const CanonicalProblem& problem, int r,
                              const RelaxationOptions& options) {
  return Builder(problem, r, options).Build();
}

int TestMonomialDegree(const OcpProblem& problem, int r) {
  int deg_f = 0;
  for (const auto& fk : problem.f) deg_f = std::max(deg_f, fk.degree());
  return 2 * r + 1 - std::max(deg_f, 1);
}

RelaxationSize Describe(const RelaxationSdp& sdp) {
  RelaxationSize s;
  s.decision_length = sdp.decision_length;
  s.y_length = sdp.y_length();
  s.z_length = sdp.z_length();
  s.equalities = static_cast<int>(sdp.equalities.size());
  for (const auto& b : sdp.blocks) s.blocks.emplace_back(b.label, b.matrix.side());
  return s;
}

std::string ToString(const RelaxationSize& size) {
  std::ostringstream os;
  os << "decision " << size.decision_length << " (y " << size.y_length
     << ", z " << size.z_length << "), equalities " << size.equalities
     << ", blocks";
  for (const auto& [label, side] : size.blocks) {
    os << " " << label << ":" << side;
  }
  return os.str();
}

void WriteSdpa(const RelaxationSdp& sdp, std::ostream& out) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  const int neq = static_cast<int>(sdp.equalities.size());
  const int nblocks =
      static_cast<int>(sdp.blocks.size()) + (neq > 0 ? 2 : 0);
  out << "\"objective constant " << num(sdp.objective.constant) << "\n";
  out << sdp.decision_length << "\n" << nblocks << "\n";
  for (const auto& b : sdp.blocks) out << b.matrix.side() << " ";
  if (neq > 0) out << -neq << " " << -neq;
  out << "\n";
  std::vector<double> c(sdp.decision_length, 0.0);
  for (const auto& [pos, v] : sdp.objective.terms) c[pos] = v;
  for (int k = 0; k < sdp.decision_length; ++k) {
    out << num(c[k]) << (k + 1 < sdp.decision_length ? " " : "\n");
  }
  if (sdp.decision_length == 0) out << "\n";
  // F(x) = sum x_k F_k - F_0 with S = C + sum x_k A_k, so F_0 = -C.
  for (std::size_t b = 0; b < sdp.blocks.size(); ++b) {
    const SymbolicMatrix& m = sdp.blocks[b].matrix;
    for (int i = 0; i < m.side(); ++i) {
      for (int j = i; j < m.side(); ++j) {
        const LinearForm& e = m.entry(i, j);
        if (e.constant != 0.0) {
          out << 0 << " " << b + 1 << " " << i + 1 << " " << j + 1 << " "
              << num(-e.constant) << "\n";
        }
        for (const auto& [pos, v] : e.terms) {
          out << pos + 1 << " " << b + 1 << " " << i + 1 << " " << j + 1
              << " " << num(v) << "\n";
        }
      }
    }
  }
  for (int side = 0; side < (neq > 0 ? 2 : 0); ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    const std::size_t blk = sdp.blocks.size() + side + 1;
    for (int i = 0; i < neq; ++i) {
      const EqualityRow& row = sdp.equalities[i];
      const double f0 = sign * (row.rhs - row.form.constant);
      if (f0 != 0.0) {
        out << 0 << " " << blk << " " << i + 1 << " " << i + 1 << " "
            << num(f0) << "\n";
      }
      for (const auto& [pos, v] : row.form.terms) {
        out << pos + 1 << " " << blk << " " << i + 1 << " " << i + 1 << " "
            << num(sign * v) << "\n";
      }
    }
  }
}

}  // namespace ocplmi
