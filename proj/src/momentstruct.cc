#include "ocplmi/momentstruct.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ocplmi {

void LinearForm::Normalize() {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> merged;
  for (const auto& [pos, c] : terms) {
    if (!merged.empty() && merged.back().first == pos) {
      merged.back().second += c;
    } else {
      merged.emplace_back(pos, c);
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const auto& t) { return t.second == 0.0; }),
               merged.end());
  terms = std::move(merged);
}

double LinearForm::Evaluate(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  double s = constant;
  for (const auto& [pos, c] : terms) s += c * v[pos];
  return s;
}

MomentLayout::MomentLayout(VariableBlock block, int max_degree)
    : block_(std::move(block)) {
  if (max_degree < 0) throw std::invalid_argument("negative layout degree");
  index_ = MonomialIndex(block_.size(), max_degree);
}

LinearForm MomentLayout::Riesz(const Polynomial& p) const {
  if (p.block() != block_) {
    throw std::invalid_argument("polynomial block does not match the layout");
  }
  LinearForm form;
  for (const auto& [mi, c] : p.terms()) {
    const int pos = position(mi);
    if (pos < 0) {
      throw std::invalid_argument("monomial of degree " +
                                  std::to_string(mi.degree()) +
                                  " exceeds the layout degree " +
                                  std::to_string(max_degree()));
    }
    form.terms.emplace_back(pos, c);
  }
  form.Normalize();
  return form;
}

SymbolicMatrix::SymbolicMatrix(int side)
    : side_(side), upper_(static_cast<std::size_t>(side) * (side + 1) / 2) {}

int SymbolicMatrix::Packed(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= side_) throw std::out_of_range("SymbolicMatrix index");
  return i * side_ - i * (i - 1) / 2 + (j - i);
}

const LinearForm& SymbolicMatrix::entry(int i, int j) const {
  return upper_[Packed(i, j)];
}

LinearForm& SymbolicMatrix::mutable_entry(int i, int j) {
  return upper_[Packed(i, j)];
}

std::vector<MultiIndex> RowMonomials(const MomentLayout& layout, int order,
                                     const std::vector<int>& row_variables) {
  const int nv = layout.block().size();
  if (row_variables.empty()) return MonomialBasis(nv, order);
  std::vector<MultiIndex> rows;
  for (const MultiIndex& m :
       MonomialBasis(static_cast<int>(row_variables.size()), order)) {
    std::vector<int> e(nv, 0);
    for (std::size_t i = 0; i < row_variables.size(); ++i) {
      e.at(row_variables[i]) = m[static_cast<int>(i)];
    }
    rows.emplace_back(std::move(e));
  }
  return rows;
}

SymbolicMatrix MomentMatrix(const MomentLayout& layout, int r) {
  return LocalizingMatrix(layout, Polynomial::Constant(layout.block(), 1.0), r);
}

SymbolicMatrix LocalizingMatrix(const MomentLayout& layout,
                                const Polynomial& theta, int d,
                                const std::vector<int>& row_variables) {
  if (theta.block() != layout.block()) {
    throw std::invalid_argument("localizing polynomial block mismatch");
  }
  if (d < 0 || 2 * d + theta.degree() > layout.max_degree()) {
    throw std::invalid_argument(
        "localizing matrix of order " + std::to_string(d) + " for degree " +
        std::to_string(theta.degree()) + " needs moments beyond degree " +
        std::to_string(layout.max_degree()));
  }
  const std::vector<MultiIndex> rows = RowMonomials(layout, d, row_variables);
  const int side = static_cast<int>(rows.size());
  SymbolicMatrix out(side);
  for (int i = 0; i < side; ++i) {
    for (int j = i; j < side; ++j) {
      LinearForm& form = out.mutable_entry(i, j);
      const MultiIndex base = rows[i] + rows[j];
      for (const auto& [delta, c] : theta.terms()) {
        form.terms.emplace_back(layout.position(base + delta), c);
      }
      form.Normalize();
    }
  }
  return out;
}

std::vector<int> MarginalProjection(const MomentLayout& full,
                                    const std::vector<int>& variables) {
  const int nv = full.block().size();
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i] < 0 || variables[i] >= nv ||
        (i > 0 && variables[i] <= variables[i - 1])) {
      throw std::invalid_argument(
          "marginal variables must be increasing indices of the block");
    }
  }
  std::vector<int> map;
  for (const MultiIndex& m : RowMonomials(full, full.max_degree(), variables)) {
    map.push_back(full.position(m));
  }
  return map;
}

Eigen::MatrixXd EvaluateSymbolic(const SymbolicMatrix& matrix,
                                 const Eigen::Ref<const Eigen::VectorXd>& v) {
  const int n = matrix.side();
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const LinearForm& form = matrix.entry(i, j);
      for (const auto& t : form.terms) {
        if (t.first >= v.size()) {
          throw std::invalid_argument("moment vector too short for matrix");
        }
      }
      out(i, j) = out(j, i) = form.Evaluate(v);
    }
  }
  return out;
}

Eigen::VectorXd AtomicMoments(const MomentLayout& layout,
                              const Eigen::Ref<const Eigen::MatrixXd>& atoms,
                              const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (atoms.rows() != layout.block().size() || atoms.cols() != weights.size()) {
    throw std::invalid_argument("atom matrix shape does not match the layout");
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(layout.size());
  for (int a = 0; a < atoms.cols(); ++a) {
    for (int pos = 0; pos < layout.size(); ++pos) {
      const MultiIndex& m = layout.monomial(pos);
      double v = weights[a];
      for (int k = 0; k < m.size(); ++k) {
        for (int e = 0; e < m[k]; ++e) v *= atoms(k, a);
      }
      y[pos] += v;
    }
  }
  return y;
}

}  // namespace ocplmi
