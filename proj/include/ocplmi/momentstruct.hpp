#pragma once

/// @file
/// Symbolic moment and localizing matrices over a truncated moment vector.

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ocplmi/polyalg.hpp"

namespace ocplmi {

/// Affine form constant + sum coeff * v[position].
struct LinearForm {
  double constant{0.0};
  /// Sorted by position, no repeated positions.
  std::vector<std::pair<int, double>> terms;

  /// Merges duplicates and drops zero coefficients.
  void Normalize();
  double Evaluate(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  bool operator==(const LinearForm& other) const {
    return constant == other.constant && terms == other.terms;
  }
};

/// Moments y_alpha of every monomial of degree <= max_degree over `block`,
/// flattened in graded lexicographic order.
class MomentLayout {
 public:
  MomentLayout() = default;
  MomentLayout(VariableBlock block, int max_degree);

  const VariableBlock& block() const { return block_; }
  int max_degree() const { return index_.max_degree(); }
  int size() const { return static_cast<int>(index_.size()); }
  const MultiIndex& monomial(int pos) const { return index_.at(pos); }
  /// -1 when the monomial is outside the layout.
  int position(const MultiIndex& m) const { return index_.position(m); }
  const MonomialIndex& index() const { return index_; }

  /// L(p) = sum_alpha p_alpha y_alpha. Throws if p has degree above
  /// max_degree or lives on another block.
  LinearForm Riesz(const Polynomial& p) const;

 private:
  VariableBlock block_;
  MonomialIndex index_;
};

/// Symmetric matrix of linear forms; only the upper triangle is stored.
class SymbolicMatrix {
 public:
  SymbolicMatrix() = default;
  explicit SymbolicMatrix(int side);

  int side() const { return side_; }
  const LinearForm& entry(int i, int j) const;
  LinearForm& mutable_entry(int i, int j);

 private:
  int Packed(int i, int j) const;

  int side_{0};
  std::vector<LinearForm> upper_;
};

/// Row/column monomials of degree <= order in the chosen variables of the
/// layout's block (all variables when `row_variables` is empty).
std::vector<MultiIndex> RowMonomials(const MomentLayout& layout, int order,
                                     const std::vector<int>& row_variables = {});

/// M_r(y)(a, b) = y_{a+b}; rows over all variables of the layout.
SymbolicMatrix MomentMatrix(const MomentLayout& layout, int r);

/// M_d(theta y)(a, b) = sum_delta theta_delta y_{delta+a+b}.
/// theta must live on the layout's block. Rows range over monomials of
/// degree <= d in `row_variables` (all variables when empty).
/// Throws std::invalid_argument when 2d + deg theta exceeds the layout.
SymbolicMatrix LocalizingMatrix(const MomentLayout& layout,
                                const Polynomial& theta, int d,
                                const std::vector<int>& row_variables = {});

/// Maps each position of the marginal layout on `variables` (a subset of the
/// layout's variables, kept in order) to the full-layout position of the
/// same monomial padded with zero exponents.
std::vector<int> MarginalProjection(const MomentLayout& full,
                                    const std::vector<int>& variables);

/// Numeric symmetric matrix for a given moment vector.
Eigen::MatrixXd EvaluateSymbolic(const SymbolicMatrix& matrix,
                                 const Eigen::Ref<const Eigen::VectorXd>& v);

/// Moments of sum_i weights[i] * delta_{atoms.col(i)} in the layout.
Eigen::VectorXd AtomicMoments(const MomentLayout& layout,
                              const Eigen::Ref<const Eigen::MatrixXd>& atoms,
                              const Eigen::Ref<const Eigen::VectorXd>& weights);

}  // namespace ocplmi
