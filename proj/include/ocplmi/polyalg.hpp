#pragma once

/// @file
/// Sparse multivariate polynomials over a (t | x | u) variable block.
///
/// Monomials are stored in graded lexicographic order: total degree first,
/// then by descending exponent of the first variable, then the second, and so
/// on. With variables (x1, x2) the order reads 1, x1, x2, x1^2, x1*x2, x2^2.
/// Every moment vector in the library is indexed with this order.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace ocplmi {

/// Coefficients with magnitude below this are dropped after arithmetic.
inline constexpr double kCoefficientDropTolerance = 1e-14;

/// Exponent vector, one entry per variable of a block.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  static MultiIndex Zero(int num_vars);
  static MultiIndex Unit(int num_vars, int var);

  int size() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exponents_[i]; }
  const std::vector<int>& exponents() const { return exponents_; }

  MultiIndex operator+(const MultiIndex& other) const;
  bool operator==(const MultiIndex& other) const {
    return exponents_ == other.exponents_;
  }
  bool operator!=(const MultiIndex& other) const { return !(*this == other); }

 private:
  std::vector<int> exponents_;
  int degree_{0};
};

/// Graded lexicographic order.
struct GradedLexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& m) const;
};

/// Variable layout (t | x_1..x_n | u_1..u_m). The time variable, when present,
/// is always variable 0.
class VariableBlock {
 public:
  VariableBlock() = default;
  /// Default names are t, x1..xn, u1..um.
  VariableBlock(bool has_time, int n, int m);
  VariableBlock(bool has_time, std::vector<std::string> state_names,
                std::vector<std::string> control_names);

  bool has_time() const { return has_time_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int size() const { return (has_time_ ? 1 : 0) + n_ + m_; }

  /// Throws std::logic_error when the block has no time variable.
  int time_index() const;
  int state_index(int k) const { return (has_time_ ? 1 : 0) + k; }
  int control_index(int k) const { return (has_time_ ? 1 : 0) + n_ + k; }

  bool is_time(int var) const { return has_time_ && var == 0; }
  bool is_state(int var) const;
  bool is_control(int var) const;

  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int var) const { return names_.at(var); }
  /// Returns -1 when the name is not declared.
  int find(std::string_view name) const;

  /// Same names, restricted to the requested groups.
  VariableBlock Subblock(bool keep_time, bool keep_state,
                         bool keep_control) const;

  bool operator==(const VariableBlock& other) const {
    return has_time_ == other.has_time_ && n_ == other.n_ && m_ == other.m_;
  }
  bool operator!=(const VariableBlock& other) const {
    return !(*this == other);
  }

 private:
  bool has_time_{false};
  int n_{0};
  int m_{0};
  std::vector<std::string> names_;
};

/// Sparse real polynomial with terms kept in graded lexicographic order.
/// No stored coefficient is exactly zero.
class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(VariableBlock block);
  static Polynomial Constant(const VariableBlock& block, double c);
  static Polynomial Variable(const VariableBlock& block, int var);
  static Polynomial Monomial(const VariableBlock& block, const MultiIndex& m,
                             double coef = 1.0);

  const VariableBlock& block() const { return block_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Zero polynomial has degree 0.
  int degree() const;
  /// Largest exponent of one variable over all terms.
  int degree_in(int var) const;
  bool depends_on(int var) const { return degree_in(var) > 0; }
  double coefficient(const MultiIndex& m) const;

  /// Adds c to the coefficient of m, dropping the term if it cancels.
  void AddTerm(const MultiIndex& m, double c);

  double Evaluate(const Eigen::Ref<const Eigen::VectorXd>& point) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator-() const;
  Polynomial operator*(double c) const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial Pow(int k) const;

  /// Exact term-map equality (same block and coefficients).
  bool operator==(const Polynomial& other) const;
  bool operator!=(const Polynomial& other) const { return !(*this == other); }

  /// Largest coefficient difference in absolute value.
  double MaxCoefficientDistance(const Polynomial& other) const;

 private:
  void RequireSameBlock(const Polynomial& other) const;

  VariableBlock block_;
  TermMap terms_;
};

inline Polynomial operator*(double c, const Polynomial& p) { return p * c; }

/// Thrown by ParsePolynomial; `position` is the 0-based character offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parses `+ - * ^ ( )`, decimal coefficients, integer exponents and the
/// block's variable names. `*` may be omitted between factors ("2x1").
Polynomial ParsePolynomial(std::string_view text, const VariableBlock& block);

/// Round-trippable text form (coefficients printed with 17 significant
/// digits).
std::string ToString(const Polynomial& p);

/// All multi-indices of degree <= max_deg in graded lexicographic order.
std::vector<MultiIndex> MonomialBasis(int num_vars, int max_deg);

/// binomial(num_vars + max_deg, max_deg)
std::size_t MonomialCount(int num_vars, int max_deg);

/// Position lookup for MonomialBasis.
class MonomialIndex {
 public:
  MonomialIndex() = default;
  MonomialIndex(int num_vars, int max_deg);

  int num_vars() const { return num_vars_; }
  int max_degree() const { return max_deg_; }
  std::size_t size() const { return monomials_.size(); }
  const MultiIndex& at(std::size_t pos) const { return monomials_.at(pos); }
  const std::vector<MultiIndex>& monomials() const { return monomials_; }
  /// Returns -1 when the monomial is outside the basis.
  int position(const MultiIndex& m) const;

 private:
  int num_vars_{0};
  int max_deg_{0};
  std::vector<MultiIndex> monomials_;
  std::unordered_map<MultiIndex, int, MultiIndexHash> lookup_;
};

Polynomial Differentiate(const Polynomial& p, int var);

/// v -> scale * v + offset, one map per variable.
struct AffineMap {
  double scale{1.0};
  double offset{0.0};
};

/// Exact composition p(a_1 v_1 + b_1, ..., a_k v_k + b_k).
Polynomial AffineSubstitute(const Polynomial& p,
                            const std::vector<AffineMap>& maps);

/// Generator of the controlled dynamics applied to a test function:
///   A phi = d phi/dt + sum_k f_k * d phi/dx_k.
/// phi must not depend on controls; f has one component per state.
Polynomial ApplyGenerator(const Polynomial& phi,
                          const std::vector<Polynomial>& f);

/// Moves a polynomial to another block by variable group (t -> t,
/// x_k -> x_k, u_k -> u_k). Throws std::invalid_argument if a variable that
/// occurs in p does not exist in the target block.
Polynomial Reblock(const Polynomial& p, const VariableBlock& target);

/// Replaces every state variable x_k by the constant point[k].
Polynomial SubstituteStates(const Polynomial& p,
                            const Eigen::Ref<const Eigen::VectorXd>& point);

/// Replaces the time variable by the constant value.
Polynomial SubstituteTime(const Polynomial& p, double value);

}  // namespace ocplmi
