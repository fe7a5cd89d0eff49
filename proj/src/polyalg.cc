#include "ocplmi/polyalg.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ocplmi {

MultiIndex::MultiIndex(std::vector<int> exponents)
    : exponents_(std::move(exponents)) {
  degree_ = 0;
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    degree_ += e;
  }
}

MultiIndex MultiIndex::Zero(int num_vars) {
  return MultiIndex(std::vector<int>(num_vars, 0));
}

MultiIndex MultiIndex::Unit(int num_vars, int var) {
  std::vector<int> e(num_vars, 0);
  e.at(var) = 1;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (size() != other.size()) {
    throw std::invalid_argument("MultiIndex: size mismatch in addition");
  }
  std::vector<int> e(exponents_);
  for (int i = 0; i < size(); ++i) e[i] += other.exponents_[i];
  return MultiIndex(std::move(e));
}

bool GradedLexLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const int n = std::min(a.size(), b.size());
  for (int i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return a.size() < b.size();
}

std::size_t MultiIndexHash::operator()(const MultiIndex& m) const {
  std::size_t h = 1469598103934665603ull;
  for (int e : m.exponents()) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ull + (h << 6) +
         (h >> 2);
  }
  return h;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> DefaultNames(char prefix, int count) {
  std::vector<std::string> names;
  for (int i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i + 1));
  return names;
}

}  // namespace

VariableBlock::VariableBlock(bool has_time, int n, int m)
    : VariableBlock(has_time, DefaultNames('x', n), DefaultNames('u', m)) {}

VariableBlock::VariableBlock(bool has_time,
                             std::vector<std::string> state_names,
                             std::vector<std::string> control_names)
    : has_time_(has_time),
      n_(static_cast<int>(state_names.size())),
      m_(static_cast<int>(control_names.size())) {
  if (has_time_) names_.push_back("t");
  for (auto& s : state_names) names_.push_back(std::move(s));
  for (auto& s : control_names) names_.push_back(std::move(s));
  for (std::size_t i = 0; i < names_.size(); ++i) {
    for (std::size_t j = i + 1; j < names_.size(); ++j) {
      if (names_[i] == names_[j]) {
        throw std::invalid_argument("VariableBlock: duplicate variable name '" +
                                    names_[i] + "'");
      }
    }
  }
}

int VariableBlock::time_index() const {
  if (!has_time_) throw std::logic_error("VariableBlock has no time variable");
  return 0;
}

bool VariableBlock::is_state(int var) const {
  const int first = has_time_ ? 1 : 0;
  return var >= first && var < first + n_;
}

bool VariableBlock::is_control(int var) const {
  const int first = (has_time_ ? 1 : 0) + n_;
  return var >= first && var < first + m_;
}

int VariableBlock::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

VariableBlock VariableBlock::Subblock(bool keep_time, bool keep_state,
                                      bool keep_control) const {
  std::vector<std::string> xs, us;
  if (keep_state) {
    for (int k = 0; k < n_; ++k) xs.push_back(names_[state_index(k)]);
  }
  if (keep_control) {
    for (int k = 0; k < m_; ++k) us.push_back(names_[control_index(k)]);
  }
  return VariableBlock(keep_time && has_time_, std::move(xs), std::move(us));
}

// ---------------------------------------------------------------------------

Polynomial::Polynomial(VariableBlock block) : block_(std::move(block)) {}

Polynomial Polynomial::Constant(const VariableBlock& block, double c) {
  Polynomial p(block);
  p.AddTerm(MultiIndex::Zero(block.size()), c);
  return p;
}

Polynomial Polynomial::Variable(const VariableBlock& block, int var) {
  Polynomial p(block);
  p.AddTerm(MultiIndex::Unit(block.size(), var), 1.0);
  return p;
}

Polynomial Polynomial::Monomial(const VariableBlock& block, const MultiIndex& m,
                                double coef) {
  if (m.size() != block.size()) {
    throw std::invalid_argument("Polynomial::Monomial: size mismatch");
  }
  Polynomial p(block);
  p.AddTerm(m, coef);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

int Polynomial::degree_in(int var) const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m[var]);
  return d;
}

double Polynomial::coefficient(const MultiIndex& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::AddTerm(const MultiIndex& m, double c) {
  if (m.size() != block_.size()) {
    throw std::invalid_argument("Polynomial::AddTerm: size mismatch");
  }
  if (std::abs(c) < kCoefficientDropTolerance) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (std::abs(it->second) < kCoefficientDropTolerance) terms_.erase(it);
  }
}

double Polynomial::Evaluate(
    const Eigen::Ref<const Eigen::VectorXd>& point) const {
  if (point.size() != block_.size()) {
    throw std::invalid_argument("Polynomial::Evaluate: point size mismatch");
  }
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double v = c;
    for (int i = 0; i < m.size(); ++i) {
      if (m[i] > 0) v *= std::pow(point[i], m[i]);
    }
    sum += v;
  }
  return sum;
}

void Polynomial::RequireSameBlock(const Polynomial& other) const {
  if (block_ != other.block_) {
    throw std::invalid_argument("Polynomial: operands use different blocks");
  }
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  Polynomial r(*this);
  r += other;
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  Polynomial r(*this);
  r -= other;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  RequireSameBlock(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  RequireSameBlock(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, -c);
  return *this;
}

Polynomial Polynomial::operator-() const { return *this * -1.0; }

Polynomial Polynomial::operator*(double c) const {
  Polynomial r(block_);
  for (const auto& [m, v] : terms_) r.AddTerm(m, v * c);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  RequireSameBlock(other);
  Polynomial r(block_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) r.AddTerm(ma + mb, ca * cb);
  }
  return r;
}

Polynomial Polynomial::Pow(int k) const {
  if (k < 0) throw std::invalid_argument("Polynomial::Pow: negative exponent");
  Polynomial result = Constant(block_, 1.0);
  Polynomial base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

bool Polynomial::operator==(const Polynomial& other) const {
  return block_ == other.block_ && terms_ == other.terms_;
}

double Polynomial::MaxCoefficientDistance(const Polynomial& other) const {
  RequireSameBlock(other);
  double d = 0.0;
  for (const auto& [m, c] : terms_) {
    d = std::max(d, std::abs(c - other.coefficient(m)));
  }
  for (const auto& [m, c] : other.terms_) {
    d = std::max(d, std::abs(c - coefficient(m)));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*')? unary)*
//   unary  := ('+' | '-') unary | power
//   power  := primary ('^' integer)?
//   primary:= number | identifier | '(' expr ')'

namespace {

class Parser {
 public:
  Parser(std::string_view text, const VariableBlock& block)
      : text_(text), block_(block) {}

  Polynomial Parse() {
    SkipSpace();
    if (pos_ == text_.size()) throw ParseError("empty polynomial", pos_);
    Polynomial p = Expr();
    SkipSpace();
    if (pos_ != text_.size()) {
      throw ParseError(std::string("unexpected character '") + text_[pos_] +
                           "' at position " + std::to_string(pos_),
                       pos_);
    }
    return p;
  }

 private:
  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool Peek(char c) {
    SkipSpace();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool StartsFactor() {
    SkipSpace();
    if (pos_ >= text_.size()) return false;
    const char c = text_[pos_];
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '.' || c == '(';
  }

  Polynomial Expr() {
    Polynomial p = Term();
    while (true) {
      if (Peek('+')) {
        ++pos_;
        p += Term();
      } else if (Peek('-')) {
        ++pos_;
        p -= Term();
      } else {
        return p;
      }
    }
  }

  Polynomial Term() {
    Polynomial p = Unary();
    while (true) {
      if (Peek('*')) {
        ++pos_;
        p = p * Unary();
      } else if (StartsFactor()) {
        p = p * Unary();
      } else {
        return p;
      }
    }
  }

  Polynomial Unary() {
    if (Peek('-')) {
      ++pos_;
      return -Unary();
    }
    if (Peek('+')) {
      ++pos_;
      return Unary();
    }
    return Power();
  }

  Polynomial Power() {
    Polynomial base = Primary();
    if (Peek('^')) {
      ++pos_;
      SkipSpace();
      const std::size_t at = pos_;
      bool negative = false;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        negative = text_[pos_] == '-';
        ++pos_;
        SkipSpace();
      }
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      if (start == pos_) {
        throw ParseError("expected integer exponent at position " +
                             std::to_string(start),
                         start);
      }
      if (negative) {
        throw ParseError(
            "negative exponent at position " + std::to_string(at), at);
      }
      int k = 0;
      std::from_chars(text_.data() + start, text_.data() + pos_, k);
      return base.Pow(k);
    }
    return base;
  }

  Polynomial Primary() {
    SkipSpace();
    if (pos_ >= text_.size()) {
      throw ParseError("unexpected end of input at position " +
                           std::to_string(pos_),
                       pos_);
    }
    const char c = text_[pos_];
    if (c == '(') {
      const std::size_t open = pos_;
      ++pos_;
      Polynomial p = Expr();
      if (!Peek(')')) {
        throw ParseError("unbalanced '(' opened at position " +
                             std::to_string(open),
                         pos_);
      }
      ++pos_;
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return Number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view name = text_.substr(start, pos_ - start);
      const int var = block_.find(name);
      if (var < 0) {
        throw ParseError("unknown variable '" + std::string(name) +
                             "' at position " + std::to_string(start),
                         start);
      }
      return Polynomial::Variable(block_, var);
    }
    throw ParseError(std::string("unexpected character '") + c +
                         "' at position " + std::to_string(pos_),
                     pos_);
  }

  Polynomial Number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.')) {
      ++pos_;
    }
    // Optional exponent part, e.g. 1e-3 or 2.5E+2.
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
        ++look;
      }
      if (look < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          ++pos_;
        }
      }
    }
    const std::string token(text_.substr(start, pos_ - start));
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) {
      throw ParseError("malformed number '" + token + "' at position " +
                           std::to_string(start),
                       start);
    }
    return Polynomial::Constant(block_, value);
  }

  std::string_view text_;
  const VariableBlock& block_;
  std::size_t pos_{0};
};

std::string FormatCoefficient(double c) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", c);
  return buf;
}

}  // namespace

Polynomial ParsePolynomial(std::string_view text, const VariableBlock& block) {
  return Parser(text, block).Parse();
}

std::string ToString(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    double mag = c;
    if (first) {
      if (c < 0) {
        out << "-";
        mag = -c;
      }
    } else {
      out << (c < 0 ? " - " : " + ");
      mag = std::abs(c);
    }
    first = false;
    std::string factors;
    for (int i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (!factors.empty()) factors += "*";
      factors += p.block().name(i);
      if (m[i] > 1) factors += "^" + std::to_string(m[i]);
    }
    if (factors.empty()) {
      out << FormatCoefficient(mag);
    } else if (mag == 1.0) {
      out << factors;
    } else {
      out << FormatCoefficient(mag) << "*" << factors;
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------

namespace {

// Appends, in graded lex order, every exponent vector of exactly `degree`
// over variables [var, num_vars).
void EnumerateDegree(int var, int num_vars, int degree, std::vector<int>& cur,
                     std::vector<MultiIndex>& out) {
  if (var == num_vars - 1) {
    cur[var] = degree;
    out.emplace_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[var] = e;
    EnumerateDegree(var + 1, num_vars, degree - e, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

std::vector<MultiIndex> MonomialBasis(int num_vars, int max_deg) {
  if (num_vars < 0 || max_deg < 0) {
    throw std::invalid_argument("MonomialBasis: negative argument");
  }
  std::vector<MultiIndex> out;
  out.reserve(MonomialCount(num_vars, max_deg));
  if (num_vars == 0) {
    out.emplace_back(std::vector<int>{});
    return out;
  }
  std::vector<int> cur(num_vars, 0);
  for (int d = 0; d <= max_deg; ++d) EnumerateDegree(0, num_vars, d, cur, out);
  return out;
}

std::size_t MonomialCount(int num_vars, int max_deg) {
  // binomial(num_vars + max_deg, max_deg), computed incrementally.
  std::size_t result = 1;
  for (int i = 1; i <= max_deg; ++i) {
    result = result * static_cast<std::size_t>(num_vars + i) /
             static_cast<std::size_t>(i);
  }
  return result;
}

MonomialIndex::MonomialIndex(int num_vars, int max_deg)
    : num_vars_(num_vars),
      max_deg_(max_deg),
      monomials_(MonomialBasis(num_vars, max_deg)) {
  lookup_.reserve(monomials_.size());
  for (std::size_t i = 0; i < monomials_.size(); ++i) {
    lookup_.emplace(monomials_[i], static_cast<int>(i));
  }
}

int MonomialIndex::position(const MultiIndex& m) const {
  auto it = lookup_.find(m);
  return it == lookup_.end() ? -1 : it->second;
}

// ---------------------------------------------------------------------------

Polynomial Differentiate(const Polynomial& p, int var) {
  if (var < 0 || var >= p.block().size()) {
    throw std::invalid_argument("Differentiate: variable index out of range");
  }
  Polynomial r(p.block());
  for (const auto& [m, c] : p.terms()) {
    if (m[var] == 0) continue;
    std::vector<int> e = m.exponents();
    const int k = e[var]--;
    r.AddTerm(MultiIndex(std::move(e)), c * k);
  }
  return r;
}

Polynomial AffineSubstitute(const Polynomial& p,
                            const std::vector<AffineMap>& maps) {
  const VariableBlock& block = p.block();
  if (static_cast<int>(maps.size()) != block.size()) {
    throw std::invalid_argument("AffineSubstitute: one map per variable");
  }
  // powers[v][k] = (a_v v + b_v)^k, built lazily up to the needed degree.
  std::vector<std::vector<Polynomial>> powers(block.size());
  for (int v = 0; v < block.size(); ++v) {
    const int need = p.degree_in(v);
    Polynomial lin = Polynomial::Variable(block, v) * maps[v].scale +
                     Polynomial::Constant(block, maps[v].offset);
    powers[v].push_back(Polynomial::Constant(block, 1.0));
    for (int k = 1; k <= need; ++k) powers[v].push_back(powers[v].back() * lin);
  }
  Polynomial r(block);
  for (const auto& [m, c] : p.terms()) {
    Polynomial term = Polynomial::Constant(block, c);
    for (int v = 0; v < block.size(); ++v) {
      if (m[v] > 0) term = term * powers[v][m[v]];
    }
    r += term;
  }
  return r;
}

Polynomial ApplyGenerator(const Polynomial& phi,
                          const std::vector<Polynomial>& f) {
  const VariableBlock& block = phi.block();
  if (static_cast<int>(f.size()) != block.n()) {
    throw std::invalid_argument(
        "ApplyGenerator: dynamics has " + std::to_string(f.size()) +
        " components but the state block has " + std::to_string(block.n()));
  }
  for (int k = 0; k < block.m(); ++k) {
    if (phi.depends_on(block.control_index(k))) {
      throw std::invalid_argument(
          "ApplyGenerator: test function depends on a control variable");
    }
  }
  Polynomial r(block);
  if (block.has_time()) r += Differentiate(phi, block.time_index());
  for (int k = 0; k < block.n(); ++k) {
    if (f[k].block() != block) {
      throw std::invalid_argument("ApplyGenerator: dynamics block mismatch");
    }
    const Polynomial d = Differentiate(phi, block.state_index(k));
    if (!d.is_zero()) r += d * f[k];
  }
  return r;
}

Polynomial Reblock(const Polynomial& p, const VariableBlock& target) {
  const VariableBlock& src = p.block();
  std::vector<int> dest(src.size(), -1);
  if (src.has_time() && target.has_time()) dest[0] = 0;
  for (int k = 0; k < src.n(); ++k) {
    if (k < target.n()) dest[src.state_index(k)] = target.state_index(k);
  }
  for (int k = 0; k < src.m(); ++k) {
    if (k < target.m()) dest[src.control_index(k)] = target.control_index(k);
  }
  Polynomial r(target);
  for (const auto& [m, c] : p.terms()) {
    std::vector<int> e(target.size(), 0);
    for (int i = 0; i < src.size(); ++i) {
      if (m[i] == 0) continue;
      if (dest[i] < 0) {
        throw std::invalid_argument("Reblock: variable '" + src.name(i) +
                                    "' does not exist in the target block");
      }
      e[dest[i]] = m[i];
    }
    r.AddTerm(MultiIndex(std::move(e)), c);
  }
  return r;
}

Polynomial SubstituteStates(const Polynomial& p,
                            const Eigen::Ref<const Eigen::VectorXd>& point) {
  const VariableBlock& block = p.block();
  if (point.size() != block.n()) {
    throw std::invalid_argument("SubstituteStates: point size mismatch");
  }
  Polynomial r(block);
  for (const auto& [m, c] : p.terms()) {
    std::vector<int> e = m.exponents();
    double v = c;
    for (int k = 0; k < block.n(); ++k) {
      const int idx = block.state_index(k);
      if (e[idx] > 0) {
        v *= std::pow(point[k], e[idx]);
        e[idx] = 0;
      }
    }
    r.AddTerm(MultiIndex(std::move(e)), v);
  }
  return r;
}

Polynomial SubstituteTime(const Polynomial& p, double value) {
  const VariableBlock& block = p.block();
  if (!block.has_time()) return p;
  Polynomial r(block);
  for (const auto& [m, c] : p.terms()) {
    std::vector<int> e = m.exponents();
    const double v = c * std::pow(value, e[0]);
    e[0] = 0;
    r.AddTerm(MultiIndex(std::move(e)), v);
  }
  return r;
}

}  // namespace ocplmi
