#include "ocplmi/polyalg.hpp"

#include <random>

#include <gtest/gtest.h>

namespace ocplmi {
namespace {

MultiIndex MI(std::vector<int> e) { return MultiIndex(std::move(e)); }

Polynomial RandomPolynomial(const VariableBlock& block, int max_deg,
                            bool allow_controls, std::mt19937& rng) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::bernoulli_distribution keep(0.5);
  Polynomial p(block);
  for (const MultiIndex& m : MonomialBasis(block.size(), max_deg)) {
    bool uses_control = false;
    for (int k = 0; k < block.m(); ++k) {
      if (m[block.control_index(k)] > 0) uses_control = true;
    }
    if (uses_control && !allow_controls) continue;
    if (keep(rng)) p.AddTerm(m, coef(rng));
  }
  return p;
}

TEST(ParsePolynomialTest, ReadsSumOfMonomials) {
  const VariableBlock block(false, 2, 0);
  const Polynomial p = ParsePolynomial("x1^2 + 2*x2", block);
  ASSERT_EQ(p.terms().size(), 2u);
  EXPECT_EQ(p.coefficient(MI({2, 0})), 1.0);
  EXPECT_EQ(p.coefficient(MI({0, 1})), 2.0);
}

TEST(ParsePolynomialTest, ZeroIsEmpty) {
  const VariableBlock block(false, 2, 0);
  EXPECT_TRUE(ParsePolynomial("0", block).is_zero());
  EXPECT_TRUE(ParsePolynomial("x1 - x1", block).is_zero());
}

TEST(ParsePolynomialTest, ExpandsParentheses) {
  const VariableBlock block(true, 0, 0);
  const Polynomial p = ParsePolynomial("t*(1-t)", block);
  ASSERT_EQ(p.terms().size(), 2u);
  EXPECT_EQ(p.coefficient(MI({1})), 1.0);
  EXPECT_EQ(p.coefficient(MI({2})), -1.0);
}

TEST(ParsePolynomialTest, ImplicitMultiplicationAndDecimals) {
  const VariableBlock block(false, 2, 1);
  const Polynomial p = ParsePolynomial("  -0.5x1 x2 + 1e-1 u1^3 - (x2)^2", block);
  EXPECT_EQ(p.coefficient(MI({1, 1, 0})), -0.5);
  EXPECT_DOUBLE_EQ(p.coefficient(MI({0, 0, 3})), 0.1);
  EXPECT_EQ(p.coefficient(MI({0, 2, 0})), -1.0);
}

TEST(ParsePolynomialTest, ReportsErrors) {
  const VariableBlock block(false, 2, 0);
  try {
    ParsePolynomial("x1 + y", block);
    FAIL() << "expected unknown variable";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 5u);
    EXPECT_NE(std::string(e.what()).find("unknown variable 'y'"),
              std::string::npos);
  }
  try {
    ParsePolynomial("x1^-2", block);
    FAIL() << "expected negative exponent";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("negative exponent"),
              std::string::npos);
  }
  EXPECT_THROW(ParsePolynomial("x1 + ", block), ParseError);
  EXPECT_THROW(ParsePolynomial("(x1 + x2", block), ParseError);
  EXPECT_THROW(ParsePolynomial("x1 $ x2", block), ParseError);
  EXPECT_THROW(ParsePolynomial("", block), ParseError);
}

TEST(ParsePolynomialTest, PrintParseRoundTrip) {
  std::mt19937 rng(7);
  const VariableBlock block(true, 3, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const Polynomial p = RandomPolynomial(block, 4, true, rng);
    const Polynomial q = ParsePolynomial(ToString(p), block);
    EXPECT_EQ(p, q) << ToString(p);
    EXPECT_EQ(ToString(q), ToString(p));
  }
}

TEST(MonomialBasisTest, GradedLexOrder) {
  const auto basis = MonomialBasis(2, 2);
  ASSERT_EQ(basis.size(), 6u);
  EXPECT_EQ(basis[0], MI({0, 0}));
  EXPECT_EQ(basis[1], MI({1, 0}));
  EXPECT_EQ(basis[2], MI({0, 1}));
  EXPECT_EQ(basis[3], MI({2, 0}));
  EXPECT_EQ(basis[4], MI({1, 1}));
  EXPECT_EQ(basis[5], MI({0, 2}));
}

TEST(MonomialBasisTest, Sizes) {
  EXPECT_EQ(MonomialBasis(1, 3).size(), 4u);
  EXPECT_EQ(MonomialBasis(0, 5).size(), 1u);
  for (int n = 0; n <= 5; ++n) {
    for (int d = 0; d <= 6; ++d) {
      EXPECT_EQ(MonomialBasis(n, d).size(), MonomialCount(n, d));
    }
  }
  EXPECT_EQ(MonomialCount(5, 8), 1287u);
}

TEST(MonomialBasisTest, PositionInvertsEnumeration) {
  const MonomialIndex index(4, 5);
  for (std::size_t i = 0; i < index.size(); ++i) {
    EXPECT_EQ(index.position(index.at(i)), static_cast<int>(i));
  }
  EXPECT_EQ(index.position(MI({6, 0, 0, 0})), -1);
  // Sorted under the comparator.
  for (std::size_t i = 1; i < index.size(); ++i) {
    EXPECT_TRUE(GradedLexLess{}(index.at(i - 1), index.at(i)));
  }
}

TEST(DifferentiateTest, Examples) {
  const VariableBlock block(true, 2, 0);
  const Polynomial x1sq = ParsePolynomial("x1^2", block);
  EXPECT_EQ(Differentiate(x1sq, block.state_index(0)),
            ParsePolynomial("2*x1", block));
  EXPECT_TRUE(Differentiate(ParsePolynomial("x1", block), 0).is_zero());
  EXPECT_EQ(Differentiate(ParsePolynomial("t*x2^3", block), block.state_index(1)),
            ParsePolynomial("3*t*x2^2", block));
  EXPECT_THROW(Differentiate(x1sq, 3), std::invalid_argument);
}

TEST(AffineSubstituteTest, Examples) {
  const VariableBlock block(false, 2, 0);
  const Polynomial p = ParsePolynomial("x1^2", block);
  EXPECT_EQ(AffineSubstitute(p, {{2.0, 1.0}, {1.0, 0.0}}),
            ParsePolynomial("4*x1^2 + 4*x1 + 1", block));
  const Polynomial q = ParsePolynomial("3*x1*x2 - x2^3 + 2", block);
  EXPECT_EQ(AffineSubstitute(q, {{1.0, 0.0}, {1.0, 0.0}}), q);
  const Polynomial r = ParsePolynomial("x1*x2", block);
  EXPECT_EQ(AffineSubstitute(r, {{-1.0, 0.0}, {-1.0, 0.0}}), r);
}

TEST(AffineSubstituteTest, PreservesDegreeAndValues) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  const VariableBlock block(true, 2, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Polynomial p = RandomPolynomial(block, 4, true, rng);
    std::vector<AffineMap> maps;
    for (int v = 0; v < block.size(); ++v) maps.push_back({uni(rng) + 2.0, uni(rng)});
    const Polynomial q = AffineSubstitute(p, maps);
    EXPECT_EQ(q.degree(), p.degree());
    Eigen::VectorXd pt(block.size()), mapped(block.size());
    for (int v = 0; v < block.size(); ++v) {
      pt[v] = uni(rng);
      mapped[v] = maps[v].scale * pt[v] + maps[v].offset;
    }
    EXPECT_NEAR(q.Evaluate(pt), p.Evaluate(mapped),
                1e-10 * (1.0 + std::abs(p.Evaluate(mapped))));
  }
}

TEST(ApplyGeneratorTest, Examples) {
  const VariableBlock block(true, 2, 1);
  const std::vector<Polynomial> f = {ParsePolynomial("x2", block),
                                     ParsePolynomial("u1", block)};
  EXPECT_TRUE(ApplyGenerator(Polynomial::Constant(block, 1.0), f).is_zero());
  EXPECT_EQ(ApplyGenerator(ParsePolynomial("t", block), f),
            Polynomial::Constant(block, 1.0));
  EXPECT_EQ(ApplyGenerator(ParsePolynomial("x1", block), f),
            ParsePolynomial("x2", block));
}

TEST(ApplyGeneratorTest, RejectsBadInput) {
  const VariableBlock block(true, 2, 1);
  const std::vector<Polynomial> f = {ParsePolynomial("x2", block)};
  EXPECT_THROW(ApplyGenerator(ParsePolynomial("x1", block), f),
               std::invalid_argument);
  const std::vector<Polynomial> g = {ParsePolynomial("x2", block),
                                     ParsePolynomial("u1", block)};
  EXPECT_THROW(ApplyGenerator(ParsePolynomial("u1*x1", block), g),
               std::invalid_argument);
}

TEST(ApplyGeneratorTest, IsLinear) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  const VariableBlock block(true, 3, 2);
  std::vector<Polynomial> f;
  for (int k = 0; k < 3; ++k) f.push_back(RandomPolynomial(block, 2, true, rng));
  for (int trial = 0; trial < 20; ++trial) {
    const Polynomial phi = RandomPolynomial(block, 3, false, rng);
    const Polynomial psi = RandomPolynomial(block, 3, false, rng);
    const double a = uni(rng), b = uni(rng);
    const Polynomial lhs = ApplyGenerator(phi * a + psi * b, f);
    const Polynomial rhs =
        ApplyGenerator(phi, f) * a + ApplyGenerator(psi, f) * b;
    EXPECT_LT(lhs.MaxCoefficientDistance(rhs), 1e-10);
  }
}

// A phi at (t, x, u) equals d/ds phi(t + s, x + s f(t,x,u)) at s = 0.
TEST(ApplyGeneratorTest, MatchesDirectionalDerivative) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const VariableBlock block(true, 2, 1);
  const std::vector<Polynomial> f = {ParsePolynomial("x2 + t*u1", block),
                                     ParsePolynomial("u1 - x1^2", block)};
  for (int trial = 0; trial < 30; ++trial) {
    const Polynomial phi = RandomPolynomial(block, 4, false, rng);
    const Polynomial aphi = ApplyGenerator(phi, f);
    Eigen::VectorXd pt(4);
    for (int i = 0; i < 4; ++i) pt[i] = uni(rng);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(4);
    dir[0] = 1.0;
    dir[1] = f[0].Evaluate(pt);
    dir[2] = f[1].Evaluate(pt);
    const double h = 1e-5;
    const double fd =
        (phi.Evaluate(pt + h * dir) - phi.Evaluate(pt - h * dir)) / (2 * h);
    const double exact = aphi.Evaluate(pt);
    EXPECT_LE(std::abs(fd - exact), 1e-6 * std::max(1.0, std::abs(exact)));
  }
}

TEST(ReblockTest, MovesGroups) {
  const VariableBlock full(true, 2, 1);
  const VariableBlock states = full.Subblock(false, true, false);
  const Polynomial p = ParsePolynomial("x1*x2 + 3", full);
  const Polynomial q = Reblock(p, states);
  EXPECT_EQ(q.block(), states);
  EXPECT_EQ(q, ParsePolynomial("x1*x2 + 3", states));
  EXPECT_EQ(Reblock(q, full), p);
  EXPECT_THROW(Reblock(ParsePolynomial("u1", full), states),
               std::invalid_argument);
}

}  // namespace
}  // namespace ocplmi
