#include "ocplmi/benchmarks.hpp"

namespace ocplmi {

OcpProblem DoubleIntegratorProblem(const Eigen::Vector2d& x0,
                                   bool add_ball_constraint) {
  OcpProblem p;
  p.block = VariableBlock(true, 2, 1);
  p.f = {ParsePolynomial("x2", p.block), ParsePolynomial("u1", p.block)};
  p.h = Polynomial::Constant(p.block, 1.0);
  p.H = Polynomial(p.block);
  p.X = {VariableGroup::kState,
         {ParsePolynomial("x2 + 1", p.block)},
         {{-3.0, 3.0}, {-1.0, 2.0}}};
  p.U = {VariableGroup::kControl,
         {ParsePolynomial("1 - u1", p.block), ParsePolynomial("1 + u1", p.block)},
         {{-1.0, 1.0}}};
  p.K.point = Eigen::VectorXd::Zero(2);
  p.x0 = x0;
  p.time = FreeHomogeneous{5.0};
  p.add_ball_constraint = add_ball_constraint;
  return p;
}

OcpProblem BrockettProblem(const Eigen::Vector3d& x0,
                           bool add_ball_constraint) {
  OcpProblem p;
  p.block = VariableBlock(true, 3, 2);
  p.f = {ParsePolynomial("u1", p.block), ParsePolynomial("u2", p.block),
         ParsePolynomial("u1*x2 - u2*x1", p.block)};
  p.h = Polynomial::Constant(p.block, 1.0);
  p.H = Polynomial(p.block);
  p.X = {VariableGroup::kState, {}, {{-3.0, 3.0}, {-3.0, 3.0}, {-3.0, 3.0}}};
  p.U = {VariableGroup::kControl,
         {ParsePolynomial("1 - u1^2 - u2^2", p.block)},
         {{-1.0, 1.0}, {-1.0, 1.0}}};
  p.K.point = Eigen::VectorXd::Zero(3);
  p.x0 = x0;
  p.time = FreeHomogeneous{5.0};
  p.add_ball_constraint = add_ball_constraint;
  return p;
}

OcpProblem ZermeloProblem(const Eigen::Vector2d& x0,
                          bool add_ball_constraint) {
  OcpProblem p;
  p.block = VariableBlock(true, 2, 2);
  p.f = {ParsePolynomial("1 - 0.1*x2 + u1", p.block),
         ParsePolynomial("u2", p.block)};
  p.h = Polynomial::Constant(p.block, 1.0);
  p.H = Polynomial(p.block);
  p.X = {VariableGroup::kState,
         {ParsePolynomial("x1 + 6", p.block), ParsePolynomial("2 - x1", p.block),
          ParsePolynomial("x2 + 2", p.block), ParsePolynomial("2 - x2", p.block)},
         {{-6.0, 2.0}, {-2.0, 2.0}}};
  const double r = kZermeloRadius;
  p.U = {VariableGroup::kControl,
         {ParsePolynomial("0.1936 - u1^2 - u2^2", p.block)},
         {{-r, r}, {-r, r}}};
  p.K.set = {VariableGroup::kState,
             {ParsePolynomial("0.1936 - x1^2 - x2^2", p.block)},
             {{-r, r}, {-r, r}}};
  p.x0 = x0;
  p.time = FreeHomogeneous{10.0};
  p.add_ball_constraint = add_ball_constraint;
  return p;
}

}  // namespace ocplmi
