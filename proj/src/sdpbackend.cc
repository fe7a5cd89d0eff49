#include "ocplmi/sdpbackend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace ocplmi {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Entry {
  int i;
  int j;
  double v;
};

// One PSD block: S = C + sum_k x_k A_k with A_k stored as full (both
// triangles) entry lists.
struct BlockData {
  int n{0};
  MatrixXd C;
  std::vector<int> vars;
  std::vector<std::vector<Entry>> entries;
};

BlockData MakeBlock(const SymbolicMatrix& m) {
  BlockData b;
  b.n = m.side();
  b.C = MatrixXd::Zero(b.n, b.n);
  std::map<int, std::vector<Entry>> by_var;
  for (int i = 0; i < b.n; ++i) {
    for (int j = i; j < b.n; ++j) {
      const LinearForm& f = m.entry(i, j);
      b.C(i, j) = b.C(j, i) = f.constant;
      for (const auto& [k, v] : f.terms) {
        by_var[k].push_back({i, j, v});
        if (i != j) by_var[k].push_back({j, i, v});
      }
    }
  }
  for (auto& [k, list] : by_var) {
    b.vars.push_back(k);
    b.entries.push_back(std::move(list));
  }
  return b;
}

// z^T m z for symmetric m.
MatrixXd Congruence(const MatrixXd& m, const MatrixXd& z) {
  const MatrixXd mz = m * z;
  MatrixXd out = z.transpose() * mz;
  return 0.5 * (out + out.transpose());
}

MatrixXd Sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

double Inner(const MatrixXd& a, const MatrixXd& b) {
  return (a.array() * b.array()).sum();
}

// Largest alpha with V + alpha dV psd (infinity if none binds).
double MaxStep(const MatrixXd& V, const MatrixXd& dV) {
  Eigen::LLT<MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd tmp = llt.matrixL().solve(dV);
  MatrixXd W = llt.matrixL().solve(tmp.transpose());
  W = Sym(W);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(W, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()[0];
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

// Cholesky with increasing diagonal shifts when the matrix is numerically
// indefinite.
Eigen::LLT<MatrixXd> RobustCholesky(MatrixXd m) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double scale = std::max(1e-300, m.diagonal().cwiseAbs().maxCoeff());
  for (double shift = 1e-14; shift < 1.0; shift *= 100.0) {
    MatrixXd r = m;
    r.diagonal().array() += shift * scale;
    llt.compute(r);
    if (llt.info() == Eigen::Success) {
      return llt;
    }
  }
  return llt;
}

struct EqualityReduction {
  MatrixXd E;
  VectorXd e;
  std::vector<int> rows;
  std::vector<double> scale;
  double inconsistency{0.0};
};

EqualityReduction ReduceEqualities(const MatrixXd& E, const VectorXd& e) {
  EqualityReduction out;
  std::vector<int> nonempty;
  for (int i = 0; i < E.rows(); ++i) {
    const double s = E.row(i).norm();
    if (s > 0.0) {
      nonempty.push_back(i);
    } else {
      out.inconsistency = std::max(out.inconsistency, std::abs(e[i]));
    }
  }
  const int m = static_cast<int>(nonempty.size());
  MatrixXd En(m, E.cols());
  VectorXd en(m);
  std::vector<double> scale(m);
  for (int r = 0; r < m; ++r) {
    scale[r] = E.row(nonempty[r]).norm();
    En.row(r) = E.row(nonempty[r]) / scale[r];
    en[r] = e[nonempty[r]] / scale[r];
  }
  if (m == 0) return out;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(En.transpose());
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  std::vector<int> keep;
  for (int k = 0; k < rank; ++k) keep.push_back(qr.colsPermutation().indices()[k]);
  std::sort(keep.begin(), keep.end());

  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(En);
  cod.setThreshold(1e-10);
  const VectorXd x_ls = cod.solve(en);
  out.inconsistency =
      std::max(out.inconsistency, (En * x_ls - en).lpNorm<Eigen::Infinity>());

  out.E.resize(rank, E.cols());
  out.e.resize(rank);
  for (int k = 0; k < rank; ++k) {
    out.E.row(k) = En.row(keep[k]);
    out.e[k] = en[keep[k]];
    out.rows.push_back(nonempty[keep[k]]);
    out.scale.push_back(scale[keep[k]]);
  }
  return out;
}

class InteriorPoint {
 public:
  InteriorPoint(const ConicProblem& p, const EqualityReduction& eq,
                const SolverSettings& s)
      : c_(p.c), c0_(p.c0), E_(eq.E), e_(eq.e), settings_(s) {
    N_ = p.num_vars;
    for (const auto& m : p.blocks) blocks_.push_back(MakeBlock(m));
    // E^T = [Y Z] [R; 0]: Z spans the null space of E, and E x = e holds for
    // x = x_p + Z xi.
    const int me = static_cast<int>(E_.rows());
    if (me > 0) {
      Eigen::HouseholderQR<MatrixXd> qr(E_.transpose());
      const MatrixXd Q = qr.householderQ();
      Y_ = Q.leftCols(me);
      Z_ = Q.rightCols(N_ - me);
      R_ = qr.matrixQR().topLeftCorner(me, me).triangularView<Eigen::Upper>();
    } else {
      Z_ = MatrixXd::Identity(N_, N_);
    }
  }

  ConicSolution Run();

 private:
  MatrixXd ApplyA(const BlockData& b, const VectorXd& x) const {
    MatrixXd out = MatrixXd::Zero(b.n, b.n);
    for (std::size_t k = 0; k < b.vars.size(); ++k) {
      const double xv = x[b.vars[k]];
      if (xv == 0.0) continue;
      for (const Entry& en : b.entries[k]) out(en.i, en.j) += xv * en.v;
    }
    return out;
  }

  VectorXd AdjointA(const std::vector<MatrixXd>& Z) const {
    VectorXd out = VectorXd::Zero(N_);
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      const BlockData& b = blocks_[bi];
      for (std::size_t k = 0; k < b.vars.size(); ++k) {
        double s = 0.0;
        for (const Entry& en : b.entries[k]) s += en.v * Z[bi](en.i, en.j);
        out[b.vars[k]] += s;
      }
    }
    return out;
  }

  // M_kl = sum_b <G_b^T A_bk G_b, G_b^T A_bl G_b>, assembled as a Gram
  // matrix so it stays positive semidefinite under rounding.
  MatrixXd Schur(const std::vector<MatrixXd>& G) const {
    MatrixXd M = MatrixXd::Zero(N_, N_);
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      const BlockData& b = blocks_[bi];
      const int nv = static_cast<int>(b.vars.size());
      if (nv == 0) continue;
      const int nt = b.n * (b.n + 1) / 2;
      MatrixXd cols(nt, nv);
      MatrixXd T(b.n, b.n);
      for (int k = 0; k < nv; ++k) {
        T.setZero();
        for (const Entry& en : b.entries[k]) {
          T.noalias() += en.v * G[bi].row(en.i).transpose() * G[bi].row(en.j);
        }
        int r = 0;
        for (int j = 0; j < b.n; ++j) {
          cols(r++, k) = T(j, j);
          for (int i = j + 1; i < b.n; ++i) {
            cols(r++, k) = std::sqrt(0.5) * (T(i, j) + T(j, i));
          }
        }
      }
      MatrixXd Mb = MatrixXd::Zero(nv, nv);
      Mb.selfadjointView<Eigen::Lower>().rankUpdate(cols.transpose());
      Mb = Mb.selfadjointView<Eigen::Lower>();
      for (int k = 0; k < nv; ++k) {
        for (int l = 0; l < nv; ++l) M(b.vars[k], b.vars[l]) += Mb(k, l);
      }
    }
    return M;
  }

  VectorXd c_;
  double c0_;
  MatrixXd E_;
  VectorXd e_;
  SolverSettings settings_;
  int N_{0};
  std::vector<BlockData> blocks_;
  MatrixXd Y_, Z_, R_;
};

ConicSolution InteriorPoint::Run() {
  const int nb = static_cast<int>(blocks_.size());
  const int me = static_cast<int>(E_.rows());
  int n_total = 0;
  for (const auto& b : blocks_) n_total += b.n;

  // Starting point scaled to the data.
  VectorXd x = VectorXd::Zero(N_);
  if (me > 0) x = Y_ * R_.transpose().triangularView<Eigen::Lower>().solve(e_);
  VectorXd w = VectorXd::Zero(me);
  std::vector<MatrixXd> X(nb), S(nb);
  double norm_c = c_.norm();
  double norm_C = 0.0;
  for (int bi = 0; bi < nb; ++bi) {
    const BlockData& b = blocks_[bi];
    double max_a = 0.0;
    double ratio = 0.0;
    for (std::size_t k = 0; k < b.vars.size(); ++k) {
      double fro = 0.0;
      for (const Entry& en : b.entries[k]) fro += en.v * en.v;
      fro = std::sqrt(fro);
      max_a = std::max(max_a, fro);
      ratio = std::max(ratio, (1.0 + std::abs(c_[b.vars[k]])) / (1.0 + fro));
    }
    const double sq = std::sqrt(static_cast<double>(b.n));
    const double xi_x = std::max({10.0, sq, b.n * ratio});
    const double xi_s = std::max({10.0, sq, b.C.norm(), max_a});
    X[bi] = xi_x * MatrixXd::Identity(b.n, b.n);
    S[bi] = xi_s * MatrixXd::Identity(b.n, b.n);
    norm_C += b.C.squaredNorm();
  }
  norm_C = std::sqrt(norm_C);
  const double norm_e = e_.norm();

  ConicSolution sol;
  sol.status = ConicStatus::kMaxIterations;
  int small_steps = 0;
  double prev_step = 1.0;

  // Best iterate so far by its worst tolerance ratio; returned when the
  // method stops without converging.
  ConicSolution best;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_it = 0;
  auto finish = [&](ConicStatus status, int it) {
    if (status == ConicStatus::kStalled ||
        status == ConicStatus::kMaxIterations) {
      if (best_merit < std::numeric_limits<double>::infinity()) {
        sol = best;
        sol.status = status;
        sol.iterations = it;
        return;
      }
    }
    sol.status = status;
    sol.iterations = it;
    sol.x = x;
    sol.w = w;
    sol.X = X;
    sol.S = S;
  };

  for (int it = 0; it <= settings_.max_iterations; ++it) {
    const VectorXd rp = c_ - AdjointA(X) - E_.transpose() * w;
    const VectorXd re = e_ - E_ * x;
    std::vector<MatrixXd> Rd(nb);
    double norm_rd = 0.0, dual_c = 0.0, xs = 0.0, norm_X = 0.0;
    for (int bi = 0; bi < nb; ++bi) {
      Rd[bi] = blocks_[bi].C + ApplyA(blocks_[bi], x) - S[bi];
      norm_rd += Rd[bi].squaredNorm();
      dual_c += Inner(blocks_[bi].C, X[bi]);
      xs += Inner(X[bi], S[bi]);
      norm_X += X[bi].squaredNorm();
    }
    norm_rd = std::sqrt(norm_rd);
    norm_X = std::sqrt(norm_X);
    const double pobj = c_.dot(x) + c0_;
    const double dobj = e_.dot(w) - dual_c + c0_;
    const double mu = n_total > 0 ? xs / n_total : 0.0;
    const double pinf =
        std::max(re.norm() / (1.0 + norm_e), norm_rd / (1.0 + norm_C));
    const double dinf = rp.norm() / (1.0 + norm_c);
    const double gap =
        std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.primal_residual = pinf;
    sol.dual_residual = dinf;
    sol.gap = gap;
    const double merit = std::max({pinf / settings_.feasibility_tolerance,
                                   dinf / settings_.feasibility_tolerance,
                                   gap / settings_.gap_tolerance});
    if (merit < 0.9 * best_merit) {
      best_merit = merit;
      best_it = it;
      best = sol;
      best.x = x;
      best.w = w;
      best.X = X;
      best.S = S;
    }
    if (settings_.verbose) {
      std::fprintf(stderr,
                   "%3d pobj %+.10e dobj %+.10e pinf %.2e dinf %.2e gap %.2e "
                   "mu %.2e |x| %.1e |X| %.1e |w| %.1e\n",
                   it, pobj, dobj, pinf, dinf, gap, mu, x.norm(), norm_X,
                   w.norm());
    }
    if (pinf <= settings_.feasibility_tolerance &&
        dinf <= settings_.feasibility_tolerance &&
        gap <= settings_.gap_tolerance) {
      finish(ConicStatus::kOptimal, it);
      return sol;
    }
    if (norm_X + w.norm() > settings_.divergence_threshold) {
      finish(ConicStatus::kSuspectInfeasible, it);
      return sol;
    }
    if (x.norm() > settings_.divergence_threshold &&
        pobj < -std::sqrt(settings_.divergence_threshold)) {
      finish(ConicStatus::kSuspectUnbounded, it);
      return sol;
    }
    if (it == settings_.max_iterations) break;
    if (it - best_it > 12) {
      finish(ConicStatus::kStalled, it);
      return sol;
    }

    // Nesterov-Todd scaling: W = G G^T with G^T S G = G^-1 X G^-T = diag(d).
    std::vector<MatrixXd> G(nb), Ginv(nb), W(nb), Sinv(nb);
    std::vector<VectorXd> d(nb);
    bool ok = true;
    for (int bi = 0; bi < nb; ++bi) {
      Eigen::LLT<MatrixXd> lx(X[bi]), ls(S[bi]);
      if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) {
        ok = false;
        break;
      }
      const MatrixXd Lx = lx.matrixL();
      const MatrixXd Ls = ls.matrixL();
      Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx,
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
      d[bi] = svd.singularValues();
      if (d[bi].minCoeff() <= 0.0) {
        ok = false;
        break;
      }
      const VectorXd isq = d[bi].cwiseSqrt().cwiseInverse();
      G[bi] = Lx * svd.matrixV() * isq.asDiagonal();
      Ginv[bi] = isq.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
      W[bi] = G[bi] * G[bi].transpose();
      Sinv[bi] = G[bi] * d[bi].cwiseInverse().asDiagonal() * G[bi].transpose();
    }
    if (!ok) {
      finish(ConicStatus::kStalled, it);
      return sol;
    }

    const MatrixXd M = Schur(G);
    const Eigen::LLT<MatrixXd> m_llt = RobustCholesky(M);
    if (m_llt.info() != Eigen::Success) {
      finish(ConicStatus::kStalled, it);
      return sol;
    }
    const MatrixXd Mz = Congruence(M, Z_);
    const Eigen::LLT<MatrixXd> z_llt = RobustCholesky(Mz);
    if (z_llt.info() != Eigen::Success) {
      finish(ConicStatus::kStalled, it);
      return sol;
    }
    // Step that restores E x = e; the rest of dx lies in the null space.
    VectorXd dx_range = VectorXd::Zero(N_);
    if (me > 0) {
      dx_range = Y_ * R_.transpose().triangularView<Eigen::Lower>().solve(re);
    }

    auto direction = [&](const std::vector<MatrixXd>& Rc, VectorXd& dx,
                         VectorXd& dw, std::vector<MatrixXd>& dS,
                         std::vector<MatrixXd>& dX) {
      std::vector<MatrixXd> T(nb);
      for (int bi = 0; bi < nb; ++bi) {
        T[bi] = Rc[bi] - X[bi] - Sym(W[bi] * Rd[bi] * W[bi]);
      }
      // Z^T (A^*(T) - M dx) = Z^T rp with dx = dx_range + Z xi.
      const VectorXd rhs = Z_.transpose() * (AdjointA(T) - M * dx_range - rp);
      VectorXd xi = z_llt.solve(rhs);
      for (int sweep = 0; sweep < 2; ++sweep) xi += z_llt.solve(rhs - Mz * xi);
      dx = dx_range + Z_ * xi;
      dS.resize(nb);
      dX.resize(nb);
      for (int bi = 0; bi < nb; ++bi) {
        dS[bi] = ApplyA(blocks_[bi], dx) + Rd[bi];
        dX[bi] = Rc[bi] - X[bi] - Sym(W[bi] * dS[bi] * W[bi]);
      }
      // Rounding in dX grows with the primal iterate. Remove the null-space
      // part of the dual residual in the scaling metric, then let w absorb
      // the rest.
      VectorXd rho = Z_.transpose() * (rp - AdjointA(dX));
      for (int pass = 0; pass < 4; ++pass) {
        const VectorXd zg = Z_ * z_llt.solve(rho);
        std::vector<MatrixXd> trial = dX;
        for (int bi = 0; bi < nb; ++bi) {
          trial[bi] += Sym(W[bi] * ApplyA(blocks_[bi], zg) * W[bi]);
        }
        const VectorXd next = Z_.transpose() * (rp - AdjointA(trial));
        if (next.norm() >= 0.5 * rho.norm()) {
          if (next.norm() < rho.norm()) dX = std::move(trial);
          break;
        }
        dX = std::move(trial);
        rho = next;
      }
      if (me > 0) {
        dw = R_.triangularView<Eigen::Upper>().solve(
            Y_.transpose() * (rp - AdjointA(dX)));
      } else {
        dw.resize(0);
      }
    };
    auto steps = [&](const std::vector<MatrixXd>& dS,
                     const std::vector<MatrixXd>& dX, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (int bi = 0; bi < nb; ++bi) {
        ap = std::min(ap, MaxStep(S[bi], dS[bi]));
        ad = std::min(ad, MaxStep(X[bi], dX[bi]));
      }
    };

    // Predictor.
    std::vector<MatrixXd> Rc(nb);
    for (int bi = 0; bi < nb; ++bi) Rc[bi] = MatrixXd::Zero(blocks_[bi].n, blocks_[bi].n);
    VectorXd dx, dw;
    std::vector<MatrixXd> dS, dX;
    direction(Rc, dx, dw, dS, dX);
    double ap, ad;
    steps(dS, dX, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xs_aff = 0.0;
    for (int bi = 0; bi < nb; ++bi) {
      xs_aff += Inner(X[bi] + ad * dX[bi], S[bi] + ap * dS[bi]);
    }
    const double mu_aff = n_total > 0 ? xs_aff / n_total : 0.0;
    const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    const double sigma =
        mu > 0.0 ? std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, expon), 0.0, 1.0)
                 : 0.0;

    // Corrector.
    for (int bi = 0; bi < nb; ++bi) {
      const MatrixXd P = (Ginv[bi] * dX[bi] * Ginv[bi].transpose()) *
                         (G[bi].transpose() * dS[bi] * G[bi]);
      MatrixXd K = P + P.transpose();
      for (int i = 0; i < K.rows(); ++i) {
        for (int j = 0; j < K.cols(); ++j) K(i, j) /= d[bi][i] + d[bi][j];
      }
      Rc[bi] = sigma * mu * Sinv[bi] - Sym(G[bi] * K * G[bi].transpose());
    }
    direction(Rc, dx, dw, dS, dX);
    steps(dS, dX, ap, ad);
    const double gamma = 0.9 + 0.09 * std::min(prev_step, 1.0);
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    prev_step = std::min(ap, ad);
    if (settings_.verbose) std::fprintf(stderr, "    sigma %.2e ap %.3e ad %.3e\n", sigma, ap, ad);

    x += ap * dx;
    for (int bi = 0; bi < nb; ++bi) {
      S[bi] += ap * dS[bi];
      S[bi] = Sym(S[bi]);
      X[bi] += ad * dX[bi];
      X[bi] = Sym(X[bi]);
    }
    if (me > 0) w += ad * dw;

    if (std::max(ap, ad) < 1e-8) {
      if (++small_steps >= 3) {
        finish(ConicStatus::kStalled, it + 1);
        return sol;
      }
    } else {
      small_steps = 0;
    }
  }
  finish(ConicStatus::kMaxIterations, settings_.max_iterations);
  return sol;
}

}  // namespace

std::string ToString(ConicStatus status) {
  switch (status) {
    case ConicStatus::kOptimal: return "optimal";
    case ConicStatus::kInconsistentEqualities: return "inconsistent equalities";
    case ConicStatus::kSuspectInfeasible: return "dual iterates diverged";
    case ConicStatus::kSuspectUnbounded: return "primal objective diverged";
    case ConicStatus::kStalled: return "stalled";
    case ConicStatus::kMaxIterations: return "iteration limit";
  }
  return "unknown";
}

ConicSolution SolveConic(const ConicProblem& problem,
                         const SolverSettings& settings) {
  if (problem.c.size() != problem.num_vars ||
      problem.E.cols() != problem.num_vars ||
      problem.E.rows() != problem.e.size()) {
    throw std::invalid_argument("conic problem dimensions are inconsistent");
  }
  const EqualityReduction eq = ReduceEqualities(problem.E, problem.e);
  const double tol = 1e-9 * (1.0 + problem.e.lpNorm<Eigen::Infinity>());
  if (eq.inconsistency > tol) {
    ConicSolution sol;
    sol.status = ConicStatus::kInconsistentEqualities;
    sol.equality_inconsistency = eq.inconsistency;
    return sol;
  }
  InteriorPoint ipm(problem, eq, settings);
  ConicSolution sol = ipm.Run();
  sol.equality_inconsistency = eq.inconsistency;
  // Multipliers of the original rows: row k of the reduced system is row
  // rows[k] divided by scale[k].
  VectorXd w = VectorXd::Zero(problem.E.rows());
  for (std::size_t k = 0; k < eq.rows.size(); ++k) {
    w[eq.rows[k]] = sol.w[k] / eq.scale[k];
  }
  sol.w = w;
  return sol;
}

double InfeasibilityMargin(const ConicProblem& problem,
                           const SolverSettings& settings) {
  ConicProblem p1;
  const int tau = problem.num_vars;
  p1.num_vars = tau + 1;
  p1.c = VectorXd::Zero(tau + 1);
  p1.c[tau] = 1.0;
  p1.E = MatrixXd::Zero(problem.E.rows(), tau + 1);
  p1.E.leftCols(tau) = problem.E;
  p1.e = problem.e;
  for (const SymbolicMatrix& m : problem.blocks) {
    SymbolicMatrix shifted = m;
    for (int i = 0; i < m.side(); ++i) {
      LinearForm& f = shifted.mutable_entry(i, i);
      f.terms.emplace_back(tau, 1.0);
      f.Normalize();
    }
    p1.blocks.push_back(std::move(shifted));
  }
  SymbolicMatrix floor(1);
  floor.mutable_entry(0, 0).constant = 1.0;
  floor.mutable_entry(0, 0).terms.emplace_back(tau, 1.0);
  p1.blocks.push_back(std::move(floor));

  const ConicSolution sol = SolveConic(p1, settings);
  if (sol.status == ConicStatus::kInconsistentEqualities) {
    return std::numeric_limits<double>::infinity();
  }
  // Any dual feasible point bounds the optimal shift from below, so a
  // stalled solve still certifies through its dual objective.
  const bool dual_feasible =
      sol.status == ConicStatus::kOptimal ||
      ((sol.status == ConicStatus::kStalled ||
        sol.status == ConicStatus::kMaxIterations) &&
       sol.dual_residual <= settings.feasibility_tolerance);
  if (!dual_feasible) return std::numeric_limits<double>::quiet_NaN();
  return sol.dual_objective;
}

std::string ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kLowerBound: return "LowerBound";
    case SolveStatus::kInfeasibleCertificate: return "InfeasibleCertificate";
    case SolveStatus::kUnbounded: return "Unbounded";
    case SolveStatus::kInaccurate: return "Inaccurate";
  }
  return "unknown";
}

std::string ToString(Verdict verdict) {
  switch (verdict) {
    case Verdict::kProvablyUnreachable: return "ProvablyUnreachable";
    case Verdict::kBoundOnly: return "BoundOnly";
    case Verdict::kUnknown: return "Unknown";
  }
  return "unknown";
}

ConicProblem ToConic(const RelaxationSdp& sdp) {
  ConicProblem p;
  p.num_vars = sdp.decision_length;
  p.c = VectorXd::Zero(p.num_vars);
  for (const auto& [k, v] : sdp.objective.terms) p.c[k] += v;
  p.c0 = sdp.objective.constant;
  const int m = static_cast<int>(sdp.equalities.size());
  p.E = MatrixXd::Zero(m, p.num_vars);
  p.e.resize(m);
  for (int i = 0; i < m; ++i) {
    const EqualityRow& row = sdp.equalities[i];
    for (const auto& [k, v] : row.form.terms) p.E(i, k) += v;
    p.e[i] = row.rhs - row.form.constant;
  }
  for (const auto& b : sdp.blocks) p.blocks.push_back(b.matrix);
  return p;
}

SolveOutcome Solve(const RelaxationSdp& sdp, const SolverSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  const ConicProblem cp = ToConic(sdp);
  const ConicSolution sol = SolveConic(cp, settings);

  SolveOutcome out;
  out.order = sdp.order;
  SolveDiagnostics& d = out.diagnostics;
  d.iterations = sol.iterations;
  d.primal_residual = sol.primal_residual;
  d.dual_residual = sol.dual_residual;
  d.gap = sol.gap;
  d.primal_objective = sol.primal_objective;
  d.dual_objective = sol.dual_objective;
  d.infeasibility_margin = std::numeric_limits<double>::quiet_NaN();
  d.message = ToString(sol.status);

  switch (sol.status) {
    case ConicStatus::kOptimal: {
      out.status = SolveStatus::kLowerBound;
      out.bound = sol.primal_objective;
      out.moments = sol.x;
      out.y = sol.x.segment(sdp.y_offset, sdp.y_length());
      out.z = sol.x.segment(sdp.z_offset, sdp.z_length());
      out.equality_duals = sol.w;
      out.has_duals = true;
      out.dual_objective = sol.dual_objective;
      double wr = 0.0;
      for (std::size_t i = 0; i < sdp.equalities.size(); ++i) {
        wr += sol.w[i] * sdp.equalities[i].rhs;
      }
      out.dual_constant = sol.dual_objective - wr;
      break;
    }
    case ConicStatus::kInconsistentEqualities:
      d.infeasibility_margin = sol.equality_inconsistency;
      out.status = sol.equality_inconsistency >= settings.certificate_threshold
                       ? SolveStatus::kInfeasibleCertificate
                       : SolveStatus::kInaccurate;
      break;
    case ConicStatus::kSuspectUnbounded:
      out.status = SolveStatus::kUnbounded;
      break;
    default: {
      const double margin = InfeasibilityMargin(cp, settings);
      d.infeasibility_margin = margin;
      out.status = !std::isnan(margin) &&
                           margin >= settings.certificate_threshold
                       ? SolveStatus::kInfeasibleCertificate
                       : SolveStatus::kInaccurate;
      break;
    }
  }
  d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
  return out;
}

std::vector<SolveOutcome> RunHierarchy(const OcpProblem& problem, int r_min,
                                       int r_max,
                                       const SolverSettings& settings,
                                       const RelaxationOptions& options) {
  if (r_min > r_max) throw std::invalid_argument("empty order range");
  const CanonicalProblem cp = Canonicalize(problem);
  std::vector<SolveOutcome> out;
  for (int r = r_min; r <= r_max; ++r) {
    try {
      const RelaxationSdp sdp = BuildRelaxation(cp, r, options);
      out.push_back(Solve(sdp, settings));
    } catch (const std::exception& e) {
      throw std::runtime_error("order " + std::to_string(r) + ": " + e.what());
    }
    if (out.back().status == SolveStatus::kInfeasibleCertificate) break;
  }
  return out;
}

Verdict ClassifyCertificate(const SolveOutcome& outcome) {
  switch (outcome.status) {
    case SolveStatus::kInfeasibleCertificate:
      return Verdict::kProvablyUnreachable;
    case SolveStatus::kLowerBound:
      return Verdict::kBoundOnly;
    default:
      return Verdict::kUnknown;
  }
}

}  // namespace ocplmi
