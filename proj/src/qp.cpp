#include "retarget/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace retarget {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEpsConverge = 1e-8;
constexpr double kEpsKkt = 1e-6;
constexpr int kMaxIterations = 50000;
constexpr int kCheckEvery = 25;

struct Stacked {
  MatX A;  // m x n
  VecX l;
  VecX u;
  VecX rho;
};

void check_problem(const QpProblem& p) {
  const int n = p.n();
  if (p.P.rows() != n || p.P.cols() != n) {
    throw DimensionError("P must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (p.A_eq.rows() > 0 && p.A_eq.cols() != n) {
    throw DimensionError("A_eq has " + std::to_string(p.A_eq.cols()) +
                         " columns, expected " + std::to_string(n));
  }
  if (p.b_eq.size() != p.A_eq.rows()) {
    throw DimensionError("b_eq size does not match A_eq rows");
  }
  if (p.lb.size() != 0 && p.lb.size() != n) {
    throw DimensionError("lb must be empty or size " + std::to_string(n));
  }
  if (p.ub.size() != 0 && p.ub.size() != n) {
    throw DimensionError("ub must be empty or size " + std::to_string(n));
  }
  if (p.G.rows() > 0 && p.G.cols() != n) {
    throw DimensionError("G has " + std::to_string(p.G.cols()) + " columns, expected " +
                         std::to_string(n));
  }
  if (p.h.size() != p.G.rows()) {
    throw DimensionError("h size does not match G rows");
  }
}

Stacked stack_constraints(const QpProblem& p) {
  const int n = p.n();
  const int n_eq = static_cast<int>(p.A_eq.rows());
  const bool boxed = p.lb.size() != 0 || p.ub.size() != 0;
  const int n_box = boxed ? n : 0;
  const int n_g = static_cast<int>(p.G.rows());
  const int m = n_eq + n_box + n_g;

  Stacked s;
  s.A.setZero(m, n);
  s.l.setConstant(m, -kInf);
  s.u.setConstant(m, kInf);
  s.rho.setConstant(m, 1.0);
  if (n_eq > 0) {
    s.A.topRows(n_eq) = p.A_eq;
    s.l.head(n_eq) = p.b_eq;
    s.u.head(n_eq) = p.b_eq;
    s.rho.head(n_eq).setConstant(1e3);
  }
  if (n_box > 0) {
    s.A.block(n_eq, 0, n, n).setIdentity();
    if (p.lb.size() != 0) s.l.segment(n_eq, n) = p.lb;
    if (p.ub.size() != 0) s.u.segment(n_eq, n) = p.ub;
  }
  if (n_g > 0) {
    s.A.bottomRows(n_g) = p.G;
    s.u.tail(n_g) = p.h;
  }
  return s;
}

/// Max violation of l <= Ax <= u.
double primal_residual(const Stacked& s, const VecX& ax) {
  double r = 0.0;
  for (int i = 0; i < ax.size(); ++i) {
    if (std::isfinite(s.l[i])) r = std::max(r, s.l[i] - ax[i]);
    if (std::isfinite(s.u[i])) r = std::max(r, ax[i] - s.u[i]);
  }
  return std::max(r, 0.0);
}

double complementarity(const Stacked& s, const VecX& ax, const VecX& y) {
  double r = 0.0;
  for (int i = 0; i < ax.size(); ++i) {
    if (y[i] > 0.0) {
      r = std::max(r, std::isfinite(s.u[i]) ? std::abs(y[i] * (s.u[i] - ax[i])) : y[i]);
    } else if (y[i] < 0.0) {
      r = std::max(r,
                   std::isfinite(s.l[i]) ? std::abs(y[i] * (ax[i] - s.l[i])) : -y[i]);
    }
  }
  return r;
}

double kkt_residual(const MatX& P, const VecX& q, const Stacked& s, const VecX& x,
                    const VecX& y) {
  const VecX ax = s.A * x;
  const double r_stat = (P * x + q + s.A.transpose() * y).lpNorm<Eigen::Infinity>();
  return std::max({primal_residual(s, ax), r_stat, complementarity(s, ax, y)});
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem) {
  check_problem(problem);
  const int n = problem.n();
  const MatX P = 0.5 * (problem.P + problem.P.transpose());
  const Stacked s = stack_constraints(problem);
  const int m = static_cast<int>(s.A.rows());

  QpSolution sol;
  if (m == 0) {
    sol.x = P.ldlt().solve(-problem.q);
    sol.iterations = 0;
    sol.kkt_residual = (P * sol.x + problem.q).lpNorm<Eigen::Infinity>();
    sol.status =
        sol.kkt_residual < kEpsKkt ? QpStatus::Converged : QpStatus::MaxIterations;
    sol.objective = 0.5 * sol.x.dot(P * sol.x) + problem.q.dot(sol.x);
    return sol;
  }

  // operator splitting with over-relaxation; constraint rows carry their own
  // penalty weight (equalities heavier)
  const double sigma = 1e-6;
  const double alpha = 1.6;
  const MatX K =
      P + sigma * MatX::Identity(n, n) + s.A.transpose() * s.rho.asDiagonal() * s.A;
  const Eigen::LDLT<MatX> Kfact(K);

  VecX x = VecX::Zero(n);
  VecX z = (s.A * x).cwiseMax(s.l).cwiseMin(s.u);
  VecX y = VecX::Zero(m);
  int used = kMaxIterations;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const VecX rhs =
        sigma * x - problem.q + s.A.transpose() * (s.rho.cwiseProduct(z) - y);
    x = Kfact.solve(rhs);
    const VecX ax = s.A * x;
    const VecX ax_rel = alpha * ax + (1.0 - alpha) * z;
    const VecX z_new =
        (ax_rel + y.cwiseQuotient(s.rho)).cwiseMax(s.l).cwiseMin(s.u);
    y += s.rho.cwiseProduct(ax_rel - z_new);
    z = z_new;
    if (it % kCheckEvery == 0 || it == kMaxIterations) {
      const double r_prim = (ax - z).lpNorm<Eigen::Infinity>();
      const double r_dual =
          (P * x + problem.q + s.A.transpose() * y).lpNorm<Eigen::Infinity>();
      if (r_prim < kEpsConverge && r_dual < kEpsConverge) {
        used = it;
        break;
      }
    }
  }

  double kkt = kkt_residual(P, problem.q, s, x, y);

  // active-set polish: re-solve the equality-constrained problem on the
  // constraints the multipliers identify, keep it if it tightens the KKT
  {
    const VecX ax = s.A * x;
    const double y_tol = 1e-9 * std::max(1.0, y.lpNorm<Eigen::Infinity>());
    std::vector<int> active;
    std::vector<double> target;
    for (int i = 0; i < m; ++i) {
      const bool eq = s.l[i] == s.u[i];
      const bool lower = std::isfinite(s.l[i]) &&
                         (y[i] < -y_tol || std::abs(ax[i] - s.l[i]) < 1e-7);
      const bool upper = std::isfinite(s.u[i]) &&
                         (y[i] > y_tol || std::abs(ax[i] - s.u[i]) < 1e-7);
      if (eq || lower || upper) {
        active.push_back(i);
        target.push_back(eq ? s.l[i] : (upper ? s.u[i] : s.l[i]));
      }
    }
    const int na = static_cast<int>(active.size());
    if (na > 0) {
      MatX kkt_mat = MatX::Zero(n + na, n + na);
      kkt_mat.topLeftCorner(n, n) = P;
      VecX rhs(n + na);
      rhs.head(n) = -problem.q;
      for (int r = 0; r < na; ++r) {
        kkt_mat.block(n + r, 0, 1, n) = s.A.row(active[r]);
        kkt_mat.block(0, n + r, n, 1) = s.A.row(active[r]).transpose();
        rhs[n + r] = target[r];
      }
      const VecX xy = kkt_mat.completeOrthogonalDecomposition().solve(rhs);
      const VecX x_pol = xy.head(n);
      VecX y_pol = VecX::Zero(m);
      for (int r = 0; r < na; ++r) y_pol[active[r]] = xy[n + r];
      const double kkt_pol = kkt_residual(P, problem.q, s, x_pol, y_pol);
      if (kkt_pol < kkt) {
        x = x_pol;
        y = y_pol;
        kkt = kkt_pol;
      }
    }
  }

  sol.x = x;
  sol.objective = 0.5 * x.dot(P * x) + problem.q.dot(x);
  sol.status = kkt < kEpsKkt ? QpStatus::Converged : QpStatus::MaxIterations;
  sol.iterations = used;
  sol.kkt_residual = kkt;
  return sol;
}

}  // namespace retarget
