#pragma once

#include "retarget/types.hpp"

namespace retarget {

/// Convex quadratic program
///   min 0.5 x'Px + q'x
///   s.t. A_eq x = b_eq, lb <= x <= ub, G x <= h
/// P positive semidefinite; absent blocks may be empty (0 rows). Infinite
/// bounds are allowed.
struct QpProblem {
  MatX P;
  VecX q;
  MatX A_eq;
  VecX b_eq;
  VecX lb;
  VecX ub;
  MatX G;
  VecX h;

  int n() const { return static_cast<int>(q.size()); }
};

enum class QpStatus {
  Converged,      // KKT residuals below 1e-6
  MaxIterations,  // best iterate returned
};

struct QpSolution {
  VecX x;
  double objective = 0.0;
  QpStatus status = QpStatus::MaxIterations;
  int iterations = 0;
  double kkt_residual = 0.0;
};

/// Deterministic operator-splitting solve with an active-set polish.
/// Converged solutions satisfy primal feasibility, stationarity and
/// complementarity within 1e-6.
QpSolution solve_qp(const QpProblem& problem);

}  // namespace retarget
