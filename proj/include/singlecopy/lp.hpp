#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "singlecopy/error.hpp"

namespace singlecopy::lp {

/// maximize c.x  subject to  A x <= b,  x >= 0, with b >= 0 so the slack
/// basis is feasible and no phase one is needed.
struct Problem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

struct Solution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // dual multipliers of the rows
  double objective = 0.0;
  double dual_objective = 0.0;
  int pivots = 0;
};

inline constexpr double pivot_tol = 1e-12;
inline constexpr double verify_tol = 1e-9;

/// Dense tableau simplex. Dantzig pricing, switching to Bland's rule after a
/// run of degenerate pivots. The returned point is checked for primal and
/// dual feasibility and a zero duality gap; failure throws NumericalError.
inline Solution solve(const Problem& p, int max_pivots = 100000) {
  const Eigen::Index m = p.A.rows();
  const Eigen::Index n = p.A.cols();
  if (p.b.size() != m || p.c.size() != n) throw InputError("lp: dimension mismatch");
  if ((p.b.array() < 0.0).any()) throw InputError("lp: right-hand side must be non-negative");

  // Row 0..m-1 constraints, row m objective (stores -c, reduced costs).
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  tab.topLeftCorner(m, n) = p.A;
  tab.block(0, n, m, m).setIdentity();
  tab.col(n + m).head(m) = p.b;
  tab.row(m).head(n) = -p.c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  Solution sol;
  int degenerate_run = 0;
  const Eigen::Index rhs = n + m;
  for (;;) {
    const bool bland = degenerate_run > 50;
    Eigen::Index enter = -1;
    double best = -pivot_tol;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      const double rc = tab(m, j);
      if (rc < best) {
        enter = j;
        if (bland) break;
        best = rc;
      }
    }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = tab(i, enter);
      if (a <= pivot_tol) continue;
      const double r = tab(i, rhs) / a;
      if (r < ratio - 1e-15 ||
          (r <= ratio + 1e-15 && leave >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        ratio = r;
        leave = i;
      }
    }
    if (leave < 0) throw NumericalError("lp: problem is unbounded");
    degenerate_run = ratio <= 1e-15 ? degenerate_run + 1 : 0;

    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = tab(i, enter);
      if (f != 0.0) tab.row(i) -= f * tab.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    if (++sol.pivots > max_pivots) throw NumericalError("lp: solver non-convergence (pivot limit)");
  }

  sol.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = basis[static_cast<std::size_t>(i)];
    if (j < n) sol.x(j) = std::max(0.0, tab(i, rhs));
  }
  sol.y = tab.row(m).segment(n, m).transpose().cwiseMax(0.0);
  sol.objective = p.c.dot(sol.x);
  sol.dual_objective = p.b.dot(sol.y);

  const double primal_violation = ((p.A * sol.x - p.b).array().maxCoeff());
  const double dual_violation = (p.c - p.A.transpose() * sol.y).maxCoeff();
  if (m > 0 && primal_violation > verify_tol) throw NumericalError("lp: solver non-convergence (primal infeasible)");
  if (n > 0 && dual_violation > verify_tol) throw NumericalError("lp: solver non-convergence (dual infeasible)");
  if (std::abs(sol.objective - sol.dual_objective) > verify_tol * (1.0 + std::abs(sol.objective)))
    throw NumericalError("lp: solver non-convergence (duality gap)");
  return sol;
}

} // namespace singlecopy::lp
