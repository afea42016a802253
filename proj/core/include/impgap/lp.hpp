#pragma once

// Small dense linear programming and nonnegative least squares.

#include <Eigen/Dense>

#include <limits>

namespace impgap {

/// minimize c'x  s.t.  a_eq x = b_eq,  a_ub x <= b_ub,  lower <= x <= upper.
/// Bounds may be infinite; empty matrices mean "no rows of that kind".
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  explicit LinearProgram(int num_vars = 0);
  int num_vars() const { return static_cast<int>(c.size()); }
  void add_eq(const Eigen::RowVectorXd& row, double rhs);
  void add_ub(const Eigen::RowVectorXd& row, double rhs);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

struct LpOptions {
  double pivot_tol = 1e-10;
  double feas_tol = 1e-9;
  int max_iterations = 50000;
};

/// Two-phase dense tableau simplex (Dantzig pricing, Bland's rule after a run
/// of degenerate pivots).
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// Lawson-Hanson nonnegative least squares: argmin |A c - b|, c >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations = 0);

}  // namespace impgap
