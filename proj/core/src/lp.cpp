#include "impgap/lp.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace impgap {

LinearProgram::LinearProgram(int num_vars)
    : c(Eigen::VectorXd::Zero(num_vars)),
      a_eq(0, num_vars),
      b_eq(0),
      a_ub(0, num_vars),
      b_ub(0),
      lower(Eigen::VectorXd::Zero(num_vars)),
      upper(Eigen::VectorXd::Constant(num_vars, std::numeric_limits<double>::infinity())) {}

void LinearProgram::add_eq(const Eigen::RowVectorXd& row, double rhs) {
  a_eq.conservativeResize(a_eq.rows() + 1, num_vars());
  a_eq.row(a_eq.rows() - 1) = row;
  b_eq.conservativeResize(b_eq.size() + 1);
  b_eq(b_eq.size() - 1) = rhs;
}

void LinearProgram::add_ub(const Eigen::RowVectorXd& row, double rhs) {
  a_ub.conservativeResize(a_ub.rows() + 1, num_vars());
  a_ub.row(a_ub.rows() - 1) = row;
  b_ub.conservativeResize(b_ub.size() + 1);
  b_ub(b_ub.size() - 1) = rhs;
}

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Original variable j = offset + sign * x'[col] (+ -x'[col2] for free splits).
struct VarMap {
  int col = -1;
  int col_neg = -1;
  double offset = 0.0;
  double sign = 1.0;
};

class Simplex {
 public:
  Simplex(Tableau t, std::vector<int> basis, int num_structural, const LpOptions& opt)
      : t_(std::move(t)), basis_(std::move(basis)), n_(num_structural), opt_(opt) {}

  // Minimizes the objective stored in the last row (reduced costs, with the
  // negated objective value in the last column). Columns >= limit are never
  // entered.
  LpStatus run(int limit, int& iterations) {
    const int m = static_cast<int>(t_.rows()) - 1;
    const int rhs = static_cast<int>(t_.cols()) - 1;
    int degenerate = 0;
    while (iterations < opt_.max_iterations) {
      bool bland = degenerate > 50;
      int enter = -1;
      double best = -opt_.pivot_tol;
      for (int j = 0; j < limit; ++j) {
        double rc = t_(m, j);
        if (rc < best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        double a = t_(i, enter);
        if (a > opt_.pivot_tol) {
          double r = t_(i, rhs) / a;
          if (r < ratio - 1e-12 || (std::abs(r - ratio) <= 1e-12 && leave >= 0 && basis_[i] < basis_[leave])) {
            ratio = r;
            leave = i;
          }
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
    return LpStatus::kIterationLimit;
  }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  Tableau& tableau() { return t_; }
  std::vector<int>& basis() { return basis_; }

 private:
  Tableau t_;
  std::vector<int> basis_;
  int n_;
  LpOptions opt_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
  const int nv = lp.num_vars();
  const double inf = std::numeric_limits<double>::infinity();

  // Map original variables onto nonnegative structural columns.
  std::vector<VarMap> map(static_cast<std::size_t>(nv));
  int ncols = 0;
  struct UpperRow {
    int col;
    double bound;
  };
  std::vector<UpperRow> upper_rows;
  for (int j = 0; j < nv; ++j) {
    double lo = lp.lower(j);
    double hi = lp.upper(j);
    if (lo > hi) {
      LpResult r;
      r.status = LpStatus::kInfeasible;
      return r;
    }
    VarMap& vm = map[static_cast<std::size_t>(j)];
    if (std::isfinite(lo)) {
      vm.col = ncols++;
      vm.offset = lo;
      vm.sign = 1.0;
      if (std::isfinite(hi)) upper_rows.push_back({vm.col, hi - lo});
    } else if (std::isfinite(hi)) {
      vm.col = ncols++;
      vm.offset = hi;
      vm.sign = -1.0;
    } else {
      vm.col = ncols++;
      vm.col_neg = ncols++;
    }
  }

  // Rows in structural coordinates: sum_k a_k x'_k (op) b.
  struct Row {
    Eigen::VectorXd a;
    double b;
    bool equality;
  };
  std::vector<Row> rows;
  auto translate = [&](const Eigen::RowVectorXd& a, double b, bool eq) {
    Row r{Eigen::VectorXd::Zero(ncols), b, eq};
    for (int j = 0; j < nv; ++j) {
      double aj = a(j);
      if (aj == 0.0) continue;
      const VarMap& vm = map[static_cast<std::size_t>(j)];
      if (vm.col_neg >= 0) {
        r.a(vm.col) += aj;
        r.a(vm.col_neg) -= aj;
      } else {
        r.a(vm.col) += aj * vm.sign;
        r.b -= aj * vm.offset;
      }
    }
    rows.push_back(std::move(r));
  };
  for (int i = 0; i < lp.a_eq.rows(); ++i) translate(lp.a_eq.row(i), lp.b_eq(i), true);
  for (int i = 0; i < lp.a_ub.rows(); ++i) translate(lp.a_ub.row(i), lp.b_ub(i), false);
  for (const auto& ur : upper_rows) {
    Row r{Eigen::VectorXd::Zero(ncols), ur.bound, false};
    r.a(ur.col) = 1.0;
    rows.push_back(std::move(r));
  }

  const int m = static_cast<int>(rows.size());
  // Column layout: structural | slack/surplus (one per inequality) | artificial.
  int nslack = 0;
  for (const auto& r : rows) nslack += r.equality ? 0 : 1;
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i) {
    const Row& r = rows[static_cast<std::size_t>(i)];
    bool needs_art = r.equality || r.b < 0.0;
    if (needs_art) art_rows.push_back(i);
  }
  const int nart = static_cast<int>(art_rows.size());
  const int total = ncols + nslack + nart;
  Tableau t = Tableau::Zero(m + 1, total + 1);
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  int slack = ncols;
  int art = ncols + nslack;
  for (int i = 0; i < m; ++i) {
    const Row& r = rows[static_cast<std::size_t>(i)];
    double sgn = r.b < 0.0 ? -1.0 : 1.0;
    t.row(i).head(ncols) = sgn * r.a.transpose();
    t(i, total) = sgn * r.b;
    if (!r.equality) {
      t(i, slack) = sgn;
      if (sgn > 0) basis[static_cast<std::size_t>(i)] = slack;
      ++slack;
    }
    if (basis[static_cast<std::size_t>(i)] < 0) {
      t(i, art) = 1.0;
      basis[static_cast<std::size_t>(i)] = art;
      ++art;
    }
  }

  LpResult result;
  int iterations = 0;

  // Phase 1: minimize the sum of artificials.
  if (nart > 0) {
    for (int i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] >= ncols + nslack) t.row(m) -= t.row(i);
    }
    for (int j = ncols + nslack; j < total; ++j) t(m, j) = 0.0;
  }
  Simplex sx(std::move(t), std::move(basis), ncols, options);
  if (nart > 0) {
    LpStatus st = sx.run(total, iterations);
    if (st == LpStatus::kIterationLimit) {
      result.status = st;
      result.iterations = iterations;
      return result;
    }
    Tableau& tb = sx.tableau();
    if (-tb(m, total) > options.feas_tol * std::max(1.0, static_cast<double>(m))) {
      result.status = LpStatus::kInfeasible;
      result.iterations = iterations;
      result.objective = -tb(m, total);
      return result;
    }
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (sx.basis()[static_cast<std::size_t>(i)] < ncols + nslack) continue;
      for (int j = 0; j < ncols + nslack; ++j) {
        if (std::abs(tb(i, j)) > 1e-9) {
          sx.pivot(i, j);
          break;
        }
      }
    }
  }

  // Phase 2 objective in structural coordinates.
  Tableau& tb = sx.tableau();
  Eigen::VectorXd cs = Eigen::VectorXd::Zero(total);
  double c0 = 0.0;
  for (int j = 0; j < nv; ++j) {
    const VarMap& vm = map[static_cast<std::size_t>(j)];
    double cj = lp.c(j);
    if (vm.col_neg >= 0) {
      cs(vm.col) += cj;
      cs(vm.col_neg) -= cj;
    } else {
      cs(vm.col) += cj * vm.sign;
      c0 += cj * vm.offset;
    }
  }
  tb.row(m).setZero();
  tb.row(m).head(total) = cs.transpose();
  for (int i = 0; i < m; ++i) {
    int b = sx.basis()[static_cast<std::size_t>(i)];
    if (b < total && cs(b) != 0.0) tb.row(m) -= cs(b) * tb.row(i);
  }
  // Artificial columns may not re-enter.
  for (int j = ncols + nslack; j < total; ++j) tb(m, j) = 0.0;
  LpStatus st = sx.run(ncols + nslack, iterations);
  result.iterations = iterations;
  if (st != LpStatus::kOptimal) {
    result.status = st;
    return result;
  }
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(total);
  for (int i = 0; i < m; ++i) {
    int b = sx.basis()[static_cast<std::size_t>(i)];
    xs(b) = tb(i, total);
  }
  result.x.resize(nv);
  for (int j = 0; j < nv; ++j) {
    const VarMap& vm = map[static_cast<std::size_t>(j)];
    if (vm.col_neg >= 0) {
      result.x(j) = xs(vm.col) - xs(vm.col_neg);
    } else {
      result.x(j) = vm.offset + vm.sign * xs(vm.col);
    }
  }
  result.objective = lp.c.dot(result.x);
  (void)c0;
  (void)inf;
  result.status = LpStatus::kOptimal;
  return result;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() != b.size()) throw std::invalid_argument("nnls: dimension mismatch");
  if (max_iterations <= 0) max_iterations = 3 * n + 30;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (n == 0) return x;
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, a.norm()) * std::max(1.0, b.norm());
  auto solve_passive = [&]() {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
    return z;
  };
  for (int outer = 0; outer < max_iterations; ++outer) {
    Eigen::VectorXd grad = a.transpose() * (b - a * x);
    int best = -1;
    double gmax = tol;
    for (int j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > gmax) {
        gmax = grad(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < max_iterations; ++inner) {
      Eigen::VectorXd z = solve_passive();
      bool ok = true;
      for (int j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) ok = false;
      }
      if (ok) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (int j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          double denom = x(j) - z(j);
          if (denom > 0.0) alpha = std::min(alpha, x(j) / denom);
        }
      }
      x += alpha * (z - x);
      for (int j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-14) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
  }
  return x;
}

}  // namespace impgap
