#pragma once

// Grid-sampled strict-sense and extended (space-time) processes, plus CSV
// exchange.

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace impgap {

/// Piecewise-constant controls (w0_k, w_k) held on intervals of length ds_k.
struct ControlSequence {
  Eigen::VectorXd ds;  // N
  Eigen::VectorXd w0;  // N
  Eigen::MatrixXd w;   // N x m

  int size() const { return static_cast<int>(ds.size()); }
  int m() const { return static_cast<int>(w.cols()); }
  /// Uniform grid of N intervals on [0, S].
  static ControlSequence uniform(double S, const Eigen::VectorXd& w0, const Eigen::MatrixXd& w);
};

/// Extended process sampled at nodes 0 = s_0 < ... < s_N = S. Node k carries
/// (y0, y, nu); interval k carries (w0, w). phi(s_0) is `phi_init`.
struct ExtendedProcess {
  Eigen::VectorXd s;
  Eigen::VectorXd y0;
  Eigen::MatrixXd y;   // (N+1) x n
  Eigen::VectorXd nu;
  Eigen::VectorXd w0;  // N
  Eigen::MatrixXd w;   // N x m
  Eigen::VectorXd phi_init;

  int intervals() const { return static_cast<int>(w0.size()); }
  int n() const { return static_cast<int>(y.cols()); }
  int m() const { return static_cast<int>(w.cols()); }
  double S() const { return s(s.size() - 1); }
  double ds(int k) const { return s(k + 1) - s(k); }

  ControlSequence controls() const;
  Eigen::MatrixXd phi() const;  // (N+1) x m
  /// (y0(0), y(0), y0(S), y(S)).
  Eigen::VectorXd endpoint() const;
  double nu_final() const { return nu(nu.size() - 1); }
  /// |S - (y0(S) - y0(0) + nu(S))|.
  double s_identity_error() const;
  /// max_k |w0_k + |w_k| - 1|.
  double canonical_error() const;
  double min_w0() const { return w0.size() ? w0.minCoeff() : 0.0; }
};

/// Strict-sense process on t1 = tau_0 < ... < tau_M = t2.
struct StrictProcess {
  Eigen::VectorXd t;
  Eigen::MatrixXd x;   // (M+1) x n
  Eigen::VectorXd v;
  Eigen::MatrixXd u;   // (M+1) x m
  Eigen::MatrixXd du;  // M x m

  int intervals() const { return static_cast<int>(du.rows()); }
  int n() const { return static_cast<int>(x.cols()); }
  int m() const { return static_cast<int>(du.cols()); }
  double t1() const { return t(0); }
  double t2() const { return t(t.size() - 1); }
  Eigen::VectorXd endpoint() const;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Columns s, y0, y_1..y_n, nu, w0, w_1..w_m; the last row's controls are empty.
void write_extended_csv(std::ostream& out, const ExtendedProcess& ep);
ExtendedProcess read_extended_csv(std::istream& in);

/// Columns t, x_1..x_n, v, du_1..du_m; u is rebuilt from du starting at 0.
void write_strict_csv(std::ostream& out, const StrictProcess& sp);
StrictProcess read_strict_csv(std::istream& in);

}  // namespace impgap
