#pragma once

// Forward integration of the strict and extended systems, the adjoint
// system, the end-point transition map, and reverse-mode sensitivities of the
// extended RK4 scheme.

#include "impgap/model.hpp"
#include "impgap/process.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace impgap {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegrationOptions {
  int substeps = 8;
  double safety_box = 1e6;
};

/// Compiled f, g and their sparse (t, x)-Jacobians. State layout z = (t, x).
class FieldEvaluator {
 public:
  explicit FieldEvaluator(const VectorFieldSet& fields);

  int n() const { return n_; }
  int m() const { return m_; }

  /// f (n) and G (n x m, column j = g_j) at z = (t, x).
  void fields(const double* z, double* f, double* g_colmajor) const;

  /// F(z, w0, w) = (w0, f w0 + G w), written to out[0..n].
  void rhs(const double* z, double w0, const double* w, double* out) const;

  /// A = dF/dz, (1+n) x (1+n) row-major.
  void jacobian(const double* z, double w0, const double* w, double* a_rowmajor) const;

  /// zbar += A' abar; w0bar += abar0 + abar_x.f; wbar_j += abar_x.g_j.
  void vjp(const double* z, double w0, const double* w, const double* abar, double* zbar, double* w0bar,
           double* wbar) const;

  Eigen::VectorXd rhs(const Eigen::VectorXd& z, double w0, const Eigen::VectorXd& w) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& z, double w0, const Eigen::VectorXd& w) const;

 private:
  struct Entry {
    int row;   // state component i
    int col;   // 0 = t, 1 + l = x_l
    int ctrl;  // -1 for f, j for g_j
    CompiledExpr e;
  };
  int n_ = 0;
  int m_ = 0;
  std::vector<CompiledExpr> f_;
  std::vector<char> f_zero_;
  std::vector<CompiledExpr> g_;  // column-major n x m
  std::vector<char> g_zero_;
  std::vector<Entry> jac_;
};

/// RK4 with `substeps` steps per interval; nu_{k+1} = nu_k + |w_k| ds_k.
ExtendedProcess integrate_extended(const FieldEvaluator& fe, const ControlSequence& c, double y0_init,
                                   const Eigen::VectorXd& y_init, const IntegrationOptions& opt = {});
ExtendedProcess integrate_extended(const ProblemSpec& p, const ControlSequence& c, double y0_init,
                                   const Eigen::VectorXd& y_init, const IntegrationOptions& opt = {});

/// Strict system dx/dt = f + G du on the grid t with per-interval du.
StrictProcess integrate_strict(const FieldEvaluator& fe, const Eigen::VectorXd& t, const Eigen::MatrixXd& du,
                               const Eigen::VectorXd& x_init, const IntegrationOptions& opt = {});
StrictProcess integrate_strict(const ProblemSpec& p, const Eigen::VectorXd& t, const Eigen::MatrixXd& du,
                               const Eigen::VectorXd& x_init, const IntegrationOptions& opt = {});

/// (p0, p) sampled on the process grid; column 0 of P is p0.
struct AdjointPath {
  Eigen::VectorXd s;
  Eigen::MatrixXd P;  // (N+1) x (1+n)

  Eigen::VectorXd p0() const { return P.col(0); }
  Eigen::MatrixXd p() const { return P.rightCols(P.cols() - 1); }
  Eigen::VectorXd at(int k) const { return P.row(k).transpose(); }
};

/// State (y0, y) on interval k at fraction theta in [0, 1] by cubic Hermite
/// interpolation of the node values and slopes.
Eigen::VectorXd interpolate_state(const FieldEvaluator& fe, const ExtendedProcess& ep, int k, double theta);

/// Backward RK4 for dP/ds = -A(s)' P from P(S) = terminal.
AdjointPath integrate_adjoint(const FieldEvaluator& fe, const ExtendedProcess& ep, const Eigen::VectorXd& terminal,
                              int substeps = 8);
AdjointPath integrate_adjoint(const ProblemSpec& p, const ExtendedProcess& ep, const Eigen::VectorXd& terminal,
                              int substeps = 8);

/// L_k maps P(S) to P(s_k); L_N is the identity.
struct TransitionMap {
  Eigen::VectorXd s;
  std::vector<Eigen::MatrixXd> L;

  AdjointPath apply(const Eigen::VectorXd& terminal) const;
};

TransitionMap transition_map(const FieldEvaluator& fe, const ExtendedProcess& ep, int substeps = 8);
TransitionMap transition_map(const ProblemSpec& p, const ExtendedProcess& ep, int substeps = 8);

/// Sensitivities of a linear functional sum_k seeds.row(k) . (y0, y)(s_k) of
/// the RK4 forward map with respect to durations, controls and initial state.
struct ExtendedGradient {
  Eigen::VectorXd d_ds;    // N
  Eigen::VectorXd d_w0;    // N
  Eigen::MatrixXd d_w;     // N x m
  Eigen::VectorXd d_init;  // 1 + n
};

ExtendedGradient extended_vjp(const FieldEvaluator& fe, const ControlSequence& c, const Eigen::VectorXd& z_init,
                              const Eigen::MatrixXd& node_seeds, const IntegrationOptions& opt = {});

/// Forward pass keeping every substep start state, for repeated reverse sweeps.
/// Does not check the safety box; `finite` is false if the state blew up.
struct ExtendedTape {
  Eigen::MatrixXd substeps;  // (1+n) x (N * substeps), one column per substep start
  Eigen::MatrixXd nodes;  // (N+1) x (1+n), rows (y0, y)
  bool finite = true;
};

ExtendedTape record_extended(const FieldEvaluator& fe, const ControlSequence& c, const Eigen::VectorXd& z_init,
                             const IntegrationOptions& opt = {});
ExtendedGradient extended_vjp(const FieldEvaluator& fe, const ControlSequence& c, const ExtendedTape& tape,
                              const Eigen::MatrixXd& node_seeds, const IntegrationOptions& opt = {});

}  // namespace impgap
