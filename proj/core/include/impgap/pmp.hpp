#pragma once

// Maximum principle for the extended problem: Hamiltonian maximization over
// the canonical control set, residuals of a candidate multiplier set, and
// normality classification by linear programming.

#include "impgap/dynamics.hpp"
#include "impgap/model.hpp"
#include "impgap/process.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>

namespace impgap {

struct MultiplierSet {
  AdjointPath path;  // (p0, p) on the process grid
  double pi = 0.0;
  double lambda = 0.0;
};

void write_multipliers_csv(std::ostream& out, const MultiplierSet& ms);
MultiplierSet read_multipliers_csv(std::istream& in);

/// max over {w0 >= 0, w in C, w0 + |w| = 1} of q0 w0 + q.w + pi |w|.
struct HamiltonianMax {
  double value = 0.0;
  double drift_value = 0.0;    // q0
  double impulse_value = 0.0;  // max over unit w in C of q.w, plus pi (-inf if C = {0})
  double w0 = 1.0;
  Eigen::VectorXd w;
  bool tie = false;
  bool impulse_direction_undefined = false;
};

HamiltonianMax hamiltonian_max(const ControlCone& cone, double q0, const Eigen::VectorXd& q, double pi);

/// q0 = p.f + p0 and q = G' p at state z = (y0, y) and costate P = (p0, p).
HamiltonianMax hamiltonian_max(const FieldEvaluator& fe, const ControlCone& cone, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& P, double pi);
HamiltonianMax hamiltonian_max(const ProblemSpec& p, const Eigen::VectorXd& z, const Eigen::VectorXd& P, double pi);

/// H = q0 w0 + q.w + pi |w| for the given control.
double hamiltonian(const FieldEvaluator& fe, const Eigen::VectorXd& z, const Eigen::VectorXd& P, double pi, double w0,
                   const Eigen::VectorXd& w);

struct ResidualOptions {
  int substeps = 8;
  double active_tol = 1e-7;
};

struct ResidualReport {
  double adjoint = 0.0;         // max |P - re-integrated P|
  double hamiltonian_max = 0.0; // max (H* - H) over check points
  double hamiltonian_zero = 0.0;  // max |H| over check points
  double node_h_abs = 0.0;      // max |H(s_k)| at grid nodes
  double transversality = 0.0;  // NNLS decomposition error
  double sign = 0.0;            // max(pi, 0) + max(-lambda, 0)
  double case_i = 0.0;          // |pi| when case (i) applies
  bool case_i_applies = false;
  bool case_ii_applies = false;
  double nontriviality = 0.0;   // sup-norm of (p0, p, lambda), or of (p, lambda) in case (ii)
  Eigen::VectorXd endpoint_covector;  // (p0(0), p(0), -p0(S), -p(S), -pi) - lambda grad h
  Eigen::VectorXd grad_h;

  double max_residual() const;
  bool passes(double tol) const;
};

class GridMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ResidualReport extremal_residuals(const ProblemSpec& p, const ExtendedProcess& ep, const MultiplierSet& ms,
                                  const ResidualOptions& opt = {});

enum class Normality { kNormal, kAbnormal, kUndetermined };

struct NormalityResult {
  Normality verdict = Normality::kUndetermined;
  std::optional<MultiplierSet> witness;
  double margin = 0.0;  // optimal max-violation of the last LP (unit sup-norm scaling)
  int rounds = 0;
  int probes = 0;
  std::string diagnostic;
};

struct NormalityOptions {
  double tol = 1e-6;
  int max_rounds = 5;
  int substeps = 8;
  double active_tol = 1e-7;
};

NormalityResult classify_normality(const ProblemSpec& p, const ExtendedProcess& ep, const NormalityOptions& opt = {});

const char* to_string(Normality n);

std::string format_residual_report(const ResidualReport& r, const MultiplierSet& ms, double tol);
std::string format_normality(const NormalityResult& r);

}  // namespace impgap
