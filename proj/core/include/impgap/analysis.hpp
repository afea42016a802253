#pragma once

// Verifiable no-gap tests, the empirical gap probe over strict eps-restricted
// problems, and the isolation probe.

#include "impgap/model.hpp"
#include "impgap/pmp.hpp"
#include "impgap/process.hpp"
#include "impgap/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace impgap {

struct ControllabilityResult {
  bool holds = false;
  bool vacuous = false;    // no normal covector with a nonzero x2 part
  Eigen::VectorXd witness;  // first failing covector over (t1, x1, t2, x2)
  double value = 0.0;       // test value at the witness (>= -tol on failure)
  int covectors_tested = 0;
};

struct ControllabilityOptions {
  double tol = 1e-6;
  int samples = 1000;  // random nonnegative mixtures of normal-cone generators
  std::uint64_t seed = 7;
  double active_tol = 1e-7;
};

/// inf over C of zeta_x2 . G(t2, x2) w < -tol for every sampled normal covector.
ControllabilityResult quick_1_controllability(const ProblemSpec& p, const Eigen::VectorXd& endpoint,
                                              const ControllabilityOptions& opt = {});
/// zeta_x2 . f(t2, x2) < -tol for every sampled normal covector.
ControllabilityResult drift_controllability(const ProblemSpec& p, const Eigen::VectorXd& endpoint,
                                            const ControllabilityOptions& opt = {});

struct Certification {
  bool certified = false;
  std::string reason;  // "no-drift", "QC", "epigraph", "normality" or empty
  std::optional<ControllabilityResult> qc;
  std::optional<ControllabilityResult> dc;
  Normality normality = Normality::kUndetermined;
};

Certification certify_no_gap(const ProblemSpec& p, const ExtendedProcess& minimizer, Normality classification,
                             double tol = 1e-6, const ControllabilityOptions& copt = {});

enum class GapVerdict { kNoGapCertified, kNoGapEmpirical, kGapDetected, kInconclusive };

const char* to_string(GapVerdict v);

struct EpsilonPoint {
  double eps = 0.0;
  double cost = kInf;
  bool feasible = false;
  double feasibility = kInf;
};

struct GapReport {
  std::string problem;
  double extended_cost = kInf;
  bool extended_feasible = false;
  std::vector<EpsilonPoint> strict;
  double estimate = kInf;
  double threshold = 0.0;
  bool flat = false;
  GapVerdict empirical = GapVerdict::kInconclusive;
  Certification certification;
  GapVerdict verdict = GapVerdict::kInconclusive;
  bool solver_flag = false;  // certified no gap but an empirical gap was measured
  std::string certified_on;  // which process the certification used
  std::vector<std::string> diagnostics;
};

struct GapProbeOptions {
  std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.025, 0.0125};
  const ExtendedProcess* minimizer = nullptr;  // certify on this instead of the solver output
  double tol = 1e-6;
  NormalityOptions normality;
  ControllabilityOptions controllability;
};

GapReport gap_probe(const ProblemSpec& p, const SolveConfig& cfg, const GapProbeOptions& opt = {});

std::string format_gap_report(const GapReport& r);
/// eps,cost,feasible rows; the extended cost is written with eps = 0.
std::string gap_report_csv(const GapReport& r);

struct IsolationOptions {
  double eps = 0.05;
  double isolation_tol = 1e-3;
  std::vector<double> blends{1.0, 0.25, 0.15, 0.1};
  double tilt = 0.1;  // |w| given to drift intervals of the tilted seeds (0 disables them)
};

struct IsolationResult {
  double value = kInf;  // best violation found within the ball
  bool isolated = false;
  double delta = 0.0;
  double eps = 0.0;
  ExtendedProcess process;
  Candidate candidate;
};

/// Minimizes max(d_T(endpoints), (nu(S) - K) v 0) over eps-restricted
/// processes within d-infinity distance delta of ep.
IsolationResult isolation_probe(const ProblemSpec& p, const ExtendedProcess& ep, double delta, const SolveConfig& cfg,
                                const IsolationOptions& opt = {});

}  // namespace impgap
