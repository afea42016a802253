#pragma once

// Direct transcription of the extended problem with an augmented Lagrangian
// outer loop and projected Barzilai-Borwein inner iterations; brute-force
// enumeration over coarse control grids.

#include "impgap/model.hpp"
#include "impgap/process.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace impgap {

struct SolveConfig {
  int N = 80;
  int multistarts = 16;
  double penalty_growth = 10.0;
  int outer_iterations = 12;
  int inner_iterations = 400;
  double tol_feas = 1e-6;
  double tol_stat = 1e-5;
  std::uint64_t seed = 1;
  double delta = 0.5;  // radius of local (d-infinity ball) solves
  int substeps = 2;    // RK4 substeps per interval inside the optimizer
  double s_max = 50.0;
};

struct Candidate {
  ExtendedProcess process;
  double cost = kInf;
  double feasibility = kInf;
  bool feasible = false;
  bool converged = false;
  int run = -1;
  double w0_min = 0.0;
  SolveConfig config;
  std::vector<std::string> log;  // one line per outer iteration
};

/// max(target violation at the endpoint, nu(S) - K, 0).
double feasibility_residual(const ProblemSpec& p, const ExtendedProcess& ep);
double evaluate_cost(const ProblemSpec& p, const ExtendedProcess& ep);
/// max(d_T(endpoint), (nu(S) - K) v 0).
double violation(const ProblemSpec& p, const ExtendedProcess& ep);

Candidate solve_extended(const ProblemSpec& p, const SolveConfig& cfg = {});
Candidate solve_strict_restricted(const ProblemSpec& p, double eps, const SolveConfig& cfg = {});

enum class Objective { kCost, kViolation };

struct TranscriptionOptions {
  double w0_min = 0.0;
  Objective objective = Objective::kCost;
  const ExtendedProcess* reference = nullptr;  // d-infinity ball centre
  double delta = 0.0;
  std::vector<ExtendedProcess> seeds;  // extra starting points (resampled to the grid)
};

/// Shared engine behind the solve_* entry points. In violation mode the
/// returned cost is the violation value and feasibility refers to the ball.
Candidate solve_transcribed(const ProblemSpec& p, const SolveConfig& cfg, const TranscriptionOptions& opt);

struct BruteForceOptions {
  std::vector<double> levels{0.0, 0.5, 1.0};  // per-coordinate values of w
  int intervals = 4;
  double w0_min = 0.0;
  std::vector<double> s_levels{1.0, 2.0, 4.0};  // used unless t1 and t2 are both fixed
  double feas_tol = 1e-4;
};

struct BruteForceResult {
  bool feasible = false;
  double cost = kInf;
  long long evaluated = 0;
  ExtendedProcess process;
};

class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

BruteForceResult brute_force_oracle(const ProblemSpec& p, const BruteForceOptions& opt = {});

}  // namespace impgap
