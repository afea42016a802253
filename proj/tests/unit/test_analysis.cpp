#include "impgap/analysis.hpp"
#include "impgap/examples.hpp"
#include "impgap/problem_io.hpp"
#include "impgap/reparam.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace impgap {
namespace {

ProblemSpec scalar_problem(const std::string& f, const std::string& x2_bound) {
  return parse_problem("name: scalar\nn: 1\nm: 1\nf: [\"" + f + "\"]\ng:\n  - [\"1\"]\ncone: {kind: full}\nK: inf\n"
                       "cost: \"x2_1\"\ntarget:\n  t1: {fixed: 0}\n  x1: [{fixed: 1}]\n  t2: free\n  x2: [" +
                       x2_bound + "]\n");
}

TEST(Controllability, Ex1BothFail) {
  const BundledExample& ex = bundled_example("ex1");
  const Eigen::VectorXd e = ex.minimizer.endpoint();
  ControllabilityResult qc = quick_1_controllability(ex.problem, e);
  EXPECT_FALSE(qc.holds);
  EXPECT_FALSE(qc.vacuous);
  ASSERT_EQ(qc.witness.size(), 6);
  EXPECT_NEAR(qc.witness(4), 0.0, 1e-12);
  EXPECT_GT(qc.witness(5), 0.0);
  EXPECT_GE(qc.value, -1e-6);
  ControllabilityResult dc = drift_controllability(ex.problem, e);
  EXPECT_FALSE(dc.holds);
  EXPECT_NEAR(dc.value / dc.witness(5), 1.0, 1e-9);
}

TEST(Controllability, FreeEndpointIsVacuous) {
  ProblemSpec p = scalar_problem("0", "free");
  Eigen::VectorXd e(4);
  e << 0, 1, 1, 3;
  ControllabilityResult qc = quick_1_controllability(p, e);
  EXPECT_TRUE(qc.holds);
  EXPECT_TRUE(qc.vacuous);
}

TEST(Controllability, FullConeHolds) {
  ProblemSpec p = scalar_problem("0", "{hi: 0}");
  Eigen::VectorXd e(4);
  e << 0, 1, 1, 0;
  EXPECT_TRUE(quick_1_controllability(p, e).holds);
  ControllabilityResult dc = drift_controllability(p, e);
  EXPECT_FALSE(dc.holds);
  EXPECT_NEAR(dc.value, 0.0, 1e-12);
}

TEST(Controllability, InwardDriftHolds) {
  ProblemSpec p = scalar_problem("-x1", "{hi: 1}");
  Eigen::VectorXd e(4);
  e << 0, 1, 1, 1;
  EXPECT_TRUE(drift_controllability(p, e).holds);
}

TEST(Certify, Ex3NoDrift) {
  const BundledExample& ex = bundled_example("ex3");
  Certification c = certify_no_gap(ex.problem, ex.minimizer, Normality::kAbnormal);
  EXPECT_TRUE(c.certified);
  EXPECT_EQ(c.reason, "no-drift");
}

TEST(Certify, Ex2NormalityAfterFailedTests) {
  const BundledExample& ex = bundled_example("ex2");
  Certification c = certify_no_gap(ex.problem, ex.minimizer, Normality::kNormal);
  EXPECT_TRUE(c.certified);
  EXPECT_EQ(c.reason, "normality");
  ASSERT_TRUE(c.qc);
  ASSERT_TRUE(c.dc);
  EXPECT_FALSE(c.qc->holds);
  EXPECT_FALSE(c.dc->holds);
}

TEST(Certify, Ex1Inconclusive) {
  const BundledExample& ex = bundled_example("ex1");
  Certification c = certify_no_gap(ex.problem, ex.minimizer, Normality::kAbnormal);
  EXPECT_FALSE(c.certified);
  EXPECT_TRUE(c.reason.empty());
}

TEST(Certify, MonotoneInEvidence) {
  const BundledExample& ex = bundled_example("ex2");
  Certification a = certify_no_gap(ex.problem, ex.minimizer, Normality::kNormal);
  ProblemSpec p = ex.problem;
  p.target.epigraph_declared = true;
  Certification b = certify_no_gap(p, ex.minimizer, Normality::kNormal);
  EXPECT_TRUE(a.certified);
  EXPECT_TRUE(b.certified);
}

TEST(GapProbe, ReachableTargetHasNoGap) {
  ProblemSpec p = parse_problem(R"(name: reach
n: 1
m: 1
f: ["1"]
g:
  - ["1"]
cone: {kind: full}
K: inf
cost: "0"
target:
  t1: {fixed: 0}
  x1: [{fixed: 0}]
  t2: {fixed: 1}
  x2: [{fixed: 1}]
)");
  SolveConfig cfg;
  cfg.multistarts = 2;
  cfg.N = 20;
  GapProbeOptions opt;
  opt.eps_grid = {0.2, 0.1};
  GapReport r = gap_probe(p, cfg, opt);
  EXPECT_TRUE(r.extended_feasible);
  EXPECT_EQ(r.estimate, 0.0);
  EXPECT_NE(r.verdict, GapVerdict::kGapDetected);
  EXPECT_NE(format_gap_report(r).find("estimate"), std::string::npos);
  const std::string csv = gap_report_csv(r);
  EXPECT_EQ(csv.rfind("eps,cost,feasible", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Isolation, StrictFeasibleProcessIsNotIsolated) {
  const BundledExample& ex = bundled_example("ex1");
  const int M = 20;
  StrictProcess sp = integrate_strict(ex.problem, Eigen::VectorXd::LinSpaced(M + 1, 0.0, 1.0),
                                      Eigen::MatrixXd::Zero(M, 1), Eigen::Vector2d::Zero());
  ExtendedProcess ep = embed(sp);
  SolveConfig cfg;
  cfg.multistarts = 1;
  cfg.N = 20;
  IsolationResult r = isolation_probe(ex.problem, ep, 0.1, cfg);
  EXPECT_LE(r.value, 1e-9);
  EXPECT_FALSE(r.isolated);
  EXPECT_EQ(r.delta, 0.1);
}

// Frozen from tests/oracles/ex1_oracle.py: any strict process with w0 >= 0.05 within
// d-infinity distance 0.1 of the ex1 minimizer has x2(1) >= 0.81 * 0.05 / (2 * 0.95).
constexpr double kEx1IsolationLowerBound = 0.021315789473684215;

TEST(Isolation, Ex1MinimizerIsIsolated) {
  const BundledExample& ex = bundled_example("ex1");
  IsolationResult r = isolation_probe(ex.problem, ex.minimizer, 0.1, SolveConfig{});
  EXPECT_TRUE(r.isolated);
  EXPECT_GE(r.value, kEx1IsolationLowerBound - 1e-6);
  EXPECT_GE(r.process.min_w0(), 0.05 - 1e-9);
}

TEST(Isolation, Ex3MinimizerIsNotIsolated) {
  const BundledExample& ex = bundled_example("ex3");
  IsolationResult r = isolation_probe(ex.problem, ex.minimizer, 0.1, SolveConfig{});
  EXPECT_FALSE(r.isolated);
  EXPECT_LE(r.value, 1e-4);
}

TEST(Verdict, Names) {
  EXPECT_STREQ(to_string(GapVerdict::kGapDetected), "GapDetected");
  EXPECT_STREQ(to_string(GapVerdict::kNoGapCertified), "NoGapCertified");
}

}  // namespace
}  // namespace impgap
