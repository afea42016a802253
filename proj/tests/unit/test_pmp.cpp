#include "impgap/examples.hpp"
#include "impgap/pmp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

namespace impgap {
namespace {

TEST(HamiltonianMax, ImpulsiveBranchWins) {
  HamiltonianMax h = hamiltonian_max(ControlCone::orthant({SignTag::kNonneg}), -1.0, Eigen::VectorXd::Zero(1), 0.0);
  EXPECT_EQ(h.value, 0.0);
  EXPECT_EQ(h.w0, 0.0);
  EXPECT_TRUE(h.impulse_direction_undefined);
}

TEST(HamiltonianMax, ConstructedTie) {
  Eigen::Vector2d q(3.0, 4.0);
  HamiltonianMax h = hamiltonian_max(ControlCone::full(2), 0.0, q, -5.0);
  EXPECT_TRUE(h.tie);
  EXPECT_EQ(h.value, 0.0);
}

TEST(HamiltonianMax, Ex1AbnormalAlongMinimizer) {
  const BundledExample& ex = bundled_example("ex1");
  const ExtendedProcess& ep = ex.minimizer;
  for (int k = 0; k <= ep.intervals(); ++k) {
    Eigen::Vector3d z(ep.y0(k), ep.y(k, 0), ep.y(k, 1));
    HamiltonianMax h = hamiltonian_max(ex.problem, z, ex.multipliers.path.at(k), ex.multipliers.pi);
    EXPECT_NEAR(h.value, 0.0, 1e-12);
  }
}

double sampled_max(const ControlCone& c, double q0, const Eigen::VectorXd& q, double pi, int directions) {
  double best = q0;
  if (c.dim() == 1) {
    for (double d : {-1.0, 1.0}) {
      Eigen::VectorXd w = Eigen::VectorXd::Constant(1, d);
      if (c.contains(w, 1e-12)) best = std::max(best, q.dot(w) + pi);
    }
    return best;
  }
  for (int k = 0; k < directions; ++k) {
    const double a = 2.0 * M_PI * k / directions;
    Eigen::Vector2d w(std::cos(a), std::sin(a));
    if (!c.contains(w, 1e-12)) continue;
    for (int j = 0; j <= 10; ++j) {
      const double w0 = j / 10.0;
      best = std::max(best, q0 * w0 + (1.0 - w0) * (q.dot(w) + pi));
    }
  }
  for (const auto& d : c.spanning_directions()) best = std::max(best, q.dot(d) + pi);
  return best;
}

ControlCone random_cone(std::mt19937_64& rng, int m) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<int> tag(0, 3);
  std::normal_distribution<double> N(0.0, 1.0);
  switch (kind(rng)) {
    case 0: return ControlCone::full(m);
    case 1: {
      std::vector<SignTag> tags;
      for (int j = 0; j < m; ++j) tags.push_back(static_cast<SignTag>(tag(rng)));
      return ControlCone::orthant(tags);
    }
    default: {
      std::vector<Eigen::VectorXd> g;
      for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd v(m);
        for (int j = 0; j < m; ++j) v(j) = N(rng);
        g.push_back(v);
      }
      return ControlCone::generated(m, g);
    }
  }
}

TEST(HamiltonianMax, MatchesDenseSampling) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = dim(rng);
    ControlCone c = random_cone(rng, m);
    Eigen::VectorXd q(m);
    for (int j = 0; j < m; ++j) q(j) = N(rng);
    const double q0 = N(rng);
    const double pi = -std::abs(N(rng));
    HamiltonianMax h = hamiltonian_max(c, q0, q, pi);
    const double s = sampled_max(c, q0, q, pi, 10000);
    EXPECT_NEAR(h.value, s, 1e-6) << "trial " << trial << " m " << m << " kind " << static_cast<int>(c.kind()) << " q0 " << q0 << " q " << q.transpose() << " pi " << pi << " impulse " << h.impulse_value;
    EXPECT_GE(h.value, s - 1e-12);
  }
}

TEST(HamiltonianMax, PositiveHomogeneity) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    ControlCone c = random_cone(rng, 2);
    Eigen::Vector2d q(N(rng), N(rng));
    const double q0 = N(rng);
    const double pi = -std::abs(N(rng));
    const double s = 0.25 + std::abs(N(rng));
    HamiltonianMax a = hamiltonian_max(c, q0, q, pi);
    HamiltonianMax b = hamiltonian_max(c, s * q0, s * q, s * pi);
    EXPECT_NEAR(b.value, s * a.value, 1e-12 * (1.0 + std::abs(b.value)));
    EXPECT_EQ(a.w0, b.w0);
  }
}

TEST(Residuals, BundledCertificatesPass) {
  for (const auto& id : example_ids()) {
    const BundledExample& ex = bundled_example(id);
    ResidualReport r = extremal_residuals(ex.problem, ex.minimizer, ex.multipliers);
    EXPECT_TRUE(r.passes(1e-6)) << id << "\n" << format_residual_report(r, ex.multipliers, 1e-6);
    EXPECT_LE(r.node_h_abs, 1e-5);
    EXPECT_LE(r.sign, 0.0);
    EXPECT_GE(r.nontriviality, 1.0 - 1e-12);
  }
}

TEST(Residuals, Ex2CaseOneApplies) {
  const BundledExample& ex = bundled_example("ex2");
  ResidualReport r = extremal_residuals(ex.problem, ex.minimizer, ex.multipliers);
  EXPECT_TRUE(r.case_i_applies);  // nu(S) = 1 < K = 2
  EXPECT_EQ(r.case_i, 0.0);
}

TEST(Residuals, LiteralEx1SetFailsTheAdjointEquation) {
  const BundledExample& ex = bundled_example("ex1");
  MultiplierSet ms = ex.multipliers;
  ms.path.P.col(0).setZero();
  ms.path.P.col(1).setZero();
  ms.path.P.col(2).setConstant(1.0);
  ResidualReport r = extremal_residuals(ex.problem, ex.minimizer, ms);
  EXPECT_GT(r.adjoint, 0.5);
  EXPECT_FALSE(r.passes(1e-5));
}

TEST(Residuals, Ex1LambdaOneFailsTransversality) {
  const BundledExample& ex = bundled_example("ex1");
  MultiplierSet ms = ex.multipliers;
  ms.lambda = 1.0;
  ResidualReport r = extremal_residuals(ex.problem, ex.minimizer, ms);
  EXPECT_GT(r.transversality, 0.1);
  EXPECT_FALSE(r.passes(1e-5));
}

TEST(Residuals, RandomMultipliersFailOnEx2) {
  const BundledExample& ex = bundled_example("ex2");
  std::mt19937_64 rng(43);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    MultiplierSet ms = ex.multipliers;
    for (int i = 0; i < ms.path.P.size(); ++i) ms.path.P.data()[i] = N(rng);
    ms.pi = -std::abs(N(rng));
    ms.lambda = std::abs(N(rng));
    EXPECT_GT(extremal_residuals(ex.problem, ex.minimizer, ms).max_residual(), 0.1);
  }
}

TEST(Residuals, GridMismatch) {
  const BundledExample& ex = bundled_example("ex2");
  MultiplierSet ms = ex.multipliers;
  ms.path.s(3) += 1e-3;
  EXPECT_THROW(extremal_residuals(ex.problem, ex.minimizer, ms), GridMismatchError);
}

TEST(Normality, Ex1Abnormal) {
  const BundledExample& ex = bundled_example("ex1");
  NormalityResult r = classify_normality(ex.problem, ex.minimizer);
  ASSERT_EQ(r.verdict, Normality::kAbnormal) << r.diagnostic;
  ASSERT_TRUE(r.witness);
  const MultiplierSet& w = *r.witness;
  EXPECT_EQ(w.lambda, 0.0);
  EXPECT_NEAR(w.pi, 0.0, 1e-9);
  EXPECT_LE(w.path.P.col(0).cwiseAbs().maxCoeff(), 1e-9);
  const double c = w.path.P(0, 2);
  EXPECT_GT(std::abs(c), 1e-3);
  EXPECT_LE((w.path.P.col(2).array() - c).abs().maxCoeff(), 1e-9);
  EXPECT_TRUE(extremal_residuals(ex.problem, ex.minimizer, w).passes(1e-5));
}

TEST(Normality, Ex2Normal) {
  const BundledExample& ex = bundled_example("ex2");
  NormalityResult r = classify_normality(ex.problem, ex.minimizer);
  EXPECT_EQ(r.verdict, Normality::kNormal) << r.diagnostic;
  EXPECT_FALSE(r.witness);
}

TEST(Normality, Ex3AbnormalWithStructuredWitness) {
  const BundledExample& ex = bundled_example("ex3");
  NormalityResult r = classify_normality(ex.problem, ex.minimizer);
  ASSERT_EQ(r.verdict, Normality::kAbnormal) << r.diagnostic;
  const MultiplierSet& w = *r.witness;
  const int N = ex.minimizer.intervals();
  const double beta = -w.path.P(N, 2);
  const double gamma = -w.path.P(N, 3);
  EXPECT_GE(gamma, -1e-9);
  EXPECT_GE(beta, 2.0 * gamma - 1e-6);
  EXPECT_EQ(w.lambda, 0.0);
  EXPECT_TRUE(extremal_residuals(ex.problem, ex.minimizer, w).passes(1e-5));
}

TEST(Multipliers, CsvRoundTrip) {
  const MultiplierSet& ms = bundled_example("ex3").multipliers;
  std::stringstream ss;
  write_multipliers_csv(ss, ms);
  MultiplierSet back = read_multipliers_csv(ss);
  EXPECT_EQ(back.path.s, ms.path.s);
  EXPECT_EQ(back.path.P, ms.path.P);
  EXPECT_EQ(back.pi, ms.pi);
  EXPECT_EQ(back.lambda, ms.lambda);
}

}  // namespace
}  // namespace impgap
