#include "helpers.hpp"

#include "impgap/examples.hpp"
#include "impgap/reparam.hpp"
#include "impgap/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

namespace impgap {
namespace {

StrictProcess constant_du(const ProblemSpec& p, double du, int M = 10) {
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(M + 1, 0.0, 1.0);
  return integrate_strict(p, t, Eigen::MatrixXd::Constant(M, p.m(), du), Eigen::VectorXd::Zero(p.n()));
}

TEST(Embed, ZeroControlIsIdentityTime) {
  const ProblemSpec& p = bundled_example("ex1").problem;
  ExtendedProcess ep = embed(constant_du(p, 0.0));
  EXPECT_NEAR(ep.S(), 1.0, 1e-12);
  for (int k = 0; k < ep.intervals(); ++k) {
    EXPECT_EQ(ep.w0(k), 1.0);
    EXPECT_EQ(ep.w(k, 0), 0.0);
  }
  for (Eigen::Index k = 0; k < ep.s.size(); ++k) EXPECT_NEAR(ep.y0(k), ep.s(k), 1e-12);
}

TEST(Embed, UnitControlDoublesArcLength) {
  const ProblemSpec& p = bundled_example("ex1").problem;
  ExtendedProcess ep = embed(constant_du(p, 1.0));
  EXPECT_NEAR(ep.S(), 2.0, 1e-12);
  EXPECT_NEAR(ep.nu_final(), 1.0, 1e-12);
  for (int k = 0; k < ep.intervals(); ++k) {
    EXPECT_NEAR(ep.w0(k), 0.5, 1e-15);
    EXPECT_NEAR(ep.w(k, 0), 0.5, 1e-15);
  }
  EXPECT_LE(ep.s_identity_error(), 1e-12);
}

TEST(Embed, InvertsHandExample) {
  const ProblemSpec& p = bundled_example("ex1").problem;
  const int N = 8;
  ExtendedProcess ep = integrate_extended(
      p, ControlSequence::uniform(2.0, Eigen::VectorXd::Constant(N, 0.5), Eigen::MatrixXd::Constant(N, 1, 0.5)), 0.0,
      Eigen::VectorXd::Zero(2));
  StrictProcess sp = invert_embedding(ep);
  EXPECT_NEAR(sp.t1(), 0.0, 1e-15);
  EXPECT_NEAR(sp.t2(), 1.0, 1e-12);
  for (int k = 0; k < sp.intervals(); ++k) EXPECT_NEAR(sp.du(k, 0), 1.0, 1e-12);
}

TEST(Embed, InvertRejectsImpulses) {
  EXPECT_THROW(invert_embedding(bundled_example("ex1").minimizer), NotEmbeddedError);
}

TEST(Embed, RoundTripAndInvariants) {
  std::mt19937_64 rng(21);
  for (const auto& id : example_ids()) {
    const ProblemSpec& p = bundled_example(id).problem;
    for (int trial = 0; trial < 20; ++trial) {
      StrictProcess sp = test::random_strict(rng, p, 12);
      ExtendedProcess ep = embed(sp);
      EXPECT_GT(ep.min_w0(), 0.0);
      EXPECT_LE(ep.canonical_error(), 1e-15);
      EXPECT_LE(ep.s_identity_error(), 1e-9);
      EXPECT_EQ(ep.nu(0), 0.0);
      for (int k = 0; k < ep.intervals(); ++k) {
        EXPECT_GE(ep.nu(k + 1), ep.nu(k));
        EXPECT_TRUE(p.cone.contains(ep.w.row(k).transpose(), 1e-9));
      }
      StrictProcess back = invert_embedding(ep);
      EXPECT_LE(d_infty(back, sp), 1e-9);
    }
  }
}

TEST(Embed, StrictProcessInvariants) {
  std::mt19937_64 rng(22);
  const ProblemSpec& p = bundled_example("ex3").problem;
  StrictProcess sp = test::random_strict(rng, p, 10);
  EXPECT_EQ(sp.v(0), 0.0);
  for (int k = 0; k < sp.intervals(); ++k) {
    const double h = sp.t(k + 1) - sp.t(k);
    EXPECT_NEAR(sp.v(k + 1) - sp.v(k), sp.du.row(k).norm() * h, 1e-9);
    EXPECT_LE((sp.u.row(k + 1) - sp.u.row(k) - h * sp.du.row(k)).norm(), 1e-9);
    EXPECT_TRUE(p.cone.contains(sp.du.row(k).transpose(), 1e-9));
  }
}

TEST(ArcNormalize, CanonicalInputUnchanged) {
  const ExtendedProcess& ep = bundled_example("ex2").minimizer;
  ControlSequence c = ep.controls();
  ControlSequence n = arc_normalize(c);
  EXPECT_EQ(n.ds, c.ds);
  EXPECT_EQ(n.w0, c.w0);
  EXPECT_EQ(n.w, c.w);
}

TEST(ArcNormalize, DoubledRatesOnHalvedDurations) {
  const ExtendedProcess& ep = bundled_example("ex2").minimizer;
  ControlSequence c = ep.controls();
  ControlSequence d = c;
  d.w0 *= 2.0;
  d.w *= 2.0;
  d.ds *= 0.5;
  ControlSequence n = arc_normalize(d);
  EXPECT_LE((n.ds - c.ds).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((n.w0 - c.w0).cwiseAbs().maxCoeff(), 1e-15);
  const ProblemSpec& p = bundled_example("ex2").problem;
  ExtendedProcess a = integrate_extended(p, d, 0.0, ep.y.row(0).transpose());
  EXPECT_LE((a.endpoint() - ep.endpoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ArcNormalize, RateIndependence) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> scale(0.3, 3.0);
  const ProblemSpec& p = bundled_example("ex2").problem;
  for (int trial = 0; trial < 10; ++trial) {
    ControlSequence c = test::random_canonical(rng, p, 20, 2.0);
    for (int k = 0; k < c.size(); ++k) {
      const double r = scale(rng);
      c.w0(k) *= r;
      c.w.row(k) *= r;
    }
    IntegrationOptions io;
    io.substeps = 32;
    ExtendedProcess a = integrate_extended(p, c, 0.0, Eigen::Vector3d(1, 0, 0), io);
    ExtendedProcess b = integrate_extended(p, arc_normalize(c), 0.0, Eigen::Vector3d(1, 0, 0), io);
    EXPECT_LE((a.y.bottomRows(1) - b.y.bottomRows(1)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE(b.canonical_error(), 1e-12);
  }
}

TEST(DInfty, Basics) {
  const ProblemSpec& p = bundled_example("ex1").problem;
  StrictProcess a = constant_du(p, 0.0);
  EXPECT_EQ(d_infty(a, a), 0.0);
  StrictProcess b = a;
  b.x.col(0).array() += 0.3;
  EXPECT_NEAR(d_infty(a, b), 0.3, 1e-15);
}

TEST(DInfty, MinimizerVsZeroControlUsesEuclideanNorm) {
  const BundledExample& ex = bundled_example("ex1");
  ExtendedProcess zero = embed(constant_du(ex.problem, 0.0));
  // The y1 and nu gaps are both 1 at s = 2; the Euclidean norm of the stacked gap is sqrt(2).
  EXPECT_NEAR(d_infty(ex.minimizer, zero), std::sqrt(2.0), 1e-9);
}

TEST(Strictify, Ex3MinimizerEndpoints) {
  const BundledExample& ex = bundled_example("ex3");
  IntegrationOptions io;
  io.substeps = 64;
  StrictProcess sp = no_drift_strictify(ex.problem, ex.minimizer, 1.0, io);
  Eigen::VectorXd e = sp.endpoint();
  EXPECT_NEAR(sp.t1(), 0.0, 1e-12);
  EXPECT_NEAR(sp.t2(), 1.0, 1e-12);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(sp.x(sp.intervals(), i), 0.0, 1e-6);
  EXPECT_NEAR(sp.v(sp.intervals()), 1.0, 1e-9);
  EXPECT_LE(feasibility_residual(ex.problem, embed(sp)), 1e-6);
}

TEST(Strictify, RequiresDriftFree) {
  const BundledExample& ex = bundled_example("ex2");
  EXPECT_THROW(no_drift_strictify(ex.problem, ex.minimizer), NoDriftError);
}

TEST(Strictify, StrictInputKeepsEndpoints) {
  std::mt19937_64 rng(25);
  const ProblemSpec& p = bundled_example("ex3").problem;
  StrictProcess sp = test::random_strict(rng, p, 12);
  ExtendedProcess ep = embed(sp);
  StrictProcess back = no_drift_strictify(p, ep, 0.0);
  EXPECT_NEAR(back.t1(), sp.t1(), 1e-12);
  EXPECT_NEAR(back.t2(), sp.t2(), 1e-12);
  EXPECT_LE((back.x.bottomRows(1) - sp.x.bottomRows(1)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(back.v(back.intervals()), sp.v(sp.intervals()), 1e-12);
}

TEST(Strictify, RandomDriftlessEndpoints) {
  std::mt19937_64 rng(26);
  const ProblemSpec& p = bundled_example("ex3").problem;
  IntegrationOptions io;
  io.substeps = 16;
  for (int trial = 0; trial < 5; ++trial) {
    ControlSequence c = test::random_canonical(rng, p, 2000, 2.0);
    c.w0(0) = std::max(c.w0(0), 0.1);
    ExtendedProcess ep = integrate_extended(p, c, 0.0, Eigen::Vector3d(1, 0, 0), io);
    StrictProcess sp = no_drift_strictify(p, ep, 1.0, io);
    Eigen::VectorXd ee = ep.endpoint();
    Eigen::VectorXd se = sp.endpoint();
    EXPECT_LE((ee - se).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(sp.v(sp.intervals()), ep.nu_final(), 1e-6);
  }
}

TEST(ProcessCsv, RoundTrip) {
  const ExtendedProcess& ep = bundled_example("ex2").minimizer;
  std::stringstream ss;
  write_extended_csv(ss, ep);
  ExtendedProcess back = read_extended_csv(ss);
  EXPECT_EQ(back.s, ep.s);
  EXPECT_EQ(back.y, ep.y);
  EXPECT_EQ(back.w, ep.w);
  EXPECT_EQ(back.nu, ep.nu);

  std::mt19937_64 rng(27);
  StrictProcess sp = test::random_strict(rng, bundled_example("ex1").problem, 6);
  std::stringstream ss2;
  write_strict_csv(ss2, sp);
  StrictProcess sback = read_strict_csv(ss2);
  EXPECT_EQ(sback.t, sp.t);
  EXPECT_EQ(sback.du, sp.du);

  std::stringstream bad("s,y0,y1\n0,0\n");
  EXPECT_THROW(read_extended_csv(bad), CsvError);
}

}  // namespace
}  // namespace impgap
