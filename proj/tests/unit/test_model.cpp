#include "impgap/examples.hpp"
#include "impgap/model.hpp"
#include "impgap/problem_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace impgap {
namespace {

bool has_issue(const ValidationReport& r, const std::string& needle) {
  for (const auto& i : r.issues) {
    if (i.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(Validate, BundledExamplesAreValid) {
  for (const auto& id : example_ids()) EXPECT_TRUE(validate(bundled_example(id).problem).ok()) << id;
  const ProblemSpec& p = bundled_example("ex1").problem;
  EXPECT_EQ(p.n(), 2);
  EXPECT_EQ(p.m(), 1);
  EXPECT_EQ(p.K, 1.0);
}

TEST(Validate, NonPositiveK) {
  ProblemSpec p = bundled_example("ex1").problem;
  p.K = 0.0;
  EXPECT_TRUE(has_issue(validate(p), "K must be positive"));
}

TEST(Validate, DecreasingInV) {
  ProblemSpec p = bundled_example("ex1").problem;
  p.cost.h = parse("-v", CostSpec::variable_names(2));
  ValidationReport r = validate(p);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_issue(r, "v"));
}

TEST(Validate, EmptyTarget) {
  ProblemSpec p = bundled_example("ex1").problem;
  p.target.bounds[3] = Bound::interval(1.0, 0.0);
  EXPECT_FALSE(validate(p).ok());
  ProblemSpec q = bundled_example("ex1").problem;
  Halfspace a{Eigen::VectorXd::Zero(6), -1.0};
  a.a(4) = 1.0;
  Halfspace b{Eigen::VectorXd::Zero(6), -1.0};
  b.a(4) = -1.0;
  q.target.halfspaces = {a, b};
  EXPECT_FALSE(validate(q).ok());
}

TEST(Validate, DimensionMismatch) {
  ProblemSpec p = bundled_example("ex1").problem;
  p.fields.f.pop_back();
  EXPECT_FALSE(validate(p).ok());
}

TEST(Cone, Projections) {
  EXPECT_DOUBLE_EQ(project_cone(ControlCone::orthant({SignTag::kNonneg}), Eigen::VectorXd::Constant(1, -2.0))(0), 0.0);
  Eigen::Vector2d q(1.0, -3.0);
  Eigen::VectorXd p = project_cone(ControlCone::orthant({SignTag::kFree, SignTag::kNonneg}), q);
  EXPECT_DOUBLE_EQ(p(0), 1.0);
  EXPECT_DOUBLE_EQ(p(1), 0.0);
  ControlCone g = ControlCone::generated(2, {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(1.0, 1.0)});
  Eigen::VectorXd pg = project_cone(g, Eigen::Vector2d(0.0, 1.0));
  EXPECT_NEAR(pg(0), 0.5, 1e-12);
  EXPECT_NEAR(pg(1), 0.5, 1e-12);
  Eigen::VectorXd pz = project_cone(ControlCone::orthant({SignTag::kZero, SignTag::kNonpos}), q);
  EXPECT_DOUBLE_EQ(pz(0), 0.0);
  EXPECT_DOUBLE_EQ(pz(1), -3.0);
}

std::vector<ControlCone> sample_cones() {
  return {ControlCone::full(3),
          ControlCone::orthant({SignTag::kFree, SignTag::kNonneg, SignTag::kNonpos}),
          ControlCone::generated(3, {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(1, 1, 1)}),
          ControlCone::generated(3, {Eigen::Vector3d(1, 0.2, 0), Eigen::Vector3d(0, 1, 0.3), Eigen::Vector3d(0.1, 0, 1),
                                     Eigen::Vector3d(-1, 1, 1)})};
}

TEST(Cone, ProjectionOptimality) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N(0.0, 1.0);
  for (const ControlCone& c : sample_cones()) {
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::Vector3d q(N(rng), N(rng), N(rng));
      Eigen::VectorXd p = c.project(q);
      Eigen::VectorXd r = q - p;
      EXPECT_NEAR(r.dot(p), 0.0, 1e-10);
      for (const auto& d : c.spanning_directions()) EXPECT_LE(r.dot(d), 1e-10);
      EXPECT_TRUE(c.contains(p, 1e-9));
    }
  }
}

TEST(Cone, SupportMatchesProjectionNorm) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N(0.0, 1.0);
  ControlCone c = ControlCone::generated(2, {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(1.0, 1.0)});
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Vector2d q(N(rng), N(rng));
    const double proj = c.project(q).norm();
    if (proj < 1e-6) continue;
    double best = -1e300;
    const int K = 200000;
    for (int k = 0; k <= K; ++k) {
      const double a = (M_PI / 4.0) * k / K;
      best = std::max(best, q(0) * std::cos(a) + q(1) * std::sin(a));
    }
    EXPECT_NEAR(best, proj, 1e-6);
  }
}

TEST(Target, NormalConeExamples) {
  const ProblemSpec& p1 = bundled_example("ex1").problem;
  Eigen::VectorXd z(6);
  z << 0, 0, 0, 1, 1, 0;
  NormalConeGenerators g = normal_cone_generators(p1.target, z);
  ASSERT_EQ(g.rays.size(), 1u);
  EXPECT_EQ(g.rays[0].z(5), 1.0);
  EXPECT_EQ(g.rays[0].x2(2)(0), 0.0);
  EXPECT_EQ(g.lineality.size(), 4u);  // t1, x1 (2), t2 fixed; x2_1 free

  const ProblemSpec& p2 = bundled_example("ex2").problem;
  Eigen::VectorXd z2 = Eigen::VectorXd::Zero(8);
  z2(1) = 1.0;
  z2(4) = 1.0;
  NormalConeGenerators g2 = normal_cone_generators(p2.target, z2);
  ASSERT_EQ(g2.rays.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(g2.rays[static_cast<std::size_t>(i)].x2(3)(i), 1.0);

  Eigen::VectorXd off = z2;
  off(6) = 0.5;
  EXPECT_THROW(normal_cone_generators(p2.target, off), NotOnTargetError);
}

TEST(Target, NormalConeInequality) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  TargetSpec t(2);
  t.bounds = {Bound::fixed(0), Bound::interval(-1, 1), Bound::free(), Bound::interval(0, 2),
              Bound::free(), Bound::interval(-kInf, 0)};
  Halfspace h{Eigen::VectorXd::Zero(6), 1.0};
  h.a(1) = 1.0;
  h.a(4) = 1.0;
  t.halfspaces = {h};
  Eigen::VectorXd z(6);
  z << 0, 1, 0.3, 2, 0.0, 0.0;
  NormalConeGenerators g = normal_cone_generators(t, z);
  EXPECT_GE(g.rays.size(), 3u);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd zp = z;
    for (int i = 0; i < 6; ++i) zp(i) += 0.2 * U(rng);
    zp = t.project(zp);
    if (t.violation(zp) > 1e-12) continue;
    for (const auto& r : g.rays) EXPECT_LE(r.z.dot(zp - z), 1e-9 * (zp - z).norm() + 1e-12);
    for (const auto& l : g.lineality) EXPECT_NEAR(l.z.dot(zp - z), 0.0, 1e-12);
  }
}

TEST(ProblemIo, RoundTrip) {
  for (const auto& id : example_ids()) {
    const ProblemSpec& p = bundled_example(id).problem;
    ProblemSpec q = parse_problem(dump_problem(p));
    EXPECT_EQ(q.n(), p.n());
    EXPECT_EQ(q.m(), p.m());
    EXPECT_EQ(q.K, p.K);
    EXPECT_EQ(q.cone.kind(), p.cone.kind());
    for (std::size_t i = 0; i < p.target.bounds.size(); ++i) {
      EXPECT_EQ(q.target.bounds[i].lo, p.target.bounds[i].lo);
      EXPECT_EQ(q.target.bounds[i].hi, p.target.bounds[i].hi);
    }
    EXPECT_EQ(dump_problem(q), dump_problem(p));
  }
}

TEST(ProblemIo, GeneratedConeAndHalfspaces) {
  ProblemSpec p = parse_problem(R"(name: h
n: 1
m: 2
f: ["x1"]
g:
  - ["1"]
  - ["t"]
cone: {kind: generated, generators: [[1, 0], [1, 1]]}
K: inf
cost: "x2_1 + v"
target:
  t1: {fixed: 0}
  x1: [{lo: -1, hi: 1}]
  t2: free
  x2: [free]
  halfspaces:
    - {a: [0, 0, 1, 1], b: 3}
  epigraph: true
)");
  EXPECT_EQ(p.cone.kind(), ControlCone::Kind::kGenerated);
  EXPECT_NEAR(p.cone.generators()[1].norm(), 1.0, 1e-15);
  EXPECT_TRUE(std::isinf(p.K));
  ASSERT_EQ(p.target.halfspaces.size(), 1u);
  EXPECT_EQ(p.target.halfspaces[0].b, 3.0);
  EXPECT_TRUE(p.target.epigraph_declared);
  EXPECT_TRUE(validate(p).ok());
}

TEST(ProblemIo, MalformedInput) {
  EXPECT_THROW(parse_problem("n: [1"), ProblemFormatError);
  EXPECT_THROW(parse_problem("name: x\nn: 1\nm: 1\nf: [\"x1 +\"]\ng:\n  - [\"1\"]\ncone: {kind: full}\ncost: \"0\"\n"
                             "target:\n  t1: free\n  x1: [free]\n  t2: free\n  x2: [free]\n"),
               std::exception);
  EXPECT_THROW(load_problem("/nonexistent/problem.yaml"), std::exception);
}

}  // namespace
}  // namespace impgap
