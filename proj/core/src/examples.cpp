#include "impgap/examples.hpp"

#include "impgap/dynamics.hpp"
#include "impgap/problem_io.hpp"

#include <map>
#include <mutex>

namespace impgap {

namespace {

constexpr int kHalf = 20;

const char* kEx1 = R"(name: ex1
n: 2
m: 1
f: ["0", "x1"]
g:
  - ["1", "0"]
cone: {kind: orthant, tags: [nonneg]}
K: 1
cost: "-x2_1"
target:
  t1: {fixed: 0}
  x1: [{fixed: 0}, {fixed: 0}]
  t2: {fixed: 1}
  x2: [free, {hi: 0}]
)";

const char* kEx2 = R"(name: ex2
n: 3
m: 2
f: ["0", "x2", "0"]
g:
  - ["1", "0", "x2"]
  - ["0", "1", "-x1"]
cone: {kind: full}
K: 2
cost: "-x2_1"
target:
  t1: {fixed: 0}
  x1: [{fixed: 1}, {fixed: 0}, {fixed: 0}]
  t2: {fixed: 1}
  x2: [{hi: 0}, {hi: 0}, {hi: 0}]
)";

const char* kEx3 = R"(name: ex3
n: 3
m: 2
f: ["0", "0", "0"]
g:
  - ["1", "0", "x2"]
  - ["0", "1", "-x1"]
cone: {kind: orthant, tags: [free, nonneg]}
K: 2
cost: "-x2_1"
target:
  t1: {fixed: 0}
  x1: [{fixed: 1}, {fixed: 0}, {fixed: 0}]
  t2: {fixed: 1}
  x2: [{hi: 0}, {hi: 0}, {hi: 0}]
)";

// Drift on [0, 1], then the impulse direction `w` on [1, 2].
ExtendedProcess two_phase(const ProblemSpec& p, const Eigen::VectorXd& w, const Eigen::VectorXd& y_init) {
  const int N = 2 * kHalf;
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(N);
  Eigen::MatrixXd ww = Eigen::MatrixXd::Zero(N, p.m());
  for (int k = 0; k < kHalf; ++k) w0(k) = 1.0;
  for (int k = kHalf; k < N; ++k) ww.row(k) = w.transpose();
  IntegrationOptions io;
  io.substeps = 8;
  return integrate_extended(p, ControlSequence::uniform(2.0, w0, ww), 0.0, y_init, io);
}

template <class Fn>
MultiplierSet multipliers_on(const ExtendedProcess& ep, int d, Fn costate, double pi, double lambda) {
  MultiplierSet ms;
  ms.path.s = ep.s;
  ms.path.P.resize(ep.s.size(), d);
  for (Eigen::Index k = 0; k < ep.s.size(); ++k) ms.path.P.row(k) = costate(ep.s(k)).transpose();
  ms.pi = pi;
  ms.lambda = lambda;
  return ms;
}

BundledExample make(const std::string& id) {
  BundledExample ex;
  ex.id = id;
  if (id == "ex1") {
    ex.summary = "double integrator with monotone control; extended infimum -1, strict infimum 0 (gap)";
    ex.problem_yaml = kEx1;
    ex.problem = parse_problem(ex.problem_yaml);
    ex.minimizer = two_phase(ex.problem, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(2));
    ex.multipliers = multipliers_on(
        ex.minimizer, 3,
        [](double s) {
          Eigen::VectorXd P(3);
          P << 0.0, s < 1.0 ? -(1.0 - s) : 0.0, -1.0;
          return P;
        },
        0.0, 0.0);
  } else if (id == "ex2") {
    ex.summary = "nonholonomic integrator with drift; normal minimizer, no gap";
    ex.problem_yaml = kEx2;
    ex.problem = parse_problem(ex.problem_yaml);
    Eigen::VectorXd w(2);
    w << -1.0, 0.0;
    ex.minimizer = two_phase(ex.problem, w, Eigen::Vector3d(1.0, 0.0, 0.0));
    ex.multipliers = multipliers_on(
        ex.minimizer, 4, [](double) { return Eigen::VectorXd::Zero(4); }, 0.0, 1.0);
  } else if (id == "ex3") {
    ex.summary = "driftless nonholonomic integrator on a half-plane cone; abnormal minimizer, no gap";
    ex.problem_yaml = kEx3;
    ex.problem = parse_problem(ex.problem_yaml);
    Eigen::VectorXd w(2);
    w << -1.0, 0.0;
    ex.minimizer = two_phase(ex.problem, w, Eigen::Vector3d(1.0, 0.0, 0.0));
    const double beta = 3.0;
    const double gamma = 1.0;
    ex.multipliers = multipliers_on(
        ex.minimizer, 4,
        [=](double s) {
          Eigen::VectorXd P(4);
          P << 0.0, 0.0, s <= 1.0 ? gamma - beta : gamma * (2.0 - s) - beta, -gamma;
          return P;
        },
        0.0, 0.0);
  } else {
    throw UnknownExampleError("unknown example id '" + id + "' (known: ex1, ex2, ex3)");
  }
  return ex;
}

}  // namespace

std::vector<std::string> example_ids() { return {"ex1", "ex2", "ex3"}; }

const BundledExample& bundled_example(const std::string& id) {
  static std::mutex mu;
  static std::map<std::string, BundledExample> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(id);
  if (it == cache.end()) it = cache.emplace(id, make(id)).first;
  return it->second;
}

}  // namespace impgap
