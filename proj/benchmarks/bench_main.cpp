#include "impgap/dynamics.hpp"
#include "impgap/examples.hpp"
#include "impgap/expr.hpp"
#include "impgap/pmp.hpp"
#include "impgap/reparam.hpp"
#include "impgap/solver.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

namespace {

using namespace impgap;

void BM_CompiledExpr(benchmark::State& state) {
  const std::vector<std::string> vars{"t", "x1", "x2", "x3"};
  CompiledExpr c(parse("sin(x1) * x2 - 0.5 * x3^2 + exp(t)", vars), vars);
  std::vector<double> v{0.1, 0.2, 0.3, 0.4};
  for (auto _ : state) {
    v[0] += 1e-9;
    benchmark::DoNotOptimize(c(v));
  }
}
BENCHMARK(BM_CompiledExpr);

void BM_IntegrateExtended(benchmark::State& state) {
  const BundledExample& ex = bundled_example("ex2");
  FieldEvaluator fe(ex.problem.fields);
  const int N = static_cast<int>(state.range(0));
  ControlSequence c = ControlSequence::uniform(2.0, Eigen::VectorXd::Constant(N, 0.6),
                                               Eigen::MatrixXd::Constant(N, 2, 0.4 / std::sqrt(2.0)));
  IntegrationOptions io;
  io.substeps = 2;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_extended(fe, c, 0.0, Eigen::Vector3d(1, 0, 0), io));
  state.SetItemsProcessed(state.iterations() * N);
}
BENCHMARK(BM_IntegrateExtended)->Arg(40)->Arg(80)->Arg(320);

void BM_ExtendedVjp(benchmark::State& state) {
  const BundledExample& ex = bundled_example("ex2");
  FieldEvaluator fe(ex.problem.fields);
  const int N = static_cast<int>(state.range(0));
  ControlSequence c = ControlSequence::uniform(2.0, Eigen::VectorXd::Constant(N, 0.6),
                                               Eigen::MatrixXd::Constant(N, 2, 0.4 / std::sqrt(2.0)));
  IntegrationOptions io;
  io.substeps = 2;
  ExtendedTape tape = record_extended(fe, c, Eigen::Vector4d(0, 1, 0, 0), io);
  Eigen::MatrixXd seeds = Eigen::MatrixXd::Zero(N + 1, 4);
  seeds.row(N).setOnes();
  for (auto _ : state) benchmark::DoNotOptimize(extended_vjp(fe, c, tape, seeds, io));
}
BENCHMARK(BM_ExtendedVjp)->Arg(80);

void BM_HamiltonianMaxGenerated(benchmark::State& state) {
  ControlCone c = ControlCone::generated(
      3, {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(-1, 1, 0)});
  Eigen::Vector3d q(0.3, -0.7, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(hamiltonian_max(c, 0.1, q, -0.2));
}
BENCHMARK(BM_HamiltonianMaxGenerated);

void BM_DInfty(benchmark::State& state) {
  const BundledExample& ex = bundled_example("ex1");
  ExtendedProcess b = integrate_extended(
      ex.problem, ControlSequence::uniform(2.0, Eigen::VectorXd::Ones(40), Eigen::MatrixXd::Zero(40, 1)), 0.0,
      Eigen::Vector2d::Zero());
  for (auto _ : state) benchmark::DoNotOptimize(d_infty(ex.minimizer, b));
}
BENCHMARK(BM_DInfty);

void BM_ExtremalResiduals(benchmark::State& state) {
  const BundledExample& ex = bundled_example("ex3");
  for (auto _ : state) benchmark::DoNotOptimize(extremal_residuals(ex.problem, ex.minimizer, ex.multipliers));
}
BENCHMARK(BM_ExtremalResiduals)->Unit(benchmark::kMillisecond);

void BM_ClassifyNormality(benchmark::State& state) {
  const BundledExample& ex = bundled_example(state.range(0) == 1 ? "ex1" : "ex3");
  for (auto _ : state) benchmark::DoNotOptimize(classify_normality(ex.problem, ex.minimizer));
}
BENCHMARK(BM_ClassifyNormality)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SolveExtendedSingleStart(benchmark::State& state) {
  const ProblemSpec& p = bundled_example("ex1").problem;
  SolveConfig cfg;
  cfg.multistarts = 1;
  cfg.N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_extended(p, cfg));
}
BENCHMARK(BM_SolveExtendedSingleStart)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
