#pragma once

#include "impgap/dynamics.hpp"
#include "impgap/model.hpp"
#include "impgap/problem_io.hpp"
#include "impgap/process.hpp"

#include <Eigen/Dense>

#include <random>
#include <string>

namespace impgap::test {

inline StrictProcess random_strict(std::mt19937_64& rng, const ProblemSpec& p, int M) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> dt(0.05, 0.3);
  Eigen::VectorXd t(M + 1);
  t(0) = U(rng);
  for (int k = 0; k < M; ++k) t(k + 1) = t(k) + dt(rng);
  Eigen::MatrixXd du(M, p.m());
  for (int k = 0; k < M; ++k) {
    Eigen::VectorXd q(p.m());
    for (int j = 0; j < p.m(); ++j) q(j) = 2.0 * U(rng);
    du.row(k) = p.cone.project(q).transpose();
  }
  Eigen::VectorXd x0(p.n());
  for (int i = 0; i < p.n(); ++i) x0(i) = U(rng);
  return integrate_strict(p, t, du, x0);
}

/// Canonical controls with a random mix of drift and impulse intervals.
inline ControlSequence random_canonical(std::mt19937_64& rng, const ProblemSpec& p, int N, double S) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  Eigen::VectorXd w0(N);
  Eigen::MatrixXd w(N, p.m());
  for (int k = 0; k < N; ++k) {
    Eigen::VectorXd q(p.m());
    for (int j = 0; j < p.m(); ++j) q(j) = U(rng);
    Eigen::VectorXd d = p.cone.project(q);
    double theta = U01(rng);
    if (d.norm() < 1e-9) {
      theta = 1.0;
      d.setZero();
    } else {
      d /= d.norm();
    }
    if (d.norm() > 0.0 && U01(rng) < 0.2) theta = 0.0;
    w0(k) = theta;
    w.row(k) = ((1.0 - theta) * d).transpose();
  }
  return ControlSequence::uniform(S, w0, w);
}

/// Random smooth fields of low degree on n states and m controls.
inline ProblemSpec random_problem(std::mt19937_64& rng, int n, int m) {
  std::uniform_int_distribution<int> pick(0, 5);
  std::uniform_int_distribution<int> var(1, n);
  auto term = [&]() -> std::string {
    const std::string xi = "x" + std::to_string(var(rng));
    const std::string xj = "x" + std::to_string(var(rng));
    switch (pick(rng)) {
      case 0: return "0.5*" + xi;
      case 1: return "sin(" + xi + ")";
      case 2: return xi + "*" + xj;
      case 3: return "cos(t) - 0.3*" + xi;
      case 4: return "1";
      default: return "0.2*" + xi + "^2 - t";
    }
  };
  std::string y = "name: random\nn: " + std::to_string(n) + "\nm: " + std::to_string(m) + "\nf: [";
  for (int i = 0; i < n; ++i) y += (i ? ", \"" : "\"") + term() + "\"";
  y += "]\ng:\n";
  for (int j = 0; j < m; ++j) {
    y += "  - [";
    for (int i = 0; i < n; ++i) y += (i ? ", \"" : "\"") + term() + "\"";
    y += "]\n";
  }
  y += "cone: {kind: full}\nK: inf\ncost: \"0\"\ntarget:\n  t1: free\n  x1: [";
  for (int i = 0; i < n; ++i) y += i ? ", free" : "free";
  y += "]\n  t2: free\n  x2: [";
  for (int i = 0; i < n; ++i) y += i ? ", free" : "free";
  y += "]\n";
  return parse_problem(y);
}

}  // namespace impgap::test
