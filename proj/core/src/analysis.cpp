#include "impgap/analysis.hpp"

#include "impgap/dynamics.hpp"
#include "impgap/reparam.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace impgap {

namespace {

std::vector<Eigen::VectorXd> normal_covectors(const ProblemSpec& p, const Eigen::VectorXd& endpoint,
                                              const ControllabilityOptions& opt) {
  const NormalConeGenerators gens = normal_cone_generators(p.target, endpoint, opt.active_tol);
  std::vector<Eigen::VectorXd> out;
  for (const auto& r : gens.rays) out.push_back(r.z);
  for (const auto& l : gens.lineality) {
    out.push_back(l.z);
    out.push_back(-l.z);
  }
  if (gens.rays.empty() && gens.lineality.empty()) return out;
  std::mt19937_64 rng(opt.seed);
  std::exponential_distribution<double> ex(1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  const Eigen::Index dim = endpoint.size();
  for (int s = 0; s < opt.samples; ++s) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);
    for (const auto& r : gens.rays) z += ex(rng) * r.z;
    for (const auto& l : gens.lineality) z += nd(rng) * l.z;
    const double nz = z.norm();
    if (nz > 0.0) out.push_back(z / nz);
  }
  return out;
}

template <class Test>
ControllabilityResult run_test(const ProblemSpec& p, const Eigen::VectorXd& endpoint, const ControllabilityOptions& opt,
                               Test&& test) {
  const int n = p.n();
  ControllabilityResult res;
  res.holds = true;
  for (const auto& zeta : normal_covectors(p, endpoint, opt)) {
    const Eigen::VectorXd zx2 = zeta.segment(2 + n, n);
    if (zx2.norm() <= 1e-12) continue;
    ++res.covectors_tested;
    const double v = test(zx2);
    if (!(v < -opt.tol)) {
      res.holds = false;
      res.witness = zeta;
      res.value = v;
      return res;
    }
  }
  res.vacuous = res.covectors_tested == 0;
  return res;
}

Eigen::VectorXd endpoint_state(const ProblemSpec& p, const Eigen::VectorXd& endpoint) {
  return endpoint.segment(1 + p.n(), 1 + p.n());
}

}  // namespace

ControllabilityResult quick_1_controllability(const ProblemSpec& p, const Eigen::VectorXd& endpoint,
                                              const ControllabilityOptions& opt) {
  FieldEvaluator fe(p.fields);
  const int n = p.n();
  const int m = p.m();
  const Eigen::VectorXd z = endpoint_state(p, endpoint);
  Eigen::VectorXd f(n);
  Eigen::MatrixXd G(n, m);
  fe.fields(z.data(), f.data(), G.data());
  return run_test(p, endpoint, opt, [&](const Eigen::VectorXd& zx2) {
    const Eigen::VectorXd q = G.transpose() * zx2;
    return -p.cone.project(-q).norm();
  });
}

ControllabilityResult drift_controllability(const ProblemSpec& p, const Eigen::VectorXd& endpoint,
                                            const ControllabilityOptions& opt) {
  FieldEvaluator fe(p.fields);
  const int n = p.n();
  const int m = p.m();
  const Eigen::VectorXd z = endpoint_state(p, endpoint);
  Eigen::VectorXd f(n);
  Eigen::MatrixXd G(n, m);
  fe.fields(z.data(), f.data(), G.data());
  return run_test(p, endpoint, opt, [&](const Eigen::VectorXd& zx2) { return zx2.dot(f); });
}

Certification certify_no_gap(const ProblemSpec& p, const ExtendedProcess& minimizer, Normality classification,
                             double tol, const ControllabilityOptions& copt) {
  Certification c;
  c.normality = classification;
  const Eigen::VectorXd e = minimizer.endpoint();
  try {
    c.qc = quick_1_controllability(p, e, copt);
    c.dc = drift_controllability(p, e, copt);
  } catch (const NotOnTargetError&) {
    c.qc.reset();
    c.dc.reset();
  }
  const int N = minimizer.intervals();
  const bool slack_nu = !std::isfinite(p.K) || minimizer.nu_final() < p.K - tol;
  const bool qc = c.qc && c.qc->holds;
  const bool dc = c.dc && c.dc->holds;
  if (p.fields.drift_free()) {
    c.certified = true;
    c.reason = "no-drift";
  } else if (minimizer.y0(N) > minimizer.y0(0) + tol && slack_nu && qc) {
    c.certified = true;
    c.reason = "QC";
  } else if (p.target.epigraph_declared && (dc || (slack_nu && qc))) {
    c.certified = true;
    c.reason = "epigraph";
  } else if (classification == Normality::kNormal) {
    c.certified = true;
    c.reason = "normality";
  }
  return c;
}

const char* to_string(GapVerdict v) {
  switch (v) {
    case GapVerdict::kNoGapCertified:
      return "NoGapCertified";
    case GapVerdict::kNoGapEmpirical:
      return "NoGap(empirical)";
    case GapVerdict::kGapDetected:
      return "GapDetected";
    case GapVerdict::kInconclusive:
      return "Inconclusive";
  }
  return "?";
}

GapReport gap_probe(const ProblemSpec& p, const SolveConfig& cfg, const GapProbeOptions& opt) {
  if (opt.eps_grid.empty()) throw std::invalid_argument("gap_probe: empty eps grid");
  GapReport r;
  r.problem = p.name;
  Candidate ext = solve_extended(p, cfg);
  r.extended_cost = ext.cost;
  r.extended_feasible = ext.feasible;
  if (!ext.feasible) {
    std::ostringstream os;
    os << "extended solve infeasible (residual " << ext.feasibility << ")";
    r.diagnostics.push_back(os.str());
  }
  std::vector<double> grid = opt.eps_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  for (double eps : grid) {
    Candidate c = solve_strict_restricted(p, eps, cfg);
    r.strict.push_back({eps, c.cost, c.feasible, c.feasibility});
    if (!c.feasible) {
      std::ostringstream os;
      os << "strict solve at eps " << eps << " infeasible (residual " << c.feasibility << ")";
      r.diagnostics.push_back(os.str());
    }
  }
  r.threshold = std::max(10.0 * cfg.tol_feas, 0.05 * (1.0 + std::abs(ext.feasible ? ext.cost : 0.0)));
  const EpsilonPoint& last = r.strict.back();
  if (ext.feasible && last.feasible) {
    r.estimate = last.cost - ext.cost;
    if (r.strict.size() >= 2) {
      const EpsilonPoint& prev = r.strict[r.strict.size() - 2];
      r.flat = prev.feasible && std::abs(prev.cost - last.cost) < 0.2 * std::abs(r.estimate);
    } else {
      r.flat = true;
    }
    if (r.estimate > r.threshold) {
      r.empirical = r.flat ? GapVerdict::kGapDetected : GapVerdict::kInconclusive;
    } else {
      r.empirical = GapVerdict::kNoGapEmpirical;
    }
  }
  for (std::size_t i = 1; i < r.strict.size(); ++i) {
    const auto& a = r.strict[i - 1];
    const auto& b = r.strict[i];
    if (a.feasible && b.feasible && b.cost > a.cost + 2.0 * cfg.tol_stat) {
      std::ostringstream os;
      os << "J_eps increased from " << a.cost << " (eps " << a.eps << ") to " << b.cost << " (eps " << b.eps << ")";
      r.diagnostics.push_back(os.str());
    }
  }

  const ExtendedProcess* cert_on = opt.minimizer;
  r.certified_on = cert_on ? "supplied minimizer" : "solver candidate";
  if (!cert_on && ext.feasible) cert_on = &ext.process;
  if (cert_on) {
    NormalityResult nr = classify_normality(p, *cert_on, opt.normality);
    r.certification = certify_no_gap(p, *cert_on, nr.verdict, opt.tol, opt.controllability);
  } else {
    r.certified_on = "none";
    r.certification = certify_no_gap(p, ext.process, Normality::kUndetermined, opt.tol, opt.controllability);
    if (r.certification.reason != "no-drift") r.certification = Certification{};
  }
  if (r.certification.certified) {
    r.verdict = GapVerdict::kNoGapCertified;
    if (r.empirical == GapVerdict::kGapDetected) {
      r.solver_flag = true;
      r.diagnostics.push_back("WARNING: certified no gap but an empirical gap was measured; suspect solver failure");
    }
  } else {
    r.verdict = r.empirical;
  }
  return r;
}

std::string format_gap_report(const GapReport& r) {
  std::ostringstream os;
  char buf[256];
  os << "problem " << r.problem << "\n";
  std::snprintf(buf, sizeof buf, "extended cost J_e %.10g  (%s)\n", r.extended_cost,
                r.extended_feasible ? "feasible" : "infeasible");
  os << buf;
  os << "strict eps-restricted costs\n";
  for (const auto& e : r.strict) {
    std::snprintf(buf, sizeof buf, "  eps %-8g J_eps %.10g  %s\n", e.eps, e.cost, e.feasible ? "feasible" : "infeasible");
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "gap estimate %.6g  threshold %.6g  flat %s\n", r.estimate, r.threshold,
                r.flat ? "yes" : "no");
  os << buf;
  os << "empirical " << to_string(r.empirical) << "\n";
  auto ctl = [&](const char* name, const std::optional<ControllabilityResult>& c) {
    os << name << " ";
    if (!c) {
      os << "not evaluated\n";
      return;
    }
    if (c->holds) {
      os << "Holds" << (c->vacuous ? " (vacuously)" : "");
    } else {
      os << "Fails  witness";
      for (Eigen::Index i = 0; i < c->witness.size(); ++i) os << " " << c->witness(i);
      os << "  value " << c->value;
    }
    os << "  (" << c->covectors_tested << " sampled normal covectors)\n";
  };
  os << "certification on " << r.certified_on << "\n";
  ctl("  quick 1-controllability", r.certification.qc);
  ctl("  drift controllability", r.certification.dc);
  os << "  no drift " << (r.certification.reason == "no-drift" ? "yes" : "no") << "\n";
  os << "  normality " << to_string(r.certification.normality) << "\n";
  os << "verdict " << to_string(r.verdict);
  if (r.verdict == GapVerdict::kNoGapCertified) os << "(" << r.certification.reason << ")";
  os << "\n";
  for (const auto& d : r.diagnostics) os << "note: " << d << "\n";
  return os.str();
}

std::string gap_report_csv(const GapReport& r) {
  std::ostringstream os;
  char buf[128];
  os << "eps,cost,feasible\n";
  std::snprintf(buf, sizeof buf, "0,%.17g,%d\n", r.extended_cost, r.extended_feasible ? 1 : 0);
  os << buf;
  for (const auto& e : r.strict) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", e.eps, e.cost, e.feasible ? 1 : 0);
    os << buf;
  }
  return os.str();
}

IsolationResult isolation_probe(const ProblemSpec& p, const ExtendedProcess& ep, double delta, const SolveConfig& cfg,
                                const IsolationOptions& opt) {
  if (!(delta > 0.0)) throw std::invalid_argument("isolation_probe: delta must be positive");
  TranscriptionOptions to;
  to.w0_min = opt.eps;
  to.objective = Objective::kViolation;
  to.reference = &ep;
  to.delta = delta;
  to.seeds.push_back(ep);
  if (opt.tilt > 0.0) {
    // On pure-drift intervals the direction of w has no gradient; start from
    // copies of ep that already move slightly along each direction of C.
    for (const auto& d : p.cone.spanning_directions()) {
      ControlSequence c = ep.controls();
      bool changed = false;
      for (int k = 0; k < c.size(); ++k) {
        if (c.w.row(k).norm() > 0.0) continue;
        c.w0(k) = 1.0 - opt.tilt;
        c.w.row(k) = opt.tilt * d.transpose();
        changed = true;
      }
      if (!changed) break;
      try {
        to.seeds.push_back(integrate_extended(p, c, ep.y0(0), ep.y.row(0).transpose()));
      } catch (const IntegrationError&) {
      }
    }
  }
  if (p.fields.drift_free()) {
    for (double b : opt.blends) {
      try {
        to.seeds.push_back(embed(no_drift_strictify(p, ep, b)));
      } catch (const std::exception&) {
      }
    }
  }
  IsolationResult r;
  r.delta = delta;
  r.eps = opt.eps;
  r.candidate = solve_transcribed(p, cfg, to);
  r.value = r.candidate.feasible ? r.candidate.cost : kInf;
  r.process = r.candidate.process;
  r.isolated = r.value > opt.isolation_tol;
  return r;
}

}  // namespace impgap
