#include "impgap/pmp.hpp"

#include "csv_util.hpp"
#include "impgap/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace impgap {

// ---------------------------------------------------------------- CSV

void write_multipliers_csv(std::ostream& out, const MultiplierSet& ms) {
  const auto d = ms.path.P.cols();
  out << "s,p0";
  for (Eigen::Index i = 1; i < d; ++i) out << ",p_" << i;
  out << ",pi,lambda\n";
  for (Eigen::Index k = 0; k < ms.path.P.rows(); ++k) {
    out << csv::fmt(ms.path.s(k));
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << csv::fmt(ms.path.P(k, i));
    out << ',' << csv::fmt(ms.pi) << ',' << csv::fmt(ms.lambda) << "\n";
  }
}

MultiplierSet read_multipliers_csv(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.size() < 2) throw CsvError("multipliers CSV needs a header and at least one row");
  const auto& h = rows[0];
  if (h.size() < 4 || h[0] != "s" || h[1] != "p0" || h[h.size() - 2] != "pi" || h.back() != "lambda") {
    throw CsvError("multipliers CSV header must be s,p0,p_1..p_n,pi,lambda");
  }
  const auto n = static_cast<Eigen::Index>(h.size()) - 4;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (h[static_cast<std::size_t>(2 + i)] != "p_" + std::to_string(i + 1)) throw CsvError("bad multipliers header");
  }
  MultiplierSet ms;
  const auto rowsn = static_cast<Eigen::Index>(rows.size()) - 1;
  ms.path.s.resize(rowsn);
  ms.path.P.resize(rowsn, 1 + n);
  try {
    for (Eigen::Index k = 0; k < rowsn; ++k) {
      const auto& r = rows[static_cast<std::size_t>(k + 1)];
      const auto row = static_cast<std::size_t>(k + 2);
      if (r.size() != h.size()) throw CsvError("row " + std::to_string(row) + " has wrong column count");
      ms.path.s(k) = csv::number(r[0], row, 0);
      for (Eigen::Index i = 0; i <= n; ++i) {
        ms.path.P(k, i) = csv::number(r[static_cast<std::size_t>(1 + i)], row, static_cast<std::size_t>(1 + i));
      }
      double pi = csv::number(r[r.size() - 2], row, r.size() - 2);
      double lambda = csv::number(r.back(), row, r.size() - 1);
      if (k == 0) {
        ms.pi = pi;
        ms.lambda = lambda;
      } else if (pi != ms.pi || lambda != ms.lambda) {
        throw CsvError("pi and lambda must be constant across rows");
      }
    }
  } catch (const CsvError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw CsvError(e.what());
  }
  return ms;
}

// ---------------------------------------------------------------- Hamiltonian

HamiltonianMax hamiltonian_max(const ControlCone& cone, double q0, const Eigen::VectorXd& q, double pi) {
  HamiltonianMax r;
  Eigen::VectorXd pq = cone.project(q);
  const double a = pq.norm();
  r.drift_value = q0;
  r.impulse_value = a + pi;
  r.value = std::max(r.drift_value, r.impulse_value);
  r.w = Eigen::VectorXd::Zero(q.size());
  const double scale = 1.0 + std::abs(q0) + std::abs(r.impulse_value);
  r.tie = std::abs(r.drift_value - r.impulse_value) <= 1e-14 * scale;
  if (a == 0.0) {
    // q lies in the polar cone: the best unit direction is a spanning direction of C.
    double best = -kInf;
    Eigen::VectorXd arg;
    for (const auto& d : cone.spanning_directions()) {
      const double v = q.dot(d);
      if (v > best) {
        best = v;
        arg = d;
      }
    }
    r.impulse_value = best + pi;
    r.value = std::max(r.drift_value, r.impulse_value);
    r.tie = std::isfinite(best) &&
            std::abs(r.drift_value - r.impulse_value) <= 1e-14 * (1.0 + std::abs(q0) + std::abs(r.impulse_value));
    if (q0 >= r.impulse_value) {
      r.w0 = 1.0;
    } else {
      r.w0 = 0.0;
      if (best == 0.0) {
        r.impulse_direction_undefined = true;
      } else {
        r.w = arg;
      }
    }
    return r;
  }
  if (r.drift_value >= r.impulse_value) {
    r.w0 = 1.0;
  } else {
    r.w0 = 0.0;
    r.w = pq / a;
  }
  return r;
}

namespace {

struct PointData {
  Eigen::VectorXd f;
  Eigen::MatrixXd G;
};

PointData field_values(const FieldEvaluator& fe, const Eigen::VectorXd& z) {
  PointData d{Eigen::VectorXd(fe.n()), Eigen::MatrixXd(fe.n(), fe.m())};
  fe.fields(z.data(), d.f.data(), d.G.data());
  return d;
}

}  // namespace

HamiltonianMax hamiltonian_max(const FieldEvaluator& fe, const ControlCone& cone, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& P, double pi) {
  PointData d = field_values(fe, z);
  const int n = fe.n();
  Eigen::VectorXd p = P.tail(n);
  return hamiltonian_max(cone, P(0) + p.dot(d.f), d.G.transpose() * p, pi);
}

HamiltonianMax hamiltonian_max(const ProblemSpec& p, const Eigen::VectorXd& z, const Eigen::VectorXd& P, double pi) {
  return hamiltonian_max(FieldEvaluator(p.fields), p.cone, z, P, pi);
}

double hamiltonian(const FieldEvaluator& fe, const Eigen::VectorXd& z, const Eigen::VectorXd& P, double pi, double w0,
                   const Eigen::VectorXd& w) {
  return P.dot(fe.rhs(z, w0, w)) + pi * w.norm();
}

// ---------------------------------------------------------------- helpers

namespace {

// Costate (or a block of costate columns) on interval k at fraction theta:
// cubic Hermite with slopes -A' P at the nodes.
Eigen::MatrixXd costate_at(const FieldEvaluator& fe, const ExtendedProcess& ep, int k, double theta,
                           const Eigen::MatrixXd& Pa, const Eigen::MatrixXd& Pb) {
  if (theta == 0.0) return Pa;
  if (theta == 1.0) return Pb;
  const int n = ep.n();
  Eigen::VectorXd za(1 + n), zb(1 + n);
  za(0) = ep.y0(k);
  za.tail(n) = ep.y.row(k).transpose();
  zb(0) = ep.y0(k + 1);
  zb.tail(n) = ep.y.row(k + 1).transpose();
  Eigen::VectorXd w = ep.w.row(k).transpose();
  Eigen::MatrixXd Aa = fe.jacobian(za, ep.w0(k), w);
  Eigen::MatrixXd Ab = fe.jacobian(zb, ep.w0(k), w);
  const double h = ep.ds(k);
  const double t = theta;
  const double h00 = 2 * t * t * t - 3 * t * t + 1;
  const double h10 = t * t * t - 2 * t * t + t;
  const double h01 = -2 * t * t * t + 3 * t * t;
  const double h11 = t * t * t - t * t;
  return h00 * Pa - h10 * h * (Aa.transpose() * Pa) + h01 * Pb - h11 * h * (Ab.transpose() * Pb);
}

constexpr double kThetas[3] = {0.0, 0.5, 1.0};

struct CheckPoint {
  int k;
  double theta;
  Eigen::VectorXd z;
};

std::vector<CheckPoint> check_points(const FieldEvaluator& fe, const ExtendedProcess& ep) {
  std::vector<CheckPoint> pts;
  for (int k = 0; k < ep.intervals(); ++k) {
    for (double th : kThetas) pts.push_back({k, th, interpolate_state(fe, ep, k, th)});
  }
  return pts;
}

Eigen::VectorXd cost_args(const ExtendedProcess& ep) {
  Eigen::VectorXd z = ep.endpoint();
  Eigen::VectorXd a(z.size() + 1);
  a << z, ep.nu_final();
  return a;
}

Eigen::VectorXd grad_h(const ProblemSpec& p, const ExtendedProcess& ep) {
  const auto vars = CostSpec::variable_names(p.n());
  Eigen::VectorXd args = cost_args(ep);
  Eigen::VectorXd g(static_cast<Eigen::Index>(vars.size()));
  for (std::size_t i = 0; i < vars.size(); ++i) {
    CompiledExpr c(differentiate(p.cost.h, vars[i]), vars);
    g(static_cast<Eigen::Index>(i)) = c(std::span<const double>(args.data(), static_cast<std::size_t>(args.size())));
  }
  return g;
}

// Generators of N_{T x [0,K]} at the process endpoint, in (t1, x1, t2, x2, v).
struct EndpointCone {
  Eigen::MatrixXd rays;       // columns
  Eigen::MatrixXd lineality;  // columns
};

EndpointCone endpoint_cone(const ProblemSpec& p, const ExtendedProcess& ep, double tol) {
  Eigen::VectorXd z = ep.endpoint();
  NormalConeGenerators g = normal_cone_generators(p.target, z, std::max(tol, 1e-12));
  const auto dim = z.size() + 1;
  std::vector<Eigen::VectorXd> rays, lins;
  for (const auto& r : g.rays) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v.head(z.size()) = r.z;
    rays.push_back(v);
  }
  for (const auto& l : g.lineality) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v.head(z.size()) = l.z;
    lins.push_back(v);
  }
  const double nu = ep.nu_final();
  if (std::isfinite(p.K) && nu >= p.K - tol) rays.push_back(Eigen::VectorXd::Unit(dim, dim - 1));
  if (nu <= tol) rays.push_back(-Eigen::VectorXd::Unit(dim, dim - 1));
  EndpointCone c{Eigen::MatrixXd(dim, static_cast<Eigen::Index>(rays.size())),
                 Eigen::MatrixXd(dim, static_cast<Eigen::Index>(lins.size()))};
  for (std::size_t i = 0; i < rays.size(); ++i) c.rays.col(static_cast<Eigen::Index>(i)) = rays[i];
  for (std::size_t i = 0; i < lins.size(); ++i) c.lineality.col(static_cast<Eigen::Index>(i)) = lins[i];
  return c;
}

}  // namespace

// ---------------------------------------------------------------- residuals

double ResidualReport::max_residual() const {
  return std::max({adjoint, hamiltonian_max, hamiltonian_zero, node_h_abs, transversality, sign, case_i});
}

bool ResidualReport::passes(double tol) const { return max_residual() <= tol && nontriviality > tol; }

ResidualReport extremal_residuals(const ProblemSpec& p, const ExtendedProcess& ep, const MultiplierSet& ms,
                                  const ResidualOptions& opt) {
  const int N = ep.intervals();
  const int n = ep.n();
  const int d = 1 + n;
  if (ms.path.P.rows() != N + 1 || ms.path.P.cols() != d || ms.path.s.size() != N + 1) {
    throw GridMismatchError("multiplier path does not match the process grid");
  }
  for (int k = 0; k <= N; ++k) {
    if (std::abs(ms.path.s(k) - ep.s(k)) > 1e-9 * (1.0 + std::abs(ep.s(k)))) {
      throw GridMismatchError("multiplier grid differs from the process grid at node " + std::to_string(k));
    }
  }
  FieldEvaluator fe(p.fields);
  ResidualReport r;

  AdjointPath re = integrate_adjoint(fe, ep, ms.path.P.row(N).transpose(), opt.substeps);
  r.adjoint = (re.P - ms.path.P).cwiseAbs().maxCoeff();

  for (const auto& cp : check_points(fe, ep)) {
    Eigen::VectorXd P = costate_at(fe, ep, cp.k, cp.theta, ms.path.P.row(cp.k).transpose(),
                                   ms.path.P.row(cp.k + 1).transpose());
    Eigen::VectorXd w = ep.w.row(cp.k).transpose();
    double H = hamiltonian(fe, cp.z, P, ms.pi, ep.w0(cp.k), w);
    HamiltonianMax hm = hamiltonian_max(fe, p.cone, cp.z, P, ms.pi);
    r.hamiltonian_max = std::max(r.hamiltonian_max, hm.value - H);
    r.hamiltonian_zero = std::max(r.hamiltonian_zero, std::abs(H));
    if (cp.theta != 0.5) r.node_h_abs = std::max(r.node_h_abs, std::abs(H));
  }

  r.grad_h = grad_h(p, ep);
  Eigen::VectorXd e(2 * d + 1);
  e.head(d) = ms.path.P.row(0).transpose();
  e.segment(d, d) = -ms.path.P.row(N).transpose();
  e(2 * d) = -ms.pi;
  e -= ms.lambda * r.grad_h;
  r.endpoint_covector = e;
  EndpointCone cone = endpoint_cone(p, ep, opt.active_tol);
  const auto nr = cone.rays.cols();
  const auto nl = cone.lineality.cols();
  Eigen::MatrixXd A(e.size(), nr + 2 * nl);
  A << cone.rays, cone.lineality, -cone.lineality;
  Eigen::VectorXd c = nnls(A, e);
  r.transversality = A.cols() ? (A * c - e).norm() : e.norm();

  r.sign = std::max(ms.pi, 0.0) + std::max(-ms.lambda, 0.0);

  const Eigen::Index vidx = static_cast<Eigen::Index>(r.grad_h.size()) - 1;
  const bool nu_slack = !std::isfinite(p.K) || ep.nu_final() < p.K - opt.active_tol;
  r.case_i_applies = std::abs(ms.lambda * r.grad_h(vidx)) <= 1e-12 && nu_slack;
  if (r.case_i_applies) r.case_i = std::abs(ms.pi);

  r.case_ii_applies = ep.y0(0) < ep.y0(N) - opt.active_tol;
  double sup_p = ms.path.P.rightCols(n).cwiseAbs().maxCoeff();
  double sup_p0 = ms.path.P.col(0).cwiseAbs().maxCoeff();
  r.nontriviality = std::max(sup_p, std::abs(ms.lambda));
  if (!r.case_ii_applies) r.nontriviality = std::max(r.nontriviality, sup_p0);
  return r;
}

// ---------------------------------------------------------------- classification

namespace {

struct LpPoint {
  Eigen::RowVectorXd h;  // H row over P_S
  double wnorm;          // coefficient of pi in H
  Eigen::RowVectorXd q0;
  Eigen::MatrixXd q;     // m x d
};

}  // namespace

NormalityResult classify_normality(const ProblemSpec& p, const ExtendedProcess& ep, const NormalityOptions& opt) {
  if (p.cone.kind() == ControlCone::Kind::kGenerated && p.m() > 6) {
    throw std::invalid_argument("classify_normality: generated cone with m > 6");
  }
  const int N = ep.intervals();
  const int n = ep.n();
  const int d = 1 + n;
  FieldEvaluator fe(p.fields);
  TransitionMap tm = transition_map(fe, ep, opt.substeps);

  std::vector<LpPoint> pts;
  std::vector<CheckPoint> cps = check_points(fe, ep);
  for (const auto& cp : cps) {
    Eigen::MatrixXd M = costate_at(fe, ep, cp.k, cp.theta, tm.L[static_cast<std::size_t>(cp.k)],
                                   tm.L[static_cast<std::size_t>(cp.k + 1)]);
    Eigen::VectorXd w = ep.w.row(cp.k).transpose();
    Eigen::VectorXd F = fe.rhs(cp.z, ep.w0(cp.k), w);
    PointData fd = field_values(fe, cp.z);
    LpPoint lp;
    lp.h = F.transpose() * M;
    lp.wnorm = w.norm();
    Eigen::VectorXd e0(d);
    e0(0) = 1.0;
    e0.tail(n) = fd.f;
    lp.q0 = e0.transpose() * M;
    lp.q = fd.G.transpose() * M.bottomRows(n);
    pts.push_back(std::move(lp));
  }

  EndpointCone cone = endpoint_cone(p, ep, opt.active_tol);
  const int nr = static_cast<int>(cone.rays.cols());
  const int nl = static_cast<int>(cone.lineality.cols());
  const bool nu_slack = !std::isfinite(p.K) || ep.nu_final() < p.K - opt.active_tol;
  const bool case_i = nu_slack;  // lambda = 0
  const bool case_ii = ep.y0(0) < ep.y0(N) - opt.active_tol;

  std::vector<Eigen::VectorXd> probes = p.cone.spanning_directions();

  // Variable layout: P_S (d) | pi | mu (nr) | eta (nl) | t.
  const int ipi = d;
  const int imu = d + 1;
  const int ieta = imu + nr;
  const int it = ieta + nl;
  const int nv = it + 1;

  NormalityResult res;
  for (int round = 1; round <= opt.max_rounds; ++round) {
    res.rounds = round;
    res.probes = static_cast<int>(probes.size());
    LinearProgram base(nv);
    base.c(it) = 1.0;
    for (int i = 0; i < d; ++i) {
      base.lower(i) = -1.0;
      base.upper(i) = 1.0;
    }
    base.lower(ipi) = case_i ? 0.0 : -kInf;
    base.upper(ipi) = 0.0;
    for (int j = 0; j < nl; ++j) {
      base.lower(ieta + j) = -kInf;
      base.upper(ieta + j) = kInf;
    }
    auto abs_le_t = [&](Eigen::RowVectorXd row, double rhs) {
      row(it) = -1.0;
      base.add_ub(row, rhs);
      Eigen::RowVectorXd neg = -row;
      neg(it) = -1.0;
      base.add_ub(neg, -rhs);
    };
    // Transversality: e(P_S, pi) - rays mu - lineality eta = 0, componentwise within t.
    const Eigen::MatrixXd& L0 = tm.L[0];
    for (int r = 0; r < 2 * d + 1; ++r) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
      if (r < d) {
        row.head(d) = L0.row(r);
      } else if (r < 2 * d) {
        row(r - d) = -1.0;
      } else {
        row(ipi) = -1.0;
      }
      for (int j = 0; j < nr; ++j) row(imu + j) = -cone.rays(r, j);
      for (int j = 0; j < nl; ++j) row(ieta + j) = -cone.lineality(r, j);
      abs_le_t(row, 0.0);
    }
    for (const auto& pt : pts) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
      row.head(d) = pt.h;
      row(ipi) = pt.wnorm;
      abs_le_t(row, 0.0);
      Eigen::RowVectorXd r0 = Eigen::RowVectorXd::Zero(nv);
      r0.head(d) = pt.q0;
      r0(it) = -1.0;
      base.add_ub(r0, 0.0);
      for (const auto& dir : probes) {
        Eigen::RowVectorXd rq = Eigen::RowVectorXd::Zero(nv);
        rq.head(d) = dir.transpose() * pt.q;
        rq(ipi) = 1.0;
        rq(it) = -1.0;
        base.add_ub(rq, 0.0);
      }
    }

    double best_t = kInf;
    Eigen::VectorXd best_x;
    const int first = case_ii ? 1 : 0;
    for (int i = first; i < d && best_t > opt.tol; ++i) {
      for (double sgn : {1.0, -1.0}) {
        LinearProgram lp = base;
        lp.lower(i) = sgn;
        lp.upper(i) = sgn;
        if (case_ii) {
          // The sup-norm normalization applies to p(S) only.
          lp.lower(0) = -kInf;
          lp.upper(0) = kInf;
        }
        LpResult sol = solve_lp(lp);
        if (sol.status != LpStatus::kOptimal) continue;
        if (sol.x(it) < best_t) {
          best_t = sol.x(it);
          best_x = sol.x;
        }
        if (best_t <= opt.tol) break;
      }
    }
    res.margin = best_t;
    if (!std::isfinite(best_t)) {
      res.verdict = Normality::kUndetermined;
      res.diagnostic = "linear program failed for every normalization";
      return res;
    }
    if (best_t > 10.0 * opt.tol) {
      res.verdict = Normality::kNormal;
      std::ostringstream os;
      os << "no lambda = 0 multiplier: best max-violation " << best_t << " > 10 tol";
      res.diagnostic = os.str();
      return res;
    }
    if (best_t > opt.tol) {
      res.verdict = Normality::kUndetermined;
      std::ostringstream os;
      os << "marginal max-violation " << best_t << " within 10 tol";
      res.diagnostic = os.str();
      return res;
    }

    MultiplierSet w;
    w.path = tm.apply(best_x.head(d));
    w.pi = best_x(ipi);
    w.lambda = 0.0;
    // Exact maximization along the witness; collect violated directions.
    int added = 0;
    double worst = 0.0;
    for (const auto& cp : cps) {
      Eigen::VectorXd P = costate_at(fe, ep, cp.k, cp.theta, w.path.P.row(cp.k).transpose(),
                                     w.path.P.row(cp.k + 1).transpose());
      Eigen::VectorXd wk = ep.w.row(cp.k).transpose();
      double H = hamiltonian(fe, cp.z, P, w.pi, ep.w0(cp.k), wk);
      HamiltonianMax hm = hamiltonian_max(fe, p.cone, cp.z, P, w.pi);
      double viol = hm.value - H;
      worst = std::max(worst, viol);
      if (viol > opt.tol && hm.w0 == 0.0 && hm.w.norm() > 0.0) {
        Eigen::VectorXd dir = hm.w / hm.w.norm();
        bool dup = std::any_of(probes.begin(), probes.end(), [&](const Eigen::VectorXd& q) { return q.dot(dir) > 1.0 - 1e-9; });
        if (!dup) {
          probes.push_back(dir);
          ++added;
        }
      }
    }
    if (worst <= opt.tol) {
      ResidualReport rr = extremal_residuals(p, ep, w, {opt.substeps, opt.active_tol});
      if (rr.passes(10.0 * opt.tol)) {
        res.verdict = Normality::kAbnormal;
        res.witness = w;
        std::ostringstream os;
        os << "lambda = 0 multiplier found (max residual " << rr.max_residual() << ")";
        res.diagnostic = os.str();
      } else {
        res.verdict = Normality::kUndetermined;
        std::ostringstream os;
        os << "LP witness failed re-verification (max residual " << rr.max_residual() << ")";
        res.diagnostic = os.str();
      }
      return res;
    }
    if (added == 0) {
      res.verdict = Normality::kUndetermined;
      std::ostringstream os;
      os << "Hamiltonian violation " << worst << " without a new probe direction";
      res.diagnostic = os.str();
      return res;
    }
  }
  res.verdict = Normality::kUndetermined;
  res.diagnostic = "probe refinement did not close within the round limit";
  return res;
}

const char* to_string(Normality n) {
  switch (n) {
    case Normality::kNormal: return "Normal";
    case Normality::kAbnormal: return "Abnormal";
    case Normality::kUndetermined: return "Undetermined";
  }
  return "?";
}

std::string format_residual_report(const ResidualReport& r, const MultiplierSet& ms, double tol) {
  std::ostringstream os;
  os << std::setprecision(6);
  auto mark = [&](double v) { return v <= tol ? "ok" : "FAIL"; };
  os << "[adjoint]\n  residual " << r.adjoint << "  " << mark(r.adjoint) << "\n";
  os << "[hamiltonian]\n  max(H* - H) " << r.hamiltonian_max << "  " << mark(r.hamiltonian_max) << "\n";
  os << "  max |H| " << r.hamiltonian_zero << "  " << mark(r.hamiltonian_zero) << "\n";
  os << "  max |H| at nodes " << r.node_h_abs << "\n";
  os << "[transversality]\n  residual " << r.transversality << "  " << mark(r.transversality) << "\n";
  os << "  endpoint covector " << r.endpoint_covector.transpose() << "\n";
  os << "[signs]\n  pi " << ms.pi << "  lambda " << ms.lambda << "  violation " << r.sign << "  " << mark(r.sign) << "\n";
  os << "  case (i) " << (r.case_i_applies ? "applies" : "n/a") << "  |pi| " << r.case_i << "\n";
  os << "  case (ii) " << (r.case_ii_applies ? "applies" : "n/a") << "  nontriviality " << r.nontriviality << "  "
     << (r.nontriviality > tol ? "ok" : "FAIL") << "\n";
  os << "[verdict]\n  " << (r.passes(tol) ? "PASS" : "FAIL") << " at tol " << tol << "\n";
  return os.str();
}

std::string format_normality(const NormalityResult& r) {
  std::ostringstream os;
  os << "normality: " << to_string(r.verdict) << "\n";
  os << "  margin " << r.margin << "  rounds " << r.rounds << "  probes " << r.probes << "\n";
  os << "  " << r.diagnostic << "\n";
  if (r.witness) {
    const auto& P = r.witness->path.P;
    os << "  witness P(0) " << P.row(0) << "\n";
    os << "  witness P(S) " << P.row(P.rows() - 1) << "  pi " << r.witness->pi << "\n";
  }
  return os.str();
}

}  // namespace impgap
