#include "impgap/solver.hpp"

#include "impgap/dynamics.hpp"
#include "impgap/lp.hpp"
#include "impgap/reparam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>
#include <sstream>

namespace impgap {

namespace {

Eigen::VectorXd endpoint_with_nu(const ExtendedProcess& ep) {
  Eigen::VectorXd z = ep.endpoint();
  Eigen::VectorXd out(z.size() + 1);
  out << z, ep.nu_final();
  return out;
}

struct CostFunction {
  CompiledExpr h;
  std::vector<CompiledExpr> dh;

  explicit CostFunction(const ProblemSpec& p) {
    const auto vars = CostSpec::variable_names(p.n());
    h = CompiledExpr(p.cost.h, vars);
    for (const auto& v : vars) dh.emplace_back(differentiate(p.cost.h, v), vars);
  }
  double value(const Eigen::VectorXd& zv) const { return h(std::span<const double>(zv.data(), zv.size())); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& zv) const {
    Eigen::VectorXd g(zv.size());
    std::span<const double> vals(zv.data(), zv.size());
    for (std::size_t i = 0; i < dh.size(); ++i) g(static_cast<Eigen::Index>(i)) = dh[i](vals);
    return g;
  }
};

double smooth_abs(double x) {
  constexpr double eta = 1e-9;
  return std::sqrt(x * x + eta * eta) - eta;
}

double smooth_abs_d(double x) {
  constexpr double eta = 1e-9;
  return x / std::sqrt(x * x + eta * eta);
}

// Piecewise-linear reference (y, nu) in s with constant extension.
struct Reference {
  const ExtendedProcess* ep = nullptr;

  void at(double s, Eigen::VectorXd& val, Eigen::VectorXd& slope) const {
    const int N = ep->intervals();
    const int n = ep->n();
    val.resize(n + 1);
    slope = Eigen::VectorXd::Zero(n + 1);
    if (s <= ep->s(0)) {
      val << ep->y.row(0).transpose(), ep->nu(0);
      return;
    }
    if (s >= ep->S()) {
      val << ep->y.row(N).transpose(), ep->nu(N);
      return;
    }
    const auto* b = ep->s.data();
    int k = static_cast<int>(std::upper_bound(b, b + N + 1, s) - b) - 1;
    k = std::clamp(k, 0, N - 1);
    const double len = ep->s(k + 1) - ep->s(k);
    Eigen::VectorXd a(n + 1), c(n + 1);
    a << ep->y.row(k).transpose(), ep->nu(k);
    c << ep->y.row(k + 1).transpose(), ep->nu(k + 1);
    if (len <= 0.0) {
      val = c;
      return;
    }
    const double th = (s - ep->s(k)) / len;
    val = (1.0 - th) * a + th * c;
    slope = (c - a) / len;
  }
};

enum class ConstraintKind { kEq, kIneq };

struct Constraint {
  explicit Constraint(ConstraintKind k) : kind(k) {}
  ConstraintKind kind;
  double value = 0.0;
  Eigen::VectorXd gz;  // endpoint partials (2 + 2n), may be empty
  double gnu = 0.0;    // d/d nu(S)
  std::vector<std::pair<int, double>> nodes;  // ball constraints: (node, weight)
  Eigen::VectorXd gnode;
  double gnuk = 0.0;
  double gS = 0.0;
};

struct Evaluation {
  double phi = kInf;
  double objective = kInf;
  Eigen::VectorXd grad;
  std::vector<Constraint> cons;
  // Retained for a later reverse sweep.
  ControlSequence controls;
  ExtendedTape tape;
  Eigen::MatrixXd dirs;
  std::vector<Eigen::MatrixXd> jacs;
  Eigen::VectorXd psn;
  Eigen::VectorXd nu;
  Eigen::VectorXd gz;
  double gnu = 0.0;
  std::vector<double> weight;
};

class Transcription {
 public:
  Transcription(const ProblemSpec& p, const SolveConfig& cfg, const TranscriptionOptions& opt)
      : p_(p), cfg_(cfg), opt_(opt), fe_(p.fields), cost_(p), n_(p.n()), m_(p.m()), N_(cfg.N) {
    const auto& cone = p.cone;
    switch (cone.kind()) {
      case ControlCone::Kind::kFull:
        mr_ = m_;
        break;
      case ControlCone::Kind::kOrthant:
        mr_ = m_;
        for (auto t : cone.tags()) {
          if (t != SignTag::kZero) trivial_cone_ = false;
        }
        break;
      case ControlCone::Kind::kGenerated:
        mr_ = static_cast<int>(cone.generators().size());
        break;
    }
    if (cone.kind() != ControlCone::Kind::kOrthant) trivial_cone_ = false;
    auto dirs = cone.spanning_directions();
    fallback_ = dirs.empty() ? Eigen::VectorXd::Zero(m_) : dirs.front();
    ref_.ep = opt.reference;
    const auto& b = p.target.bounds;
    fixed_T_ = b[0].is_fixed() && b[static_cast<std::size_t>(p.target.t2_index())].is_fixed();
    if (fixed_T_) T_ = b[static_cast<std::size_t>(p.target.t2_index())].lo - b[0].lo;
  }

  int size() const { return 1 + N_ + N_ * mr_ + 1 + n_; }
  int ith(int k) const { return 1 + k; }
  int ir(int k) const { return 1 + N_ + k * mr_; }
  int iinit() const { return 1 + N_ + N_ * mr_; }
  bool fixed_T() const { return fixed_T_; }
  double T() const { return T_; }
  int mr() const { return mr_; }
  int N() const { return N_; }

  void project(Eigen::VectorXd& x) const {
    x(0) = std::clamp(x(0), 1e-3, cfg_.s_max);
    const double lo = trivial_cone_ ? 1.0 : std::clamp(opt_.w0_min, 0.0, 1.0);
    for (int k = 0; k < N_; ++k) x(ith(k)) = std::clamp(x(ith(k)), lo, 1.0);
    for (int i = ir(0); i < iinit(); ++i) x(i) = std::clamp(x(i), -1e3, 1e3);
    for (int i = 0; i <= n_; ++i) {
      const Bound& bd = p_.target.bounds[static_cast<std::size_t>(i)];
      x(iinit() + i) = std::clamp(x(iinit() + i), bd.lo, bd.hi);
    }
  }

  // psi(r) and its Jacobian d psi / d r (m x mr).
  void psi(const Eigen::Ref<const Eigen::VectorXd>& r, Eigen::VectorXd& out, Eigen::MatrixXd& jac) const {
    out = Eigen::VectorXd::Zero(m_);
    jac = Eigen::MatrixXd::Zero(m_, mr_);
    const auto& cone = p_.cone;
    switch (cone.kind()) {
      case ControlCone::Kind::kFull:
        out = r;
        jac.setIdentity();
        break;
      case ControlCone::Kind::kOrthant:
        for (int i = 0; i < m_; ++i) {
          switch (cone.tags()[static_cast<std::size_t>(i)]) {
            case SignTag::kFree:
              out(i) = r(i);
              jac(i, i) = 1.0;
              break;
            case SignTag::kNonneg:
              out(i) = r(i) * r(i);
              jac(i, i) = 2.0 * r(i);
              break;
            case SignTag::kNonpos:
              out(i) = -r(i) * r(i);
              jac(i, i) = -2.0 * r(i);
              break;
            case SignTag::kZero:
              break;
          }
        }
        break;
      case ControlCone::Kind::kGenerated:
        for (int i = 0; i < mr_; ++i) {
          const auto& g = cone.generators()[static_cast<std::size_t>(i)];
          out += r(i) * r(i) * g;
          jac.col(i) = 2.0 * r(i) * g;
        }
        break;
    }
  }

  // Parameters reproducing a unit direction d in C.
  Eigen::VectorXd invert_direction(const Eigen::VectorXd& d) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(mr_);
    const auto& cone = p_.cone;
    switch (cone.kind()) {
      case ControlCone::Kind::kFull:
        r = d;
        break;
      case ControlCone::Kind::kOrthant:
        for (int i = 0; i < m_; ++i) {
          switch (cone.tags()[static_cast<std::size_t>(i)]) {
            case SignTag::kFree:
              r(i) = d(i);
              break;
            case SignTag::kNonneg:
            case SignTag::kNonpos:
              r(i) = std::sqrt(std::abs(d(i)));
              break;
            case SignTag::kZero:
              break;
          }
        }
        break;
      case ControlCone::Kind::kGenerated: {
        Eigen::MatrixXd G(m_, mr_);
        for (int i = 0; i < mr_; ++i) G.col(i) = cone.generators()[static_cast<std::size_t>(i)];
        Eigen::VectorXd c = nnls(G, d);
        r = c.cwiseMax(0.0).cwiseSqrt();
        break;
      }
    }
    return r;
  }

  ControlSequence controls(const Eigen::VectorXd& x, Eigen::MatrixXd* dirs = nullptr,
                           std::vector<Eigen::MatrixXd>* jacs = nullptr, Eigen::VectorXd* psinorm = nullptr) const {
    ControlSequence c;
    c.ds = Eigen::VectorXd::Constant(N_, x(0) / N_);
    c.w0.resize(N_);
    c.w.resize(N_, m_);
    if (dirs) dirs->resize(N_, m_);
    if (jacs) jacs->resize(static_cast<std::size_t>(N_));
    if (psinorm) psinorm->resize(N_);
    Eigen::VectorXd ps;
    Eigen::MatrixXd jac;
    for (int k = 0; k < N_; ++k) {
      const double th = x(ith(k));
      psi(x.segment(ir(k), mr_), ps, jac);
      const double nrm = ps.norm();
      Eigen::VectorXd d = nrm > 1e-12 ? Eigen::VectorXd(ps / nrm) : fallback_;
      c.w0(k) = th;
      c.w.row(k) = ((1.0 - th) * d).transpose();
      if (dirs) dirs->row(k) = d.transpose();
      if (jacs) (*jacs)[static_cast<std::size_t>(k)] = jac;
      if (psinorm) (*psinorm)(k) = nrm;
    }
    return c;
  }

  Eigen::VectorXd z_init(const Eigen::VectorXd& x) const { return x.segment(iinit(), 1 + n_); }

  // Constraints and primary objective; gradients if `grad` is set.
  Evaluation evaluate(const Eigen::VectorXd& x, const std::vector<double>& lambda, double rho, bool grad) const {
    Evaluation ev;
    ev.controls = controls(x, &ev.dirs, &ev.jacs, &ev.psn);
    IntegrationOptions io;
    io.substeps = cfg_.substeps;
    ev.tape = record_extended(fe_, ev.controls, z_init(x), io);
    if (!ev.tape.finite) return ev;
    const double S = x(0);
    ev.nu.resize(N_ + 1);
    ev.nu(0) = 0.0;
    for (int k = 0; k < N_; ++k) ev.nu(k + 1) = ev.nu(k) + (S / N_) * (1.0 - ev.controls.w0(k));
    const int dz = 2 + 2 * n_;
    Eigen::VectorXd z(dz);
    z << ev.tape.nodes.row(0).transpose(), ev.tape.nodes.row(N_).transpose();
    const double nuS = ev.nu(N_);

    if (opt_.objective == Objective::kCost) {
      Eigen::VectorXd zv(dz + 1);
      zv << z, nuS;
      ev.objective = cost_.value(zv);
      Eigen::VectorXd g = cost_.gradient(zv);
      ev.gz = g.head(dz);
      ev.gnu = g(dz);
    } else {
      Eigen::VectorXd r = z - p_.target.project(z);
      const double ex = std::isfinite(p_.K) ? std::max(0.0, nuS - p_.K) : 0.0;
      ev.objective = 100.0 * (r.squaredNorm() + ex * ex);
      ev.gz = 200.0 * r;
      ev.gnu = 200.0 * ex;
    }
    if (!std::isfinite(ev.objective)) return ev;

    build_constraints(z, nuS, ev.tape.nodes, ev.nu, S, ev.cons);

    double phi = ev.objective;
    ev.weight.assign(ev.cons.size(), 0.0);
    for (std::size_t i = 0; i < ev.cons.size(); ++i) {
      const auto& cn = ev.cons[i];
      const double l = i < lambda.size() ? lambda[i] : 0.0;
      if (cn.kind == ConstraintKind::kEq) {
        phi += l * cn.value + 0.5 * rho * cn.value * cn.value;
        ev.weight[i] = l + rho * cn.value;
      } else {
        const double t = std::max(0.0, l / rho + cn.value);
        phi += 0.5 * rho * (t * t - (l / rho) * (l / rho));
        ev.weight[i] = rho * t;
      }
    }
    ev.phi = phi;
    if (grad) gradient(x, ev);
    return ev;
  }

  void gradient(const Eigen::VectorXd& x, Evaluation& ev) const {
    if (!std::isfinite(ev.phi) || ev.grad.size()) return;
    const double S = x(0);
    Eigen::VectorXd gz = ev.gz;
    double gnu = ev.gnu;
    Eigen::MatrixXd seeds = Eigen::MatrixXd::Zero(N_ + 1, 1 + n_);
    Eigen::VectorXd dnu = Eigen::VectorXd::Zero(N_ + 1);
    double dS = 0.0;
    for (std::size_t i = 0; i < ev.cons.size(); ++i) {
      const auto& cn = ev.cons[i];
      const double wgt = ev.weight[i];
      if (wgt == 0.0) continue;
      if (cn.gz.size()) gz += wgt * cn.gz;
      gnu += wgt * cn.gnu;
      for (const auto& [node, a] : cn.nodes) {
        seeds.row(node) += (wgt * a) * cn.gnode.transpose();
        dnu(node) += wgt * a * cn.gnuk;
      }
      dS += wgt * cn.gS;
    }
    seeds.row(0) += gz.head(1 + n_).transpose();
    seeds.row(N_) += gz.tail(1 + n_).transpose();
    dnu(N_) += gnu;

    IntegrationOptions io;
    io.substeps = cfg_.substeps;
    const ControlSequence& c = ev.controls;
    ExtendedGradient eg = extended_vjp(fe_, c, ev.tape, seeds, io);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(size());
    dS += eg.d_ds.sum() / N_;
    for (int j = 1; j <= N_; ++j) dS += dnu(j) * ev.nu(j) / S;
    g(0) = dS;
    double tail = 0.0;  // sum_{j > k} dnu_j
    for (int k = N_ - 1; k >= 0; --k) {
      tail += dnu(k + 1);
      const Eigen::VectorXd d = ev.dirs.row(k).transpose();
      const Eigen::VectorXd gw = eg.d_w.row(k).transpose();
      g(ith(k)) = eg.d_w0(k) - gw.dot(d) - (S / N_) * tail;
      if (ev.psn(k) > 1e-12) {
        const double th = c.w0(k);
        Eigen::VectorXd gpsi = (1.0 - th) * (gw - d * d.dot(gw)) / ev.psn(k);
        g.segment(ir(k), mr_) = ev.jacs[static_cast<std::size_t>(k)].transpose() * gpsi;
      }
    }
    g.segment(iinit(), 1 + n_) = eg.d_init;
    ev.grad = g;
  }

  double stationarity(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
    Eigen::VectorXd y = x - g;
    project(y);
    return (y - x).lpNorm<Eigen::Infinity>();
  }

  // Max violation of the constraint set, complementarity-aware.
  static double constraint_violation(const std::vector<Constraint>& cons, const std::vector<double>& lambda, double rho) {
    double v = 0.0;
    for (std::size_t i = 0; i < cons.size(); ++i) {
      const auto& cn = cons[i];
      if (cn.kind == ConstraintKind::kEq) {
        v = std::max(v, std::abs(cn.value));
      } else {
        v = std::max(v, std::abs(std::max(cn.value, -(i < lambda.size() ? lambda[i] : 0.0) / rho)));
      }
    }
    return v;
  }

  static double primal_violation(const std::vector<Constraint>& cons) {
    double v = 0.0;
    for (const auto& cn : cons) v = std::max(v, cn.kind == ConstraintKind::kEq ? std::abs(cn.value) : cn.value);
    return std::max(v, 0.0);
  }

  const FieldEvaluator& fe() const { return fe_; }
  const Eigen::VectorXd& fallback() const { return fallback_; }

 private:
  void build_constraints(const Eigen::VectorXd& z, double nuS, const Eigen::MatrixXd& nodes, const Eigen::VectorXd& nu,
                         double S, std::vector<Constraint>& out) const {
    const int dz = 2 + 2 * n_;
    const auto& tg = p_.target;
    if (opt_.objective == Objective::kCost) {
      for (int i = tg.t2_index(); i < dz; ++i) {
        const Bound& b = tg.bounds[static_cast<std::size_t>(i)];
        if (b.is_fixed()) {
          Constraint cn(ConstraintKind::kEq);
          cn.value = z(i) - b.lo;
          cn.gz = Eigen::VectorXd::Unit(dz, i);
          out.push_back(std::move(cn));
          continue;
        }
        if (std::isfinite(b.lo)) {
          Constraint cn(ConstraintKind::kIneq);
          cn.value = b.lo - z(i);
          cn.gz = -Eigen::VectorXd::Unit(dz, i);
          out.push_back(std::move(cn));
        }
        if (std::isfinite(b.hi)) {
          Constraint cn(ConstraintKind::kIneq);
          cn.value = z(i) - b.hi;
          cn.gz = Eigen::VectorXd::Unit(dz, i);
          out.push_back(std::move(cn));
        }
      }
      for (const auto& h : tg.halfspaces) {
        Constraint cn(ConstraintKind::kIneq);
        cn.value = h.a.dot(z) - h.b;
        cn.gz = h.a;
        out.push_back(std::move(cn));
      }
      if (std::isfinite(p_.K)) {
        Constraint cn(ConstraintKind::kIneq);
        cn.value = nuS - p_.K;
        cn.gnu = 1.0;
        out.push_back(std::move(cn));
      }
    }
    if (ref_.ep) {
      const ExtendedProcess& r = *ref_.ep;
      const double a0 = z(0) - r.y0(0);
      const double a1 = z(1 + n_) - r.y0(r.intervals());
      const double T = smooth_abs(a0) + smooth_abs(a1);
      Eigen::VectorXd val, slope, delta(n_ + 1);
      constexpr double eta = 1e-9;
      auto push = [&](std::vector<std::pair<int, double>> at, const Eigen::VectorXd& dS_delta) {
        const double nrm = std::sqrt(delta.squaredNorm() + eta * eta);
        Constraint cn(ConstraintKind::kIneq);
        cn.value = T + nrm - eta - opt_.delta;
        cn.gz = Eigen::VectorXd::Zero(dz);
        cn.gz(0) = smooth_abs_d(a0);
        cn.gz(1 + n_) = smooth_abs_d(a1);
        cn.nodes = std::move(at);
        cn.gnode = Eigen::VectorXd::Zero(1 + n_);
        cn.gnode.tail(n_) = delta.head(n_) / nrm;
        cn.gnuk = delta(n_) / nrm;
        cn.gS = delta.dot(dS_delta) / nrm;
        out.push_back(std::move(cn));
      };
      // Candidate nodes against the interpolated reference.
      for (int k = 0; k <= N_; ++k) {
        const double s = k * S / N_;
        ref_.at(s, val, slope);
        delta << nodes.row(k).tail(n_).transpose() - val.head(n_), nu(k) - val(n_);
        push({{k, 1.0}}, -slope * (static_cast<double>(k) / N_));
      }
      // Reference nodes against the interpolated candidate.
      Eigen::VectorXd za(n_ + 1), zb(n_ + 1);
      for (int j = 0; j <= r.intervals(); ++j) {
        const double s = r.s(j);
        Eigen::VectorXd rv(n_ + 1);
        rv << r.y.row(j).transpose(), r.nu(j);
        if (s >= S) {
          delta << nodes.row(N_).tail(n_).transpose() - rv.head(n_), nu(N_) - rv(n_);
          push({{N_, 1.0}}, Eigen::VectorXd::Zero(n_ + 1));
          continue;
        }
        const double u = s * N_ / S;
        const int k = std::clamp(static_cast<int>(u), 0, N_ - 1);
        const double th = u - k;
        za << nodes.row(k).tail(n_).transpose(), nu(k);
        zb << nodes.row(k + 1).tail(n_).transpose(), nu(k + 1);
        delta = (1.0 - th) * za + th * zb - rv;
        push({{k, 1.0 - th}, {k + 1, th}}, (zb - za) * (-u / S));
      }
    }
  }

  const ProblemSpec& p_;
  SolveConfig cfg_;
  TranscriptionOptions opt_;
  FieldEvaluator fe_;
  CostFunction cost_;
  int n_, m_, N_, mr_ = 0;
  bool trivial_cone_ = true;
  Eigen::VectorXd fallback_;
  Reference ref_;
  bool fixed_T_ = false;
  double T_ = 0.0;
};

struct InnerResult {
  Eigen::VectorXd x;
  Evaluation ev;
  double stat = kInf;
  int iterations = 0;
};

// Projected gradient with Barzilai-Borwein steps and a nonmonotone Armijo
// line search.
InnerResult inner_solve(const Transcription& tr, Eigen::VectorXd x, const std::vector<double>& lambda, double rho,
                        const SolveConfig& cfg) {
  tr.project(x);
  InnerResult res;
  Evaluation ev = tr.evaluate(x, lambda, rho, true);
  if (!std::isfinite(ev.phi)) {
    res.x = x;
    res.ev = ev;
    return res;
  }
  std::deque<double> hist{ev.phi};
  double alpha = 1.0 / std::max(1.0, ev.grad.lpNorm<Eigen::Infinity>());
  double stat = tr.stationarity(x, ev.grad);
  int it = 0;
  for (; it < cfg.inner_iterations && stat > cfg.tol_stat; ++it) {
    const double ref = *std::max_element(hist.begin(), hist.end());
    Eigen::VectorXd xn;
    Evaluation en;
    bool accepted = false;
    double a = alpha;
    for (int bt = 0; bt < 40; ++bt) {
      xn = x - a * ev.grad;
      tr.project(xn);
      const double decrease = ev.grad.dot(xn - x);
      en = tr.evaluate(xn, lambda, rho, false);
      if (std::isfinite(en.phi) && en.phi <= ref + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) break;
    tr.gradient(xn, en);
    const Eigen::VectorXd sv = xn - x;
    const Eigen::VectorXd yv = en.grad - ev.grad;
    const double sy = sv.dot(yv);
    alpha = sy > 1e-300 ? sv.squaredNorm() / sy : std::min(1e3, 2.0 * a);
    alpha = std::clamp(alpha, 1e-10, 1e3);
    x = xn;
    ev = std::move(en);
    hist.push_back(ev.phi);
    if (hist.size() > 10) hist.pop_front();
    stat = tr.stationarity(x, ev.grad);
  }
  res.x = x;
  res.ev = std::move(ev);
  res.stat = stat;
  res.iterations = it;
  return res;
}

struct RunResult {
  Eigen::VectorXd x;
  bool converged = false;
  std::vector<std::string> log;
};

template <class Visit>
RunResult run_al(const Transcription& tr, Eigen::VectorXd x, const SolveConfig& cfg, int run, Visit&& visit) {
  RunResult rr;
  tr.project(x);
  visit(x);
  std::vector<double> lambda(tr.evaluate(x, {}, 1.0, false).cons.size(), 0.0);
  double rho = 10.0;
  double prev = kInf;
  double prev_obj = kInf;
  for (int outer = 0; outer < cfg.outer_iterations; ++outer) {
    InnerResult in = inner_solve(tr, x, lambda, rho, cfg);
    x = in.x;
    const auto& cons = in.ev.cons;
    const double viol = Transcription::constraint_violation(cons, lambda, rho);
    char buf[256];
    std::snprintf(buf, sizeof buf, "run %d outer %d rho %.3g objective %.10g violation %.3e stationarity %.3e inner %d",
                  run, outer, rho, in.ev.objective, viol, in.stat, in.iterations);
    rr.log.emplace_back(buf);
    if (!std::isfinite(in.ev.phi)) break;
    visit(x);
    lambda.resize(cons.size(), 0.0);
    for (std::size_t i = 0; i < cons.size(); ++i) {
      if (cons[i].kind == ConstraintKind::kEq) {
        lambda[i] += rho * cons[i].value;
      } else {
        lambda[i] = std::max(0.0, lambda[i] + rho * cons[i].value);
      }
    }
    const double pviol = Transcription::primal_violation(cons);
    const bool stalled = std::abs(in.ev.objective - prev_obj) <= cfg.tol_stat * (1.0 + std::abs(in.ev.objective));
    prev_obj = in.ev.objective;
    if (viol <= cfg.tol_feas && (in.stat <= cfg.tol_stat || (stalled && pviol <= cfg.tol_feas))) {
      rr.converged = true;
      break;
    }
    if (viol > 0.25 * prev) rho = std::min(rho * cfg.penalty_growth, 1e9);
    prev = viol;
  }
  rr.x = x;
  return rr;
}

Eigen::VectorXd initial_box_point(const ProblemSpec& p) {
  Eigen::VectorXd z(1 + p.n());
  for (int i = 0; i <= p.n(); ++i) {
    const Bound& b = p.target.bounds[static_cast<std::size_t>(i)];
    z(i) = std::clamp(0.0, b.lo, b.hi);
  }
  return z;
}

void set_S(const Transcription& tr, Eigen::VectorXd& x, double fallback) {
  const int N = tr.N();
  if (tr.fixed_T()) {
    double sum = 0.0;
    for (int k = 0; k < N; ++k) sum += x(tr.ith(k));
    x(0) = sum > 0.0 ? tr.T() * N / sum : fallback;
  } else {
    x(0) = fallback;
  }
}

Eigen::VectorXd start_point(const ProblemSpec& p, const Transcription& tr, const TranscriptionOptions& opt, int run,
                            std::mt19937_64& rng) {
  const int N = tr.N();
  const int mr = tr.mr();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(tr.size());
  const Eigen::VectorXd dir0 = tr.invert_direction(tr.fallback());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double lo = std::clamp(opt.w0_min, 0.0, 1.0);
  for (int k = 0; k < N; ++k) {
    x(tr.ith(k)) = 1.0;
    x.segment(tr.ir(k), mr) = dir0;
  }
  x.segment(tr.iinit(), 1 + p.n()) = initial_box_point(p);
  if (run == 0) {
    set_S(tr, x, 1.0);
    return x;
  }
  auto random_dir = [&]() {
    Eigen::VectorXd r(mr);
    for (int i = 0; i < mr; ++i) r(i) = normal(rng);
    return r;
  };
  if (run % 2 == 1) {
    const int len = std::max(1, N / 4);
    const int pos = static_cast<int>(unif(rng) * (N - len + 1));
    const Eigen::VectorXd r = random_dir();
    const double th = lo + (1.0 - lo) * 0.3 * unif(rng);
    for (int k = pos; k < std::min(N, pos + len); ++k) {
      x(tr.ith(k)) = th;
      x.segment(tr.ir(k), mr) = r;
    }
  } else {
    for (int k = 0; k < N; ++k) {
      x(tr.ith(k)) = lo + (1.0 - lo) * unif(rng);
      x.segment(tr.ir(k), mr) = random_dir();
    }
  }
  for (int i = 0; i <= p.n(); ++i) {
    const Bound& b = p.target.bounds[static_cast<std::size_t>(i)];
    if (!b.is_fixed()) x(tr.iinit() + i) += normal(rng);
  }
  set_S(tr, x, 0.5 + 2.5 * unif(rng));
  tr.project(x);
  return x;
}

Eigen::VectorXd seed_point(const ProblemSpec& p, const Transcription& tr, const ExtendedProcess& seed) {
  const int N = tr.N();
  const int mr = tr.mr();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(tr.size());
  x(0) = seed.S();
  const int Ns = seed.intervals();
  for (int k = 0; k < N; ++k) {
    const double s = (k + 0.5) * seed.S() / N;
    const auto* b = seed.s.data();
    int j = static_cast<int>(std::upper_bound(b, b + Ns + 1, s) - b) - 1;
    j = std::clamp(j, 0, Ns - 1);
    const Eigen::VectorXd w = seed.w.row(j).transpose();
    const double nw = w.norm();
    x(tr.ith(k)) = seed.w0(j) / std::max(seed.w0(j) + nw, 1e-300);
    x.segment(tr.ir(k), mr) = tr.invert_direction(nw > 1e-12 ? Eigen::VectorXd(w / nw) : tr.fallback());
  }
  x(tr.iinit()) = seed.y0(0);
  x.segment(tr.iinit() + 1, p.n()) = seed.y.row(0).transpose();
  tr.project(x);
  return x;
}

}  // namespace

double feasibility_residual(const ProblemSpec& p, const ExtendedProcess& ep) {
  double r = p.target.violation(ep.endpoint());
  if (std::isfinite(p.K)) r = std::max(r, ep.nu_final() - p.K);
  return std::max(r, 0.0);
}

double evaluate_cost(const ProblemSpec& p, const ExtendedProcess& ep) {
  CostFunction cf(p);
  return cf.value(endpoint_with_nu(ep));
}

double violation(const ProblemSpec& p, const ExtendedProcess& ep) {
  double r = p.target.distance(ep.endpoint());
  if (std::isfinite(p.K)) r = std::max(r, ep.nu_final() - p.K);
  return std::max(r, 0.0);
}

Candidate solve_transcribed(const ProblemSpec& p, const SolveConfig& cfg, const TranscriptionOptions& opt) {
  if (cfg.N < 1) throw std::invalid_argument("solve: N must be positive");
  if (opt.reference && !(opt.delta > 0.0)) throw std::invalid_argument("solve: ball radius must be positive");
  Transcription tr(p, cfg, opt);
  Candidate best;
  best.w0_min = opt.w0_min;
  best.config = cfg;
  const int runs = std::max(cfg.multistarts, 1) + static_cast<int>(opt.seeds.size());
  IntegrationOptions fine;
  fine.substeps = 8;
  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (a.feasible) return a.cost < b.cost;
    return a.feasibility < b.feasibility;
  };
  std::vector<std::string> all_log;
  std::vector<bool> converged;
  auto consider = [&](const Eigen::VectorXd& x, int run) {
    Candidate c;
    c.run = run;
    c.w0_min = opt.w0_min;
    c.config = cfg;
    try {
      ControlSequence cs = tr.controls(x);
      const Eigen::VectorXd zi = tr.z_init(x);
      c.process = integrate_extended(tr.fe(), cs, zi(0), zi.tail(p.n()), fine);
    } catch (const IntegrationError&) {
      return;
    }
    if (opt.objective == Objective::kCost) {
      c.cost = evaluate_cost(p, c.process);
      c.feasibility = feasibility_residual(p, c.process);
    } else {
      c.cost = violation(p, c.process);
      c.feasibility = 0.0;
    }
    if (opt.reference) c.feasibility = std::max(c.feasibility, d_infty(c.process, *opt.reference) - opt.delta);
    c.feasible = c.feasibility <= 10.0 * cfg.tol_feas && std::isfinite(c.cost);
    if (best.run < 0 || better(c, best)) best = std::move(c);
  };
  for (int run = 0; run < runs; ++run) {
    std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(run));
    const int nseed = run - std::max(cfg.multistarts, 1);
    Eigen::VectorXd x0 = nseed >= 0 ? seed_point(p, tr, opt.seeds[static_cast<std::size_t>(nseed)])
                                    : start_point(p, tr, opt, run, rng);
    RunResult rr = run_al(tr, x0, cfg, run, [&](const Eigen::VectorXd& x) { consider(x, run); });
    all_log.insert(all_log.end(), rr.log.begin(), rr.log.end());
    converged.push_back(rr.converged);
  }
  if (best.run >= 0) best.converged = converged[static_cast<std::size_t>(best.run)];
  best.log = std::move(all_log);
  return best;
}

Candidate solve_extended(const ProblemSpec& p, const SolveConfig& cfg) {
  return solve_transcribed(p, cfg, TranscriptionOptions{});
}

Candidate solve_strict_restricted(const ProblemSpec& p, double eps, const SolveConfig& cfg) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("solve: eps must lie in (0, 1]");
  TranscriptionOptions opt;
  opt.w0_min = eps;
  return solve_transcribed(p, cfg, opt);
}

BruteForceResult brute_force_oracle(const ProblemSpec& p, const BruteForceOptions& opt) {
  const int m = p.m();
  const int n = p.n();
  std::vector<Eigen::VectorXd> choices;
  {
    const int L = static_cast<int>(opt.levels.size());
    long long total = 1;
    for (int j = 0; j < m; ++j) total *= L;
    for (long long idx = 0; idx < total; ++idx) {
      Eigen::VectorXd w(m);
      long long r = idx;
      for (int j = 0; j < m; ++j) {
        w(j) = opt.levels[static_cast<std::size_t>(r % L)];
        r /= L;
      }
      const double nw = w.norm();
      if (nw > 1.0 + 1e-12 || !p.cone.contains(w, 1e-12)) continue;
      if (1.0 - nw < opt.w0_min - 1e-12) continue;
      choices.push_back(w);
    }
  }
  const auto& b = p.target.bounds;
  const bool fixed_T = b[0].is_fixed() && b[static_cast<std::size_t>(p.target.t2_index())].is_fixed();
  const int N = opt.intervals;
  const double per_level = static_cast<double>(choices.size());
  const double budget = std::pow(per_level, N) * (fixed_T ? 1.0 : static_cast<double>(opt.s_levels.size()));
  const double declared = std::pow(static_cast<double>(opt.levels.size()), m * N);
  if (declared > 1e7 || budget > 1e7) {
    std::ostringstream os;
    os << "brute force budget exceeded: " << declared << " combinations > 1e7";
    throw BudgetExceededError(os.str());
  }
  FieldEvaluator fe(p.fields);
  CostFunction cf(p);
  const Eigen::VectorXd zi = initial_box_point(p);
  IntegrationOptions io;
  io.substeps = 8;
  BruteForceResult res;
  std::vector<int> idx(static_cast<std::size_t>(N), 0);
  const int C = static_cast<int>(choices.size());
  if (C == 0) return res;
  Eigen::VectorXd w0(N);
  Eigen::MatrixXd w(N, m);
  while (true) {
    double sum_w0 = 0.0;
    for (int k = 0; k < N; ++k) {
      w.row(k) = choices[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])].transpose();
      w0(k) = 1.0 - w.row(k).norm();
      sum_w0 += w0(k);
    }
    std::vector<double> Ss;
    if (fixed_T) {
      const double T = b[static_cast<std::size_t>(p.target.t2_index())].lo - b[0].lo;
      if (sum_w0 > 1e-12 && T > 0.0) Ss.push_back(T * N / sum_w0);
      if (T == 0.0 && sum_w0 <= 1e-12) Ss = opt.s_levels;
    } else {
      Ss = opt.s_levels;
    }
    for (double S : Ss) {
      ++res.evaluated;
      ExtendedProcess ep;
      try {
        ep = integrate_extended(fe, ControlSequence::uniform(S, w0, w), zi(0), zi.tail(n), io);
      } catch (const IntegrationError&) {
        continue;
      }
      if (feasibility_residual(p, ep) > opt.feas_tol) continue;
      const double cost = cf.value(endpoint_with_nu(ep));
      if (!res.feasible || cost < res.cost) {
        res.feasible = true;
        res.cost = cost;
        res.process = ep;
      }
    }
    int k = 0;
    while (k < N && ++idx[static_cast<std::size_t>(k)] == C) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == N) break;
  }
  return res;
}

}  // namespace impgap
