#include "impgap/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace impgap {

FieldEvaluator::FieldEvaluator(const VectorFieldSet& fs) : n_(fs.n), m_(fs.m) {
  const auto vars = VectorFieldSet::variable_names(n_);
  for (const auto& e : fs.f) {
    f_.emplace_back(e, vars);
    f_zero_.push_back(e.is_constant(0.0));
  }
  g_.reserve(static_cast<std::size_t>(n_ * m_));
  for (int j = 0; j < m_; ++j) {
    for (int i = 0; i < n_; ++i) {
      const Expr& e = fs.g[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      g_.emplace_back(e, vars);
      g_zero_.push_back(e.is_constant(0.0));
    }
  }
  auto add = [&](const Expr& e, int row, int ctrl) {
    for (int col = 0; col <= n_; ++col) {
      Expr d = differentiate(e, vars[static_cast<std::size_t>(col)]);
      if (is_structurally_zero(d)) continue;
      jac_.push_back({row, col, ctrl, CompiledExpr(d, vars)});
    }
  };
  for (int i = 0; i < n_; ++i) add(fs.f[static_cast<std::size_t>(i)], i, -1);
  for (int j = 0; j < m_; ++j) {
    for (int i = 0; i < n_; ++i) add(fs.g[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)], i, j);
  }
}

void FieldEvaluator::fields(const double* z, double* f, double* g) const {
  std::span<const double> vals(z, static_cast<std::size_t>(1 + n_));
  for (int i = 0; i < n_; ++i) f[i] = f_[static_cast<std::size_t>(i)](vals);
  for (std::size_t k = 0; k < g_.size(); ++k) g[k] = g_zero_[k] ? 0.0 : g_[k](vals);
}

void FieldEvaluator::rhs(const double* z, double w0, const double* w, double* out) const {
  std::span<const double> vals(z, static_cast<std::size_t>(1 + n_));
  out[0] = w0;
  for (int i = 0; i < n_; ++i) {
    double acc = (w0 == 0.0 || f_zero_[static_cast<std::size_t>(i)]) ? 0.0 : f_[static_cast<std::size_t>(i)](vals) * w0;
    for (int j = 0; j < m_; ++j) {
      std::size_t idx = static_cast<std::size_t>(j * n_ + i);
      if (w[j] != 0.0 && !g_zero_[idx]) acc += g_[idx](vals) * w[j];
    }
    out[1 + i] = acc;
  }
}

void FieldEvaluator::jacobian(const double* z, double w0, const double* w, double* a) const {
  std::span<const double> vals(z, static_cast<std::size_t>(1 + n_));
  const int d = 1 + n_;
  std::fill(a, a + d * d, 0.0);
  for (const auto& en : jac_) {
    double coef = en.ctrl < 0 ? w0 : w[en.ctrl];
    if (coef == 0.0) continue;
    a[(1 + en.row) * d + en.col] += en.e(vals) * coef;
  }
}

void FieldEvaluator::vjp(const double* z, double w0, const double* w, const double* abar, double* zbar, double* w0bar,
                         double* wbar) const {
  std::span<const double> vals(z, static_cast<std::size_t>(1 + n_));
  for (const auto& en : jac_) {
    double coef = en.ctrl < 0 ? w0 : w[en.ctrl];
    double ab = abar[1 + en.row];
    if (coef == 0.0 || ab == 0.0) continue;
    zbar[en.col] += ab * en.e(vals) * coef;
  }
  double s0 = abar[0];
  for (int i = 0; i < n_; ++i) {
    if (abar[1 + i] != 0.0) s0 += abar[1 + i] * f_[static_cast<std::size_t>(i)](vals);
  }
  *w0bar += s0;
  for (int j = 0; j < m_; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) {
      std::size_t idx = static_cast<std::size_t>(j * n_ + i);
      if (abar[1 + i] != 0.0 && !g_zero_[idx]) acc += abar[1 + i] * g_[idx](vals);
    }
    wbar[j] += acc;
  }
}

Eigen::VectorXd FieldEvaluator::rhs(const Eigen::VectorXd& z, double w0, const Eigen::VectorXd& w) const {
  Eigen::VectorXd out(1 + n_);
  rhs(z.data(), w0, w.data(), out.data());
  return out;
}

Eigen::MatrixXd FieldEvaluator::jacobian(const Eigen::VectorXd& z, double w0, const Eigen::VectorXd& w) const {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a(1 + n_, 1 + n_);
  jacobian(z.data(), w0, w.data(), a.data());
  return a;
}

// ---------------------------------------------------------------- forward

namespace {

struct Rk4Work {
  Eigen::VectorXd k1, k2, k3, k4, tmp;
  explicit Rk4Work(int d) : k1(d), k2(d), k3(d), k4(d), tmp(d) {}
};

void rk4_step(const FieldEvaluator& fe, double h, double w0, const double* w, Eigen::VectorXd& z, Rk4Work& r) {
  fe.rhs(z.data(), w0, w, r.k1.data());
  r.tmp = z + 0.5 * h * r.k1;
  fe.rhs(r.tmp.data(), w0, w, r.k2.data());
  r.tmp = z + 0.5 * h * r.k2;
  fe.rhs(r.tmp.data(), w0, w, r.k3.data());
  r.tmp = z + h * r.k3;
  fe.rhs(r.tmp.data(), w0, w, r.k4.data());
  z += (h / 6.0) * (r.k1 + 2.0 * r.k2 + 2.0 * r.k3 + r.k4);
}

void check_box(const Eigen::VectorXd& z, double box, int k) {
  double nrm = z.tail(z.size() - 1).norm();
  if (!(nrm <= box)) {
    std::ostringstream os;
    os << "state left the safety box |y| <= " << box << " on interval " << k << " (|y| = " << nrm << ")";
    throw IntegrationError(os.str());
  }
}

}  // namespace

ExtendedProcess integrate_extended(const FieldEvaluator& fe, const ControlSequence& c, double y0_init,
                                   const Eigen::VectorXd& y_init, const IntegrationOptions& opt) {
  const int n = fe.n();
  const int N = c.size();
  if (y_init.size() != n) throw std::invalid_argument("integrate_extended: initial state has wrong size");
  if (c.w.cols() != fe.m() || c.w.rows() != N || c.w0.size() != N) {
    throw std::invalid_argument("integrate_extended: control sequence has wrong shape");
  }
  ExtendedProcess ep;
  ep.s.resize(N + 1);
  ep.y0.resize(N + 1);
  ep.y.resize(N + 1, n);
  ep.nu.resize(N + 1);
  ep.w0 = c.w0;
  ep.w = c.w;
  ep.phi_init = Eigen::VectorXd::Zero(fe.m());
  Eigen::VectorXd z(1 + n);
  z(0) = y0_init;
  z.tail(n) = y_init;
  ep.s(0) = 0.0;
  ep.y0(0) = z(0);
  ep.y.row(0) = y_init.transpose();
  ep.nu(0) = 0.0;
  Rk4Work work(1 + n);
  Eigen::VectorXd wk(fe.m());
  for (int k = 0; k < N; ++k) {
    const double ds = c.ds(k);
    if (!(ds >= 0.0)) throw std::invalid_argument("integrate_extended: negative interval length");
    wk = c.w.row(k).transpose();
    const double h = ds / opt.substeps;
    for (int s = 0; s < opt.substeps; ++s) rk4_step(fe, h, c.w0(k), wk.data(), z, work);
    check_box(z, opt.safety_box, k);
    ep.s(k + 1) = ep.s(k) + ds;
    ep.y0(k + 1) = z(0);
    ep.y.row(k + 1) = z.tail(n).transpose();
    ep.nu(k + 1) = ep.nu(k) + wk.norm() * ds;
  }
  return ep;
}

ExtendedProcess integrate_extended(const ProblemSpec& p, const ControlSequence& c, double y0_init,
                                   const Eigen::VectorXd& y_init, const IntegrationOptions& opt) {
  return integrate_extended(FieldEvaluator(p.fields), c, y0_init, y_init, opt);
}

StrictProcess integrate_strict(const FieldEvaluator& fe, const Eigen::VectorXd& t, const Eigen::MatrixXd& du,
                               const Eigen::VectorXd& x_init, const IntegrationOptions& opt) {
  const int n = fe.n();
  const int M = static_cast<int>(du.rows());
  if (t.size() != M + 1 || du.cols() != fe.m()) throw std::invalid_argument("integrate_strict: shape mismatch");
  StrictProcess sp;
  sp.t = t;
  sp.du = du;
  sp.x.resize(M + 1, n);
  sp.v.resize(M + 1);
  sp.u = Eigen::MatrixXd::Zero(M + 1, fe.m());
  Eigen::VectorXd z(1 + n);
  z(0) = t(0);
  z.tail(n) = x_init;
  sp.x.row(0) = x_init.transpose();
  sp.v(0) = 0.0;
  Rk4Work work(1 + n);
  Eigen::VectorXd dk(fe.m());
  for (int k = 0; k < M; ++k) {
    const double dt = t(k + 1) - t(k);
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_strict: time grid must be strictly increasing");
    dk = du.row(k).transpose();
    const double h = dt / opt.substeps;
    for (int s = 0; s < opt.substeps; ++s) rk4_step(fe, h, 1.0, dk.data(), z, work);
    check_box(z, opt.safety_box, k);
    z(0) = t(k + 1);
    sp.x.row(k + 1) = z.tail(n).transpose();
    sp.v(k + 1) = sp.v(k) + dk.norm() * dt;
    sp.u.row(k + 1) = sp.u.row(k) + dt * du.row(k);
  }
  return sp;
}

StrictProcess integrate_strict(const ProblemSpec& p, const Eigen::VectorXd& t, const Eigen::MatrixXd& du,
                               const Eigen::VectorXd& x_init, const IntegrationOptions& opt) {
  return integrate_strict(FieldEvaluator(p.fields), t, du, x_init, opt);
}

// ---------------------------------------------------------------- adjoint

Eigen::VectorXd interpolate_state(const FieldEvaluator& fe, const ExtendedProcess& ep, int k, double theta) {
  const int n = ep.n();
  Eigen::VectorXd za(1 + n), zb(1 + n);
  za(0) = ep.y0(k);
  za.tail(n) = ep.y.row(k).transpose();
  zb(0) = ep.y0(k + 1);
  zb.tail(n) = ep.y.row(k + 1).transpose();
  Eigen::VectorXd w = ep.w.row(k).transpose();
  Eigen::VectorXd fa = fe.rhs(za, ep.w0(k), w);
  Eigen::VectorXd fb = fe.rhs(zb, ep.w0(k), w);
  const double h = ep.ds(k);
  const double t = theta;
  const double h00 = 2 * t * t * t - 3 * t * t + 1;
  const double h10 = t * t * t - 2 * t * t + t;
  const double h01 = -2 * t * t * t + 3 * t * t;
  const double h11 = t * t * t - t * t;
  return h00 * za + h10 * h * fa + h01 * zb + h11 * h * fb;
}

namespace {

// Hermite data for one interval, reused across substeps.
struct HermiteCell {
  Eigen::VectorXd za, zb, fa, fb;
  double h = 0.0;

  void load(const FieldEvaluator& fe, const ExtendedProcess& ep, int k) {
    const int n = ep.n();
    za.resize(1 + n);
    zb.resize(1 + n);
    za(0) = ep.y0(k);
    za.tail(n) = ep.y.row(k).transpose();
    zb(0) = ep.y0(k + 1);
    zb.tail(n) = ep.y.row(k + 1).transpose();
    Eigen::VectorXd w = ep.w.row(k).transpose();
    fa = fe.rhs(za, ep.w0(k), w);
    fb = fe.rhs(zb, ep.w0(k), w);
    h = ep.ds(k);
  }
  void eval(double t, Eigen::VectorXd& out) const {
    const double h00 = 2 * t * t * t - 3 * t * t + 1;
    const double h10 = t * t * t - 2 * t * t + t;
    const double h01 = -2 * t * t * t + 3 * t * t;
    const double h11 = t * t * t - t * t;
    out = h00 * za + h10 * h * fa + h01 * zb + h11 * h * fb;
  }
};

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Backward sweep for a block of terminal conditions (columns of Pt).
std::vector<Eigen::MatrixXd> adjoint_sweep(const FieldEvaluator& fe, const ExtendedProcess& ep,
                                           const Eigen::MatrixXd& Pt, int substeps) {
  const int N = ep.intervals();
  const int d = 1 + ep.n();
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(N + 1));
  Eigen::MatrixXd P = Pt;
  out[static_cast<std::size_t>(N)] = P;
  HermiteCell cell;
  Eigen::VectorXd zs(d);
  RowMat a0(d, d), am(d, d), a1(d, d);
  Eigen::MatrixXd k1, k2, k3, k4;
  for (int k = N - 1; k >= 0; --k) {
    cell.load(fe, ep, k);
    Eigen::VectorXd w = ep.w.row(k).transpose();
    const double w0 = ep.w0(k);
    const double h = cell.h / substeps;
    for (int s = substeps; s > 0; --s) {
      const double th1 = static_cast<double>(s) / substeps;
      const double thm = (s - 0.5) / substeps;
      const double th0 = static_cast<double>(s - 1) / substeps;
      cell.eval(th1, zs);
      fe.jacobian(zs.data(), w0, w.data(), a1.data());
      cell.eval(thm, zs);
      fe.jacobian(zs.data(), w0, w.data(), am.data());
      cell.eval(th0, zs);
      fe.jacobian(zs.data(), w0, w.data(), a0.data());
      // dP/ds = -A' P integrated from s to s - h.
      k1 = -a1.transpose() * P;
      k2 = -am.transpose() * (P - 0.5 * h * k1);
      k3 = -am.transpose() * (P - 0.5 * h * k2);
      k4 = -a0.transpose() * (P - h * k3);
      P -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out[static_cast<std::size_t>(k)] = P;
  }
  return out;
}

}  // namespace

AdjointPath integrate_adjoint(const FieldEvaluator& fe, const ExtendedProcess& ep, const Eigen::VectorXd& terminal,
                              int substeps) {
  const int d = 1 + ep.n();
  if (terminal.size() != d) throw std::invalid_argument("integrate_adjoint: terminal has wrong size");
  auto cols = adjoint_sweep(fe, ep, terminal, substeps);
  AdjointPath ap;
  ap.s = ep.s;
  ap.P.resize(ep.intervals() + 1, d);
  for (std::size_t k = 0; k < cols.size(); ++k) ap.P.row(static_cast<Eigen::Index>(k)) = cols[k].col(0).transpose();
  return ap;
}

AdjointPath integrate_adjoint(const ProblemSpec& p, const ExtendedProcess& ep, const Eigen::VectorXd& terminal,
                              int substeps) {
  return integrate_adjoint(FieldEvaluator(p.fields), ep, terminal, substeps);
}

AdjointPath TransitionMap::apply(const Eigen::VectorXd& terminal) const {
  AdjointPath ap;
  ap.s = s;
  const auto d = terminal.size();
  ap.P.resize(static_cast<Eigen::Index>(L.size()), d);
  for (std::size_t k = 0; k < L.size(); ++k) ap.P.row(static_cast<Eigen::Index>(k)) = (L[k] * terminal).transpose();
  return ap;
}

TransitionMap transition_map(const FieldEvaluator& fe, const ExtendedProcess& ep, int substeps) {
  const int d = 1 + ep.n();
  TransitionMap tm;
  tm.s = ep.s;
  tm.L.assign(static_cast<std::size_t>(ep.intervals() + 1), Eigen::MatrixXd(d, d));
  // Column by column so each column is bit-identical to integrate_adjoint(e_i).
  for (int i = 0; i < d; ++i) {
    AdjointPath col = integrate_adjoint(fe, ep, Eigen::VectorXd::Unit(d, i), substeps);
    for (std::size_t k = 0; k < tm.L.size(); ++k) tm.L[k].col(i) = col.P.row(static_cast<Eigen::Index>(k)).transpose();
  }
  return tm;
}

TransitionMap transition_map(const ProblemSpec& p, const ExtendedProcess& ep, int substeps) {
  return transition_map(FieldEvaluator(p.fields), ep, substeps);
}

// ---------------------------------------------------------------- reverse mode

ExtendedTape record_extended(const FieldEvaluator& fe, const ControlSequence& c, const Eigen::VectorXd& z_init,
                             const IntegrationOptions& opt) {
  const int d = 1 + fe.n();
  const int N = c.size();
  const int sub = opt.substeps;
  ExtendedTape tape;
  tape.substeps.resize(d, N * sub);
  tape.nodes.resize(N + 1, d);
  Eigen::VectorXd z = z_init;
  tape.nodes.row(0) = z.transpose();
  Rk4Work work(d);
  Eigen::VectorXd wk(fe.m());
  for (int k = 0; k < N; ++k) {
    wk = c.w.row(k).transpose();
    const double h = c.ds(k) / sub;
    for (int s = 0; s < sub; ++s) {
      tape.substeps.col(k * sub + s) = z;
      rk4_step(fe, h, c.w0(k), wk.data(), z, work);
    }
    tape.nodes.row(k + 1) = z.transpose();
  }
  tape.finite = tape.nodes.allFinite() && tape.nodes.cwiseAbs().maxCoeff() <= opt.safety_box;
  return tape;
}

ExtendedGradient extended_vjp(const FieldEvaluator& fe, const ControlSequence& c, const Eigen::VectorXd& z_init,
                              const Eigen::MatrixXd& seeds, const IntegrationOptions& opt) {
  return extended_vjp(fe, c, record_extended(fe, c, z_init, opt), seeds, opt);
}

ExtendedGradient extended_vjp(const FieldEvaluator& fe, const ControlSequence& c, const ExtendedTape& rec,
                              const Eigen::MatrixXd& seeds, const IntegrationOptions& opt) {
  const int n = fe.n();
  const int m = fe.m();
  const int d = 1 + n;
  const int N = c.size();
  const int sub = opt.substeps;
  if (seeds.rows() != N + 1 || seeds.cols() != d) throw std::invalid_argument("extended_vjp: seeds have wrong shape");
  const auto& tape = rec.substeps;
  Eigen::VectorXd wk(m);

  ExtendedGradient g;
  g.d_ds = Eigen::VectorXd::Zero(N);
  g.d_w0 = Eigen::VectorXd::Zero(N);
  g.d_w = Eigen::MatrixXd::Zero(N, m);
  Eigen::VectorXd zbar = seeds.row(N).transpose();
  Eigen::VectorXd k1(d), k2(d), k3(d), k4(d), a(d);
  Eigen::VectorXd kb1(d), kb2(d), kb3(d), kb4(d), ab(d);
  Eigen::VectorXd wbar(m);
  Eigen::VectorXd a2(d), a3(d), a4(d), znew(d), z0(d);
  for (int k = N - 1; k >= 0; --k) {
    wk = c.w.row(k).transpose();
    const double w0 = c.w0(k);
    const double h = c.ds(k) / sub;
    double w0bar = 0.0;
    wbar.setZero();
    double hbar_total = 0.0;
    for (int s = sub - 1; s >= 0; --s) {
      z0 = tape.col(k * sub + s);
      // Recompute stages.
      fe.rhs(z0.data(), w0, wk.data(), k1.data());
      a = z0 + 0.5 * h * k1;
      fe.rhs(a.data(), w0, wk.data(), k2.data());
      a2 = a;
      a = z0 + 0.5 * h * k2;
      fe.rhs(a.data(), w0, wk.data(), k3.data());
      a3 = a;
      a = z0 + h * k3;
      fe.rhs(a.data(), w0, wk.data(), k4.data());
      a4 = a;

      double hbar = zbar.dot(k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
      kb1 = (h / 6.0) * zbar;
      kb2 = (h / 3.0) * zbar;
      kb3 = (h / 3.0) * zbar;
      kb4 = (h / 6.0) * zbar;
      znew = zbar;

      ab.setZero();
      fe.vjp(a4.data(), w0, wk.data(), kb4.data(), ab.data(), &w0bar, wbar.data());
      znew += ab;
      kb3 += h * ab;
      hbar += ab.dot(k3);

      ab.setZero();
      fe.vjp(a3.data(), w0, wk.data(), kb3.data(), ab.data(), &w0bar, wbar.data());
      znew += ab;
      kb2 += 0.5 * h * ab;
      hbar += 0.5 * ab.dot(k2);

      ab.setZero();
      fe.vjp(a2.data(), w0, wk.data(), kb2.data(), ab.data(), &w0bar, wbar.data());
      znew += ab;
      kb1 += 0.5 * h * ab;
      hbar += 0.5 * ab.dot(k1);

      ab.setZero();
      fe.vjp(z0.data(), w0, wk.data(), kb1.data(), ab.data(), &w0bar, wbar.data());
      znew += ab;

      zbar = znew;
      hbar_total += hbar;
    }
    g.d_ds(k) = hbar_total / sub;
    g.d_w0(k) = w0bar;
    g.d_w.row(k) = wbar.transpose();
    zbar += seeds.row(k).transpose();
  }
  g.d_init = zbar;
  return g;
}

}  // namespace impgap
