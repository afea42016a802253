#include "impgap/reparam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace impgap {

ExtendedProcess embed(const StrictProcess& sp) {
  const int M = sp.intervals();
  const int n = sp.n();
  const int m = sp.m();
  ExtendedProcess ep;
  ep.s.resize(M + 1);
  ep.y0 = sp.t;
  ep.y = sp.x;
  ep.nu = sp.v;
  ep.w0.resize(M);
  ep.w.resize(M, m);
  ep.phi_init = sp.u.rows() > 0 ? Eigen::VectorXd(sp.u.row(0).transpose()) : Eigen::VectorXd::Zero(m);
  ep.s(0) = 0.0;
  for (int k = 0; k < M; ++k) {
    const double a = sp.du.row(k).norm();
    const double dt = sp.t(k + 1) - sp.t(k);
    ep.s(k + 1) = ep.s(k) + (1.0 + a) * dt;
    ep.w0(k) = 1.0 / (1.0 + a);
    ep.w.row(k) = sp.du.row(k) / (1.0 + a);
    // Keep nu consistent with the extended increment |w| ds.
    ep.nu(k + 1) = ep.nu(k) + ep.w.row(k).norm() * (ep.s(k + 1) - ep.s(k));
  }
  (void)n;
  return ep;
}

StrictProcess invert_embedding(const ExtendedProcess& ep) {
  const int N = ep.intervals();
  const int m = ep.m();
  for (int k = 0; k < N; ++k) {
    if (!(ep.w0(k) > 0.0)) {
      std::ostringstream os;
      os << "not an embedded strict-sense process: w0 = " << ep.w0(k) << " on interval " << k;
      throw NotEmbeddedError(os.str());
    }
  }
  StrictProcess sp;
  sp.t = ep.y0;
  sp.x = ep.y;
  sp.v = ep.nu;
  sp.du.resize(N, m);
  sp.u.resize(N + 1, m);
  sp.u.row(0) = ep.phi_init.size() == m ? Eigen::RowVectorXd(ep.phi_init.transpose()) : Eigen::RowVectorXd::Zero(m);
  for (int k = 0; k < N; ++k) {
    sp.du.row(k) = ep.w.row(k) / ep.w0(k);
    sp.u.row(k + 1) = sp.u.row(k) + ep.ds(k) * ep.w.row(k);
  }
  return sp;
}

ControlSequence arc_normalize(const ControlSequence& c) {
  ControlSequence out = c;
  for (int k = 0; k < c.size(); ++k) {
    const double lambda = c.w0(k) + c.w.row(k).norm();
    if (!(lambda > 0.0)) {
      std::ostringstream os;
      os << "arc_normalize: interval " << k << " has w0 + |w| = 0";
      throw std::invalid_argument(os.str());
    }
    out.ds(k) = c.ds(k) * lambda;
    out.w0(k) = c.w0(k) / lambda;
    out.w.row(k) = c.w.row(k) / lambda;
  }
  return out;
}

namespace {

// Piecewise-linear path through (grid, values) extended constantly.
Eigen::VectorXd sample(const Eigen::VectorXd& grid, const Eigen::MatrixXd& values, double t) {
  const Eigen::Index last = grid.size() - 1;
  if (t <= grid(0)) return values.row(0).transpose();
  if (t >= grid(last)) return values.row(last).transpose();
  const double* begin = grid.data();
  const double* it = std::upper_bound(begin, begin + grid.size(), t);
  Eigen::Index k = (it - begin) - 1;
  const double span = grid(k + 1) - grid(k);
  const double theta = span > 0.0 ? (t - grid(k)) / span : 0.0;
  return ((1.0 - theta) * values.row(k) + theta * values.row(k + 1)).transpose();
}

double sup_gap(const Eigen::VectorXd& ga, const Eigen::MatrixXd& va, const Eigen::VectorXd& gb,
               const Eigen::MatrixXd& vb) {
  std::vector<double> nodes(ga.data(), ga.data() + ga.size());
  nodes.insert(nodes.end(), gb.data(), gb.data() + gb.size());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  double sup = 0.0;
  for (double t : nodes) sup = std::max(sup, (sample(ga, va, t) - sample(gb, vb, t)).norm());
  return sup;
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& x, const Eigen::VectorXd& v) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out << x, v;
  return out;
}

}  // namespace

double d_infty(const StrictProcess& a, const StrictProcess& b) {
  return std::abs(a.t1() - b.t1()) + std::abs(a.t2() - b.t2()) + sup_gap(a.t, stack(a.x, a.v), b.t, stack(b.x, b.v));
}

double d_infty(const ExtendedProcess& a, const ExtendedProcess& b) {
  const auto na = a.intervals();
  const auto nb = b.intervals();
  return std::abs(a.y0(0) - b.y0(0)) + std::abs(a.y0(na) - b.y0(nb)) +
         sup_gap(a.s, stack(a.y, a.nu), b.s, stack(b.y, b.nu));
}

StrictProcess no_drift_strictify(const ProblemSpec& p, const ExtendedProcess& ep, double blend,
                                 const IntegrationOptions& opt) {
  if (!p.fields.drift_free()) throw NoDriftError("no_drift_strictify requires f identically zero");
  const int N = ep.intervals();
  const double t1 = ep.y0(0);
  const double t2 = ep.y0(N);
  const double S = ep.S();
  if (!(t2 > t1) || !(S > 0.0)) throw NoDriftError("no_drift_strictify: degenerate time interval");
  const double rate = (t2 - t1) / S;
  Eigen::VectorXd t(N + 1);
  Eigen::MatrixXd du(N, ep.m());
  t(0) = t1;
  for (int k = 0; k < N; ++k) {
    const double w0 = (1.0 - blend) * ep.w0(k) + blend * rate;
    if (!(w0 > 0.0)) throw NoDriftError("no_drift_strictify: blended time rate vanishes");
    t(k + 1) = t(k) + w0 * ep.ds(k);
    du.row(k) = ep.w.row(k) / w0;
  }
  t(N) = t2;
  return integrate_strict(p, t, du, ep.y.row(0).transpose(), opt);
}

}  // namespace impgap
