#include "impgap/process.hpp"

#include "csv_util.hpp"

#include <cmath>
#include <ostream>

namespace impgap {

ControlSequence ControlSequence::uniform(double S, const Eigen::VectorXd& w0, const Eigen::MatrixXd& w) {
  ControlSequence c;
  const auto n = w0.size();
  c.ds = Eigen::VectorXd::Constant(n, n ? S / static_cast<double>(n) : 0.0);
  c.w0 = w0;
  c.w = w;
  return c;
}

ControlSequence ExtendedProcess::controls() const {
  ControlSequence c;
  const int N = intervals();
  c.ds.resize(N);
  for (int k = 0; k < N; ++k) c.ds(k) = ds(k);
  c.w0 = w0;
  c.w = w;
  return c;
}

Eigen::MatrixXd ExtendedProcess::phi() const {
  const int N = intervals();
  Eigen::MatrixXd out(N + 1, m());
  Eigen::VectorXd init = phi_init.size() == m() ? phi_init : Eigen::VectorXd::Zero(m());
  out.row(0) = init.transpose();
  for (int k = 0; k < N; ++k) out.row(k + 1) = out.row(k) + ds(k) * w.row(k);
  return out;
}

Eigen::VectorXd ExtendedProcess::endpoint() const {
  const int n_ = n();
  const int N = intervals();
  Eigen::VectorXd z(2 + 2 * n_);
  z(0) = y0(0);
  z.segment(1, n_) = y.row(0).transpose();
  z(1 + n_) = y0(N);
  z.segment(2 + n_, n_) = y.row(N).transpose();
  return z;
}

double ExtendedProcess::s_identity_error() const {
  const int N = intervals();
  return std::abs((s(N) - s(0)) - (y0(N) - y0(0) + nu(N)));
}

double ExtendedProcess::canonical_error() const {
  double e = 0.0;
  for (int k = 0; k < intervals(); ++k) e = std::max(e, std::abs(w0(k) + w.row(k).norm() - 1.0));
  return e;
}

Eigen::VectorXd StrictProcess::endpoint() const {
  const int n_ = n();
  const int M = intervals();
  Eigen::VectorXd z(2 + 2 * n_);
  z(0) = t(0);
  z.segment(1, n_) = x.row(0).transpose();
  z(1 + n_) = t(M);
  z.segment(2 + n_, n_) = x.row(M).transpose();
  return z;
}

// ---------------------------------------------------------------- CSV

namespace {

int count_prefix(const std::vector<std::string>& header, const std::string& prefix) {
  int c = 0;
  for (const auto& h : header) {
    if (h.rfind(prefix, 0) == 0) ++c;
  }
  return c;
}

void expect(const std::vector<std::string>& header, std::size_t col, const std::string& name) {
  if (col >= header.size() || header[col] != name) {
    throw CsvError("header column " + std::to_string(col + 1) + " should be '" + name + "'");
  }
}

}  // namespace

void write_extended_csv(std::ostream& out, const ExtendedProcess& ep) {
  const int n = ep.n();
  const int m = ep.m();
  const int N = ep.intervals();
  out << "s,y0";
  for (int i = 1; i <= n; ++i) out << ",y_" << i;
  out << ",nu,w0";
  for (int j = 1; j <= m; ++j) out << ",w_" << j;
  out << "\n";
  for (int k = 0; k <= N; ++k) {
    out << csv::fmt(ep.s(k)) << ',' << csv::fmt(ep.y0(k));
    for (int i = 0; i < n; ++i) out << ',' << csv::fmt(ep.y(k, i));
    out << ',' << csv::fmt(ep.nu(k));
    if (k < N) {
      out << ',' << csv::fmt(ep.w0(k));
      for (int j = 0; j < m; ++j) out << ',' << csv::fmt(ep.w(k, j));
    } else {
      for (int j = 0; j <= m; ++j) out << ',';
    }
    out << "\n";
  }
}

ExtendedProcess read_extended_csv(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.size() < 2) throw CsvError("trajectory CSV needs a header and at least one row");
  const auto& h = rows[0];
  const int n = count_prefix(h, "y_");
  const int m = count_prefix(h, "w_");
  expect(h, 0, "s");
  expect(h, 1, "y0");
  for (int i = 0; i < n; ++i) expect(h, static_cast<std::size_t>(2 + i), "y_" + std::to_string(i + 1));
  expect(h, static_cast<std::size_t>(2 + n), "nu");
  expect(h, static_cast<std::size_t>(3 + n), "w0");
  for (int j = 0; j < m; ++j) expect(h, static_cast<std::size_t>(4 + n + j), "w_" + std::to_string(j + 1));
  const std::size_t cols = static_cast<std::size_t>(4 + n + m);
  if (h.size() != cols) throw CsvError("unexpected number of header columns");
  const int N = static_cast<int>(rows.size()) - 2;
  ExtendedProcess ep;
  ep.s.resize(N + 1);
  ep.y0.resize(N + 1);
  ep.y.resize(N + 1, n);
  ep.nu.resize(N + 1);
  ep.w0.resize(N);
  ep.w.resize(N, m);
  ep.phi_init = Eigen::VectorXd::Zero(m);
  try {
    for (int k = 0; k <= N; ++k) {
      const auto& r = rows[static_cast<std::size_t>(k + 1)];
      const std::size_t row = static_cast<std::size_t>(k + 2);
      if (r.size() != cols) throw CsvError("row " + std::to_string(row) + " has wrong column count");
      ep.s(k) = csv::number(r[0], row, 0);
      ep.y0(k) = csv::number(r[1], row, 1);
      for (int i = 0; i < n; ++i) ep.y(k, i) = csv::number(r[static_cast<std::size_t>(2 + i)], row, static_cast<std::size_t>(2 + i));
      ep.nu(k) = csv::number(r[static_cast<std::size_t>(2 + n)], row, static_cast<std::size_t>(2 + n));
      if (k < N) {
        ep.w0(k) = csv::number(r[static_cast<std::size_t>(3 + n)], row, static_cast<std::size_t>(3 + n));
        for (int j = 0; j < m; ++j) {
          ep.w(k, j) = csv::number(r[static_cast<std::size_t>(4 + n + j)], row, static_cast<std::size_t>(4 + n + j));
        }
      }
    }
  } catch (const std::runtime_error& e) {
    throw CsvError(e.what());
  }
  for (int k = 0; k < N; ++k) {
    if (!(ep.s(k + 1) > ep.s(k))) throw CsvError("s grid must be strictly increasing");
  }
  return ep;
}

void write_strict_csv(std::ostream& out, const StrictProcess& sp) {
  const int n = sp.n();
  const int m = sp.m();
  const int M = sp.intervals();
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  out << ",v";
  for (int j = 1; j <= m; ++j) out << ",du_" << j;
  out << "\n";
  for (int k = 0; k <= M; ++k) {
    out << csv::fmt(sp.t(k));
    for (int i = 0; i < n; ++i) out << ',' << csv::fmt(sp.x(k, i));
    out << ',' << csv::fmt(sp.v(k));
    for (int j = 0; j < m; ++j) {
      out << ',';
      if (k < M) out << csv::fmt(sp.du(k, j));
    }
    out << "\n";
  }
}

StrictProcess read_strict_csv(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.size() < 2) throw CsvError("trajectory CSV needs a header and at least one row");
  const auto& h = rows[0];
  const int n = count_prefix(h, "x_");
  const int m = count_prefix(h, "du_");
  expect(h, 0, "t");
  for (int i = 0; i < n; ++i) expect(h, static_cast<std::size_t>(1 + i), "x_" + std::to_string(i + 1));
  expect(h, static_cast<std::size_t>(1 + n), "v");
  for (int j = 0; j < m; ++j) expect(h, static_cast<std::size_t>(2 + n + j), "du_" + std::to_string(j + 1));
  const std::size_t cols = static_cast<std::size_t>(2 + n + m);
  const int M = static_cast<int>(rows.size()) - 2;
  StrictProcess sp;
  sp.t.resize(M + 1);
  sp.x.resize(M + 1, n);
  sp.v.resize(M + 1);
  sp.du.resize(M, m);
  try {
    for (int k = 0; k <= M; ++k) {
      const auto& r = rows[static_cast<std::size_t>(k + 1)];
      const std::size_t row = static_cast<std::size_t>(k + 2);
      if (r.size() != cols) throw CsvError("row " + std::to_string(row) + " has wrong column count");
      sp.t(k) = csv::number(r[0], row, 0);
      for (int i = 0; i < n; ++i) sp.x(k, i) = csv::number(r[static_cast<std::size_t>(1 + i)], row, static_cast<std::size_t>(1 + i));
      sp.v(k) = csv::number(r[static_cast<std::size_t>(1 + n)], row, static_cast<std::size_t>(1 + n));
      if (k < M) {
        for (int j = 0; j < m; ++j) {
          sp.du(k, j) = csv::number(r[static_cast<std::size_t>(2 + n + j)], row, static_cast<std::size_t>(2 + n + j));
        }
      }
    }
  } catch (const std::runtime_error& e) {
    throw CsvError(e.what());
  }
  sp.u = Eigen::MatrixXd::Zero(M + 1, m);
  for (int k = 0; k < M; ++k) sp.u.row(k + 1) = sp.u.row(k) + (sp.t(k + 1) - sp.t(k)) * sp.du.row(k);
  return sp;
}

}  // namespace impgap
