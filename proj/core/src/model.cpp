#include "impgap/model.hpp"

#include "impgap/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace impgap {

std::vector<std::string> VectorFieldSet::variable_names(int n) {
  std::vector<std::string> v{"t"};
  for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

bool VectorFieldSet::drift_free() const {
  return std::all_of(f.begin(), f.end(), [](const Expr& e) { return e.is_constant(0.0); });
}

std::vector<std::string> CostSpec::variable_names(int n) {
  std::vector<std::string> v{"t1"};
  for (int i = 1; i <= n; ++i) v.push_back("x1_" + std::to_string(i));
  v.push_back("t2");
  for (int i = 1; i <= n; ++i) v.push_back("x2_" + std::to_string(i));
  v.push_back("v");
  return v;
}

// ---------------------------------------------------------------- cone

ControlCone ControlCone::full(int m) {
  ControlCone c;
  c.kind_ = Kind::kFull;
  c.m_ = m;
  c.tags_.assign(static_cast<std::size_t>(m), SignTag::kFree);
  return c;
}

ControlCone ControlCone::orthant(std::vector<SignTag> tags) {
  ControlCone c;
  c.kind_ = Kind::kOrthant;
  c.m_ = static_cast<int>(tags.size());
  c.tags_ = std::move(tags);
  return c;
}

ControlCone ControlCone::generated(int m, std::vector<Eigen::VectorXd> generators) {
  if (generators.empty()) throw std::invalid_argument("generated cone needs at least one generator");
  ControlCone c;
  c.kind_ = Kind::kGenerated;
  c.m_ = m;
  for (auto& g : generators) {
    if (g.size() != m) throw std::invalid_argument("cone generator has wrong dimension");
    double nrm = g.norm();
    if (nrm == 0.0) throw std::invalid_argument("cone generator is zero");
    c.gens_.push_back(g / nrm);
  }
  return c;
}

namespace {

Eigen::VectorXd project_generated(const std::vector<Eigen::VectorXd>& gens, const Eigen::VectorXd& q) {
  const int k = static_cast<int>(gens.size());
  const int m = static_cast<int>(q.size());
  Eigen::VectorXd best = Eigen::VectorXd::Zero(m);
  double best_dist = q.norm();
  // Enumerate generator subsets of size <= m; the projection lies in the
  // relative interior of a face spanned by linearly independent generators.
  const unsigned limit = 1u << k;
  for (unsigned mask = 1; mask < limit; ++mask) {
    int sz = __builtin_popcount(mask);
    if (sz > m) continue;
    Eigen::MatrixXd g(m, sz);
    int col = 0;
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) g.col(col++) = gens[static_cast<std::size_t>(i)];
    }
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(g);
    if (qr.rank() < sz) continue;
    Eigen::VectorXd c = qr.solve(q);
    if (c.minCoeff() < -1e-12) continue;
    Eigen::VectorXd p = g * c.cwiseMax(0.0);
    double d = (q - p).norm();
    if (d < best_dist - 1e-15) {
      best_dist = d;
      best = p;
    }
  }
  return best;
}

}  // namespace

Eigen::VectorXd ControlCone::project(const Eigen::VectorXd& q) const {
  if (q.size() != m_) throw std::invalid_argument("project: dimension mismatch");
  switch (kind_) {
    case Kind::kFull:
      return q;
    case Kind::kOrthant: {
      Eigen::VectorXd r = q;
      for (int i = 0; i < m_; ++i) {
        switch (tags_[static_cast<std::size_t>(i)]) {
          case SignTag::kFree: break;
          case SignTag::kNonneg: r(i) = std::max(0.0, r(i)); break;
          case SignTag::kNonpos: r(i) = std::min(0.0, r(i)); break;
          case SignTag::kZero: r(i) = 0.0; break;
        }
      }
      return r;
    }
    case Kind::kGenerated:
      return project_generated(gens_, q);
  }
  return q;
}

bool ControlCone::contains(const Eigen::VectorXd& w, double tol) const {
  return (project(w) - w).norm() <= tol;
}

std::vector<Eigen::VectorXd> ControlCone::spanning_directions() const {
  std::vector<Eigen::VectorXd> out;
  if (kind_ == Kind::kGenerated) return gens_;
  for (int i = 0; i < m_; ++i) {
    SignTag tag = tags_[static_cast<std::size_t>(i)];
    Eigen::VectorXd e = Eigen::VectorXd::Unit(m_, i);
    if (tag == SignTag::kFree || tag == SignTag::kNonneg) out.push_back(e);
    if (tag == SignTag::kFree || tag == SignTag::kNonpos) out.push_back(-e);
  }
  return out;
}

Eigen::VectorXd project_cone(const ControlCone& c, const Eigen::VectorXd& q) { return c.project(q); }

// ---------------------------------------------------------------- target

TargetSpec::TargetSpec(int n_) : n(n_), bounds(static_cast<std::size_t>(2 + 2 * n_)) {}

namespace {

Eigen::VectorXd clamp_box(const std::vector<Bound>& b, Eigen::VectorXd z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Bound& bi = b[static_cast<std::size_t>(i)];
    z(i) = std::clamp(z(i), bi.lo, bi.hi);
  }
  return z;
}

}  // namespace

Eigen::VectorXd TargetSpec::project(const Eigen::VectorXd& z) const {
  if (halfspaces.empty()) return clamp_box(bounds, z);
  // Dykstra's alternating projections over the box and each halfspace.
  const std::size_t sets = 1 + halfspaces.size();
  std::vector<Eigen::VectorXd> inc(sets, Eigen::VectorXd::Zero(z.size()));
  Eigen::VectorXd x = z;
  for (int it = 0; it < 5000; ++it) {
    Eigen::VectorXd before = x;
    for (std::size_t s = 0; s < sets; ++s) {
      Eigen::VectorXd y = x + inc[s];
      Eigen::VectorXd px;
      if (s == 0) {
        px = clamp_box(bounds, y);
      } else {
        const Halfspace& h = halfspaces[s - 1];
        double viol = h.a.dot(y) - h.b;
        double aa = h.a.squaredNorm();
        px = (viol > 0.0 && aa > 0.0) ? Eigen::VectorXd(y - (viol / aa) * h.a) : y;
      }
      inc[s] = y - px;
      x = px;
    }
    if ((x - before).norm() <= 1e-15 * (1.0 + x.norm())) break;
  }
  return x;
}

double TargetSpec::distance(const Eigen::VectorXd& z) const { return (z - project(z)).norm(); }

double TargetSpec::violation(const Eigen::VectorXd& z) const {
  double v = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Bound& b = bounds[static_cast<std::size_t>(i)];
    v = std::max({v, b.lo - z(i), z(i) - b.hi});
  }
  for (const auto& h : halfspaces) v = std::max(v, h.a.dot(z) - h.b);
  return v;
}

// ---------------------------------------------------------------- validation

namespace {

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.op() == ExprOp::kVar) {
    out.insert(e.name());
    return;
  }
  for (std::size_t i = 0; i < e.arity(); ++i) collect_vars(e.child(i), out);
}

void check_vars(const Expr& e, const std::vector<std::string>& declared, const std::string& where,
                std::vector<std::string>& issues) {
  std::set<std::string> used;
  collect_vars(e, used);
  for (const auto& v : used) {
    if (std::find(declared.begin(), declared.end(), v) == declared.end()) {
      issues.push_back(where + " references undeclared variable '" + v + "'");
    }
  }
}

}  // namespace

ValidationReport validate(const ProblemSpec& p) {
  ValidationReport r;
  auto& is = r.issues;
  const int n = p.fields.n;
  const int m = p.fields.m;
  if (n <= 0) is.push_back("state dimension n must be positive");
  if (m <= 0) is.push_back("control dimension m must be positive");
  if (static_cast<int>(p.fields.f.size()) != n) {
    is.push_back("f has " + std::to_string(p.fields.f.size()) + " entries, expected n = " + std::to_string(n));
  }
  if (static_cast<int>(p.fields.g.size()) != m) {
    is.push_back("g has " + std::to_string(p.fields.g.size()) + " columns, expected m = " + std::to_string(m));
  }
  for (std::size_t j = 0; j < p.fields.g.size(); ++j) {
    if (static_cast<int>(p.fields.g[j].size()) != n) {
      is.push_back("g column " + std::to_string(j + 1) + " has " + std::to_string(p.fields.g[j].size()) +
                   " entries, expected n = " + std::to_string(n));
    }
  }
  if (p.cone.dim() != m) {
    is.push_back("cone dimension " + std::to_string(p.cone.dim()) + " differs from m = " + std::to_string(m));
  }
  if (p.cone.kind() == ControlCone::Kind::kGenerated && m > 6) {
    is.push_back("generated cone with m > 6 is not supported");
  }
  if (p.cone.kind() == ControlCone::Kind::kGenerated && p.cone.generators().size() > 16) {
    is.push_back("generated cone with more than 16 generators is not supported");
  }
  if (!(p.K > 0.0)) is.push_back("K must be positive");

  const auto fvars = VectorFieldSet::variable_names(n);
  for (std::size_t i = 0; i < p.fields.f.size(); ++i) check_vars(p.fields.f[i], fvars, "f" + std::to_string(i + 1), is);
  for (std::size_t j = 0; j < p.fields.g.size(); ++j) {
    for (std::size_t i = 0; i < p.fields.g[j].size(); ++i) {
      check_vars(p.fields.g[j][i], fvars, "g" + std::to_string(j + 1) + "[" + std::to_string(i + 1) + "]", is);
    }
  }
  const auto hvars = CostSpec::variable_names(n);
  check_vars(p.cost.h, hvars, "h", is);

  // Target.
  const TargetSpec& t = p.target;
  bool target_shape_ok = t.n == n && static_cast<int>(t.bounds.size()) == 2 + 2 * n;
  if (!target_shape_ok) is.push_back("target dimension does not match n");
  bool box_ok = true;
  for (std::size_t i = 0; i < t.bounds.size(); ++i) {
    if (std::isnan(t.bounds[i].lo) || std::isnan(t.bounds[i].hi) || t.bounds[i].lo > t.bounds[i].hi) {
      is.push_back("target bound " + std::to_string(i) + " has lo > hi (empty target)");
      box_ok = false;
    }
  }
  for (std::size_t k = 0; k < t.halfspaces.size(); ++k) {
    if (t.halfspaces[k].a.size() != t.dim()) {
      is.push_back("halfspace " + std::to_string(k + 1) + " has wrong dimension");
      target_shape_ok = false;
    }
  }
  if (target_shape_ok && box_ok && !t.halfspaces.empty()) {
    LinearProgram lp(t.dim());
    for (int i = 0; i < t.dim(); ++i) {
      lp.lower(i) = t.bounds[static_cast<std::size_t>(i)].lo;
      lp.upper(i) = t.bounds[static_cast<std::size_t>(i)].hi;
    }
    for (const auto& h : t.halfspaces) lp.add_ub(h.a.transpose(), h.b);
    if (solve_lp(lp).status == LpStatus::kInfeasible) is.push_back("target is empty (halfspaces incompatible with bounds)");
  }

  // Sampled monotonicity of h in v.
  if (n > 0 && is.empty()) {
    Expr dh = differentiate(p.cost.h, "v");
    if (!dh.is_constant(0.0)) {
      CompiledExpr c(dh, hvars);
      std::mt19937_64 rng(20240611);
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      double vmax = std::isfinite(p.K) ? p.K : 2.0;
      std::uniform_real_distribution<double> uv(0.0, vmax);
      std::vector<double> x(hvars.size());
      int bad = 0;
      double worst = 0.0;
      for (int s = 0; s < 64; ++s) {
        for (std::size_t i = 0; i + 1 < x.size(); ++i) x[i] = u(rng);
        x.back() = uv(rng);
        try {
          double d = c(x);
          if (d < -1e-12) {
            ++bad;
            worst = std::min(worst, d);
          }
        } catch (const DomainError&) {
        }
      }
      if (bad > 0) {
        std::ostringstream os;
        os << "h is not monotone non-decreasing in v: dh/dv < 0 at " << bad << " of 64 samples (min " << worst << ")";
        is.push_back(os.str());
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------- normal cone

NormalConeGenerators normal_cone_generators(const TargetSpec& t, const Eigen::VectorXd& z, double tol) {
  if (z.size() != t.dim()) throw std::invalid_argument("normal_cone_generators: dimension mismatch");
  double d = t.distance(z);
  if (d > tol) {
    std::ostringstream os;
    os << "point is not within " << tol << " of the target (distance " << d << ")";
    throw NotOnTargetError(os.str());
  }
  NormalConeGenerators out;
  const int dim = t.dim();
  for (int i = 0; i < dim; ++i) {
    const Bound& b = t.bounds[static_cast<std::size_t>(i)];
    Eigen::VectorXd e = Eigen::VectorXd::Unit(dim, i);
    if (b.is_fixed()) {
      out.lineality.push_back({e});
      continue;
    }
    if (std::isfinite(b.lo) && std::abs(z(i) - b.lo) <= tol) out.rays.push_back({-e});
    if (std::isfinite(b.hi) && std::abs(z(i) - b.hi) <= tol) out.rays.push_back({e});
  }
  for (const auto& h : t.halfspaces) {
    if (std::abs(h.a.dot(z) - h.b) <= tol) out.rays.push_back({h.a});
  }
  return out;
}

}  // namespace impgap
