#pragma once

// Problem data: vector fields, control cone, target set, cost, variation bound.

#include "impgap/expr.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace impgap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// f(t,x) and the columns g_j(t,x), all written in the variables t, x1..xn.
struct VectorFieldSet {
  int n = 0;
  int m = 0;
  std::vector<Expr> f;               // n entries
  std::vector<std::vector<Expr>> g;  // m columns of n entries

  static std::vector<std::string> variable_names(int n);
  bool drift_free() const;  // every f entry is the constant 0
};

enum class SignTag { kFree, kNonneg, kNonpos, kZero };

class ControlCone {
 public:
  enum class Kind { kFull, kOrthant, kGenerated };

  ControlCone() = default;
  static ControlCone full(int m);
  static ControlCone orthant(std::vector<SignTag> tags);
  /// Generators are rescaled to unit length; zero vectors are rejected.
  static ControlCone generated(int m, std::vector<Eigen::VectorXd> generators);

  Kind kind() const { return kind_; }
  int dim() const { return m_; }
  const std::vector<SignTag>& tags() const { return tags_; }
  const std::vector<Eigen::VectorXd>& generators() const { return gens_; }

  Eigen::VectorXd project(const Eigen::VectorXd& q) const;
  bool contains(const Eigen::VectorXd& w, double tol) const;

  /// Unit directions whose conic hull (plus negatives for free axes) is C:
  /// ±e_i for full, tag-respecting axes for orthants, generators otherwise.
  std::vector<Eigen::VectorXd> spanning_directions() const;

 private:
  Kind kind_ = Kind::kFull;
  int m_ = 0;
  std::vector<SignTag> tags_;
  std::vector<Eigen::VectorXd> gens_;
};

Eigen::VectorXd project_cone(const ControlCone& c, const Eigen::VectorXd& q);

struct Bound {
  double lo = -kInf;
  double hi = kInf;

  static Bound free() { return {}; }
  static Bound fixed(double v) { return {v, v}; }
  static Bound interval(double lo, double hi) { return {lo, hi}; }
  bool is_free() const { return lo == -kInf && hi == kInf; }
  bool is_fixed() const { return lo == hi; }
};

struct Halfspace {
  Eigen::VectorXd a;  // over z = (t1, x1, t2, x2)
  double b = 0.0;
};

/// Endpoint set T as a box over z = (t1, x1[n], t2, x2[n]) intersected with
/// halfspaces a.z <= b.
struct TargetSpec {
  int n = 0;
  std::vector<Bound> bounds;  // size 2 + 2n
  std::vector<Halfspace> halfspaces;
  bool epigraph_declared = false;

  explicit TargetSpec(int n = 0);
  int dim() const { return 2 + 2 * n; }
  static int t1_index() { return 0; }
  int x1_index(int i) const { return 1 + i; }
  int t2_index() const { return 1 + n; }
  int x2_index(int i) const { return 2 + n + i; }

  Eigen::VectorXd project(const Eigen::VectorXd& z) const;
  double distance(const Eigen::VectorXd& z) const;
  /// Largest single constraint violation (0 inside T).
  double violation(const Eigen::VectorXd& z) const;
};

/// h(t1, x1_1..x1_n, t2, x2_1..x2_n, v).
struct CostSpec {
  Expr h;
  static std::vector<std::string> variable_names(int n);
};

struct ProblemSpec {
  std::string name;
  VectorFieldSet fields;
  ControlCone cone;
  TargetSpec target;
  CostSpec cost;
  double K = kInf;

  int n() const { return fields.n; }
  int m() const { return fields.m; }
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

ValidationReport validate(const ProblemSpec& p);

/// Endpoint covector (zeta_t1, zeta_x1, zeta_t2, zeta_x2) stored flat like z.
struct NormalCovector {
  Eigen::VectorXd z;

  double t1() const { return z(0); }
  Eigen::VectorXd x1(int n) const { return z.segment(1, n); }
  double t2(int n) const { return z(1 + n); }
  Eigen::VectorXd x2(int n) const { return z.segment(2 + n, n); }
};

/// N_T(z) = cone(rays) + span(lineality).
struct NormalConeGenerators {
  std::vector<NormalCovector> rays;
  std::vector<NormalCovector> lineality;
};

class NotOnTargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

NormalConeGenerators normal_cone_generators(const TargetSpec& t, const Eigen::VectorXd& z,
                                            double tol = 1e-7);

}  // namespace impgap
