#include "impgap/problem_io.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace impgap {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg) {
  std::ostringstream os;
  if (node.IsDefined() && node.Mark().line >= 0) os << "line " << node.Mark().line + 1 << ": ";
  os << msg;
  throw ProblemFormatError(os.str());
}

YAML::Node require(const YAML::Node& parent, const char* key) {
  YAML::Node n = parent[key];
  if (!n) fail(parent, std::string("missing key '") + key + "'");
  return n;
}

double as_real(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be a number");
  const std::string s = n.Scalar();
  if (s == "inf" || s == "+inf" || s == ".inf") return kInf;
  if (s == "-inf" || s == "-.inf") return -kInf;
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    fail(n, what + " must be a number, got '" + s + "'");
  }
}

int as_int(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    fail(n, what + " must be an integer");
  }
}

Expr as_expr(const YAML::Node& n, const std::vector<std::string>& vars, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be an expression string");
  try {
    return parse(n.Scalar(), vars);
  } catch (const ParseError& e) {
    fail(n, what + ": " + e.what());
  } catch (const UndeclaredVariableError& e) {
    fail(n, what + ": undeclared variable '" + e.name() + "'");
  }
}

Bound as_bound(const YAML::Node& n, const std::string& what) {
  if (n.IsScalar()) {
    if (n.Scalar() == "free") return Bound::free();
    return Bound::fixed(as_real(n, what));
  }
  if (!n.IsMap()) fail(n, what + " must be 'free' or a map with fixed/lo/hi");
  if (n["fixed"]) return Bound::fixed(as_real(n["fixed"], what + ".fixed"));
  Bound b;
  if (n["lo"]) b.lo = as_real(n["lo"], what + ".lo");
  if (n["hi"]) b.hi = as_real(n["hi"], what + ".hi");
  for (auto it = n.begin(); it != n.end(); ++it) {
    std::string k = it->first.as<std::string>();
    if (k != "lo" && k != "hi") fail(n, what + ": unknown key '" + k + "'");
  }
  return b;
}

std::vector<Expr> expr_list(const YAML::Node& n, int expected, const std::vector<std::string>& vars,
                            const std::string& what) {
  if (!n.IsSequence()) fail(n, what + " must be a list");
  if (static_cast<int>(n.size()) != expected) {
    fail(n, what + " has " + std::to_string(n.size()) + " entries, expected " + std::to_string(expected));
  }
  std::vector<Expr> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(as_expr(n[i], vars, what + "[" + std::to_string(i + 1) + "]"));
  return out;
}

ControlCone as_cone(const YAML::Node& n, int m) {
  if (!n.IsMap()) fail(n, "cone must be a map");
  std::string kind = require(n, "kind").as<std::string>();
  if (kind == "full") return ControlCone::full(m);
  if (kind == "orthant") {
    YAML::Node tags = require(n, "tags");
    if (!tags.IsSequence() || static_cast<int>(tags.size()) != m) fail(tags, "cone.tags must list m tags");
    std::vector<SignTag> out;
    for (const auto& t : tags) {
      std::string s = t.as<std::string>();
      if (s == "free") out.push_back(SignTag::kFree);
      else if (s == "nonneg") out.push_back(SignTag::kNonneg);
      else if (s == "nonpos") out.push_back(SignTag::kNonpos);
      else if (s == "zero") out.push_back(SignTag::kZero);
      else fail(t, "unknown cone tag '" + s + "'");
    }
    return ControlCone::orthant(std::move(out));
  }
  if (kind == "generated") {
    YAML::Node gens = require(n, "generators");
    if (!gens.IsSequence() || gens.size() == 0) fail(gens, "cone.generators must be a non-empty list");
    std::vector<Eigen::VectorXd> out;
    for (const auto& g : gens) {
      if (!g.IsSequence() || static_cast<int>(g.size()) != m) fail(g, "each generator must have m entries");
      Eigen::VectorXd v(m);
      for (int i = 0; i < m; ++i) v(i) = as_real(g[static_cast<std::size_t>(i)], "generator entry");
      if (v.norm() == 0.0) fail(g, "generator is zero");
      out.push_back(v);
    }
    return ControlCone::generated(m, std::move(out));
  }
  fail(n, "unknown cone kind '" + kind + "'");
}

TargetSpec as_target(const YAML::Node& n, int nstate) {
  TargetSpec t(nstate);
  if (!n.IsMap()) fail(n, "target must be a map");
  auto vec = [&](const char* key, int offset) {
    YAML::Node v = n[key];
    if (!v) return;
    if (!v.IsSequence() || static_cast<int>(v.size()) != nstate) {
      fail(v, std::string("target.") + key + " must list n bounds");
    }
    for (int i = 0; i < nstate; ++i) {
      t.bounds[static_cast<std::size_t>(offset + i)] =
          as_bound(v[static_cast<std::size_t>(i)], std::string("target.") + key + "[" + std::to_string(i + 1) + "]");
    }
  };
  if (n["t1"]) t.bounds[0] = as_bound(n["t1"], "target.t1");
  vec("x1", 1);
  if (n["t2"]) t.bounds[static_cast<std::size_t>(t.t2_index())] = as_bound(n["t2"], "target.t2");
  vec("x2", 2 + nstate);
  if (YAML::Node hs = n["halfspaces"]) {
    if (!hs.IsSequence()) fail(hs, "target.halfspaces must be a list");
    for (const auto& h : hs) {
      YAML::Node a = require(h, "a");
      if (!a.IsSequence() || static_cast<int>(a.size()) != t.dim()) fail(a, "halfspace a must have 2+2n entries");
      Halfspace half;
      half.a.resize(t.dim());
      for (int i = 0; i < t.dim(); ++i) half.a(i) = as_real(a[static_cast<std::size_t>(i)], "halfspace entry");
      half.b = as_real(require(h, "b"), "halfspace b");
      t.halfspaces.push_back(std::move(half));
    }
  }
  if (YAML::Node e = n["epigraph"]) t.epigraph_declared = e.as<bool>();
  return t;
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void emit_bound(YAML::Emitter& out, const Bound& b) {
  if (b.is_free()) {
    out << "free";
    return;
  }
  out << YAML::Flow << YAML::BeginMap;
  if (b.is_fixed()) {
    out << YAML::Key << "fixed" << YAML::Value << num(b.lo);
  } else {
    if (std::isfinite(b.lo)) out << YAML::Key << "lo" << YAML::Value << num(b.lo);
    if (std::isfinite(b.hi)) out << YAML::Key << "hi" << YAML::Value << num(b.hi);
  }
  out << YAML::EndMap;
}

}  // namespace

ProblemSpec parse_problem(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ProblemFormatError(std::string("YAML syntax error: ") + e.what());
  }
  if (!root.IsMap()) throw ProblemFormatError("problem file must be a YAML map");
  ProblemSpec p;
  try {
    if (root["name"]) p.name = root["name"].as<std::string>();
    p.fields.n = as_int(require(root, "n"), "n");
    p.fields.m = as_int(require(root, "m"), "m");
    if (p.fields.n <= 0 || p.fields.m <= 0) fail(root, "n and m must be positive");
    const auto fvars = VectorFieldSet::variable_names(p.fields.n);
    p.fields.f = expr_list(require(root, "f"), p.fields.n, fvars, "f");
    YAML::Node g = require(root, "g");
    if (!g.IsSequence() || static_cast<int>(g.size()) != p.fields.m) fail(g, "g must list m columns");
    for (int j = 0; j < p.fields.m; ++j) {
      p.fields.g.push_back(expr_list(g[static_cast<std::size_t>(j)], p.fields.n, fvars, "g" + std::to_string(j + 1)));
    }
    p.cone = as_cone(require(root, "cone"), p.fields.m);
    p.K = as_real(require(root, "K"), "K");
    p.cost.h = as_expr(require(root, "cost"), CostSpec::variable_names(p.fields.n), "cost");
    p.target = as_target(require(root, "target"), p.fields.n);
  } catch (const YAML::Exception& e) {
    throw ProblemFormatError(std::string("malformed problem: ") + e.what());
  }
  return p;
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemFormatError("cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

std::string dump_problem(const ProblemSpec& p) {
  YAML::Emitter out;
  const int n = p.n();
  out << YAML::BeginMap;
  if (!p.name.empty()) out << YAML::Key << "name" << YAML::Value << p.name;
  out << YAML::Key << "n" << YAML::Value << n;
  out << YAML::Key << "m" << YAML::Value << p.m();
  out << YAML::Key << "f" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& e : p.fields.f) out << YAML::DoubleQuoted << e.str();
  out << YAML::EndSeq;
  out << YAML::Key << "g" << YAML::Value << YAML::BeginSeq;
  for (const auto& col : p.fields.g) {
    out << YAML::Flow << YAML::BeginSeq;
    for (const auto& e : col) out << YAML::DoubleQuoted << e.str();
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "cone" << YAML::Value << YAML::Flow << YAML::BeginMap;
  switch (p.cone.kind()) {
    case ControlCone::Kind::kFull:
      out << YAML::Key << "kind" << YAML::Value << "full";
      break;
    case ControlCone::Kind::kOrthant: {
      out << YAML::Key << "kind" << YAML::Value << "orthant";
      out << YAML::Key << "tags" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (SignTag t : p.cone.tags()) {
        out << (t == SignTag::kFree ? "free" : t == SignTag::kNonneg ? "nonneg" : t == SignTag::kNonpos ? "nonpos" : "zero");
      }
      out << YAML::EndSeq;
      break;
    }
    case ControlCone::Kind::kGenerated:
      out << YAML::Key << "kind" << YAML::Value << "generated";
      out << YAML::Key << "generators" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& gv : p.cone.generators()) {
        out << YAML::Flow << YAML::BeginSeq;
        for (Eigen::Index i = 0; i < gv.size(); ++i) out << num(gv(i));
        out << YAML::EndSeq;
      }
      out << YAML::EndSeq;
      break;
  }
  out << YAML::EndMap;
  out << YAML::Key << "K" << YAML::Value << num(p.K);
  out << YAML::Key << "cost" << YAML::Value << YAML::DoubleQuoted << p.cost.h.str();
  const TargetSpec& t = p.target;
  out << YAML::Key << "target" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "t1" << YAML::Value;
  emit_bound(out, t.bounds[0]);
  out << YAML::Key << "x1" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < n; ++i) emit_bound(out, t.bounds[static_cast<std::size_t>(t.x1_index(i))]);
  out << YAML::EndSeq;
  out << YAML::Key << "t2" << YAML::Value;
  emit_bound(out, t.bounds[static_cast<std::size_t>(t.t2_index())]);
  out << YAML::Key << "x2" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < n; ++i) emit_bound(out, t.bounds[static_cast<std::size_t>(t.x2_index(i))]);
  out << YAML::EndSeq;
  if (!t.halfspaces.empty()) {
    out << YAML::Key << "halfspaces" << YAML::Value << YAML::BeginSeq;
    for (const auto& h : t.halfspaces) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "a" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (Eigen::Index i = 0; i < h.a.size(); ++i) out << num(h.a(i));
      out << YAML::EndSeq << YAML::Key << "b" << YAML::Value << num(h.b) << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::Key << "epigraph" << YAML::Value << t.epigraph_declared;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace impgap
