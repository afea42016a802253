#include "impgap/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace impgap {

ParseError::ParseError(std::size_t position, const std::string& message)
    : ExprError("parse error at " + std::to_string(position) + ": " + message), position_(position) {}

UndeclaredVariableError::UndeclaredVariableError(std::string name)
    : ExprError("undeclared variable '" + name + "'"), name_(std::move(name)) {}

DomainError::DomainError(const std::string& what, std::string node)
    : ExprError(what + " in '" + node + "'"), node_(std::move(node)) {}

struct Expr::Node {
  ExprOp op = ExprOp::kConst;
  double value = 0.0;
  int exponent = 0;
  std::string name;
  std::vector<Expr> children;
};

namespace {

double ipow(double x, int k) {
  if (k < 0) return 1.0 / ipow(x, -k);
  double r = 1.0;
  double b = x;
  while (k > 0) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}

const char* func_name(ExprOp op) {
  switch (op) {
    case ExprOp::kSin: return "sin";
    case ExprOp::kCos: return "cos";
    case ExprOp::kExp: return "exp";
    case ExprOp::kLog: return "log";
    case ExprOp::kAbs: return "abs";
    case ExprOp::kSign: return "sgn";
    default: return nullptr;
  }
}

// Shared arithmetic kernels; both evaluators go through these so that results
// are identical.
inline double apply_unary(ExprOp op, double a, bool& domain_fail) {
  switch (op) {
    case ExprOp::kNeg: return -a;
    case ExprOp::kSin: return std::sin(a);
    case ExprOp::kCos: return std::cos(a);
    case ExprOp::kExp: return std::exp(a);
    case ExprOp::kLog:
      if (!(a > 0.0)) domain_fail = true;
      return std::log(a);
    case ExprOp::kAbs: return std::fabs(a);
    case ExprOp::kSign:
      if (a == 0.0) domain_fail = true;
      return a > 0.0 ? 1.0 : -1.0;
    default: return a;
  }
}

inline double apply_binary(ExprOp op, double a, double b, bool& domain_fail) {
  switch (op) {
    case ExprOp::kAdd: return a + b;
    case ExprOp::kSub: return a - b;
    case ExprOp::kMul: return a * b;
    case ExprOp::kDiv:
      if (b == 0.0) domain_fail = true;
      return a / b;
    default: return 0.0;
  }
}

const char* domain_message(ExprOp op) {
  switch (op) {
    case ExprOp::kDiv: return "division by zero";
    case ExprOp::kLog: return "log of non-positive argument";
    case ExprOp::kSign: return "abs is not differentiable at 0";
    case ExprOp::kPow: return "zero raised to a negative power";
    default: return "domain error";
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (v < 0) return "(" + s + ")";
  return s;
}

}  // namespace

Expr::Expr() : node_(std::make_shared<Node>()) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = ExprOp::kConst;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = ExprOp::kVar;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::unary(ExprOp op, Expr arg) {
  if (arg.is_constant()) {
    bool fail = false;
    double v = apply_unary(op, arg.value(), fail);
    if (!fail) return constant(v);
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->children.push_back(std::move(arg));
  return Expr(std::move(n));
}

Expr Expr::binary(ExprOp op, Expr lhs, Expr rhs) {
  if (lhs.is_constant() && rhs.is_constant()) {
    bool fail = false;
    double v = apply_binary(op, lhs.value(), rhs.value(), fail);
    if (!fail) return constant(v);
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
  if (base.is_constant() && !(base.value() == 0.0 && exponent < 0)) {
    return constant(ipow(base.value(), exponent));
  }
  auto n = std::make_shared<Node>();
  n->op = ExprOp::kPow;
  n->exponent = exponent;
  n->children.push_back(std::move(base));
  return Expr(std::move(n));
}

ExprOp Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
int Expr::exponent() const { return node_->exponent; }
std::size_t Expr::arity() const { return node_->children.size(); }
const Expr& Expr::child(std::size_t i) const { return node_->children.at(i); }

std::string Expr::str() const {
  switch (op()) {
    case ExprOp::kConst: return format_number(value());
    case ExprOp::kVar: return name();
    case ExprOp::kNeg: return "(-" + child(0).str() + ")";
    case ExprOp::kAdd: return "(" + child(0).str() + " + " + child(1).str() + ")";
    case ExprOp::kSub: return "(" + child(0).str() + " - " + child(1).str() + ")";
    case ExprOp::kMul: return "(" + child(0).str() + " * " + child(1).str() + ")";
    case ExprOp::kDiv: return "(" + child(0).str() + " / " + child(1).str() + ")";
    case ExprOp::kPow: return "(" + child(0).str() + "^" + std::to_string(exponent()) + ")";
    default: return std::string(func_name(op())) + "(" + child(0).str() + ")";
  }
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(ExprOp::kAdd, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(ExprOp::kSub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(ExprOp::kMul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(ExprOp::kDiv, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(ExprOp::kNeg, a); }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view src, std::span<const std::string> vars) : src_(src), vars_(vars) {}

  Expr run() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "empty expression");
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) throw ParseError(pos_, std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(pos_, std::string("expected '") + c + "'");
    }
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_term();
      } else if (accept('-')) {
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    while (accept('^')) {
      skip_ws();
      int sign = 1;
      if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) {
        if (src_[pos_] == '-') sign = -1;
        ++pos_;
      }
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) throw ParseError(start, "exponent must be an integer literal");
      if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E')) {
        throw ParseError(pos_, "exponent must be an integer literal");
      }
      int k = 0;
      auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, k);
      if (ec != std::errc()) throw ParseError(start, "exponent out of range");
      base = Expr::power(base, sign * k);
    }
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    throw ParseError(pos_, std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t d = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - d;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw ParseError(start, "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t epos = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError(epos, "malformed exponent");
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_) throw ParseError(start, "malformed number");
    return Expr::constant(v);
  }

  Expr parse_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(src_.substr(start, pos_ - start));
    static constexpr std::pair<const char*, ExprOp> kFuncs[] = {
        {"sin", ExprOp::kSin}, {"cos", ExprOp::kCos}, {"exp", ExprOp::kExp},
        {"log", ExprOp::kLog}, {"abs", ExprOp::kAbs}, {"sgn", ExprOp::kSign},
    };
    for (const auto& [fname, op] : kFuncs) {
      if (name == fname) {
        expect('(');
        Expr arg = parse_expr();
        expect(')');
        return Expr::unary(op, std::move(arg));
      }
    }
    for (const auto& v : vars_) {
      if (v == name) return Expr::variable(name);
    }
    throw UndeclaredVariableError(name);
  }

  std::string_view src_;
  std::span<const std::string> vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view source, std::span<const std::string> declared_vars) {
  return Parser(source, declared_vars).run();
}

// ---------------------------------------------------------------------------
// Evaluation

double eval(const Expr& e, const Env& env) {
  bool fail = false;
  double r = 0.0;
  switch (e.op()) {
    case ExprOp::kConst: return e.value();
    case ExprOp::kVar: {
      auto it = env.find(e.name());
      if (it == env.end()) throw ExprError("unbound variable '" + e.name() + "'");
      return it->second;
    }
    case ExprOp::kPow: {
      double b = eval(e.child(0), env);
      if (b == 0.0 && e.exponent() < 0) throw DomainError(domain_message(ExprOp::kPow), e.str());
      return ipow(b, e.exponent());
    }
    case ExprOp::kAdd:
    case ExprOp::kSub:
    case ExprOp::kMul:
    case ExprOp::kDiv: {
      double a = eval(e.child(0), env);
      double b = eval(e.child(1), env);
      r = apply_binary(e.op(), a, b, fail);
      break;
    }
    default:
      r = apply_unary(e.op(), eval(e.child(0), env), fail);
      break;
  }
  if (fail) throw DomainError(domain_message(e.op()), e.str());
  return r;
}

// ---------------------------------------------------------------------------
// Differentiation

Expr differentiate(const Expr& e, std::string_view var) {
  switch (e.op()) {
    case ExprOp::kConst: return Expr::constant(0.0);
    case ExprOp::kVar: return Expr::constant(e.name() == var ? 1.0 : 0.0);
    case ExprOp::kNeg: {
      Expr d = differentiate(e.child(0), var);
      return d.is_constant(0.0) ? d : -d;
    }
    case ExprOp::kAdd:
    case ExprOp::kSub: {
      Expr da = differentiate(e.child(0), var);
      Expr db = differentiate(e.child(1), var);
      if (db.is_constant(0.0)) return da;
      if (da.is_constant(0.0)) return e.op() == ExprOp::kAdd ? db : -db;
      return e.op() == ExprOp::kAdd ? da + db : da - db;
    }
    case ExprOp::kMul: {
      const Expr& a = e.child(0);
      const Expr& b = e.child(1);
      Expr da = differentiate(a, var);
      Expr db = differentiate(b, var);
      bool za = da.is_constant(0.0);
      bool zb = db.is_constant(0.0);
      if (za && zb) return Expr::constant(0.0);
      if (za) return db.is_constant(1.0) ? a : a * db;
      if (zb) return da.is_constant(1.0) ? b : da * b;
      return da * b + a * db;
    }
    case ExprOp::kDiv: {
      const Expr& a = e.child(0);
      const Expr& b = e.child(1);
      Expr da = differentiate(a, var);
      Expr db = differentiate(b, var);
      bool za = da.is_constant(0.0);
      bool zb = db.is_constant(0.0);
      if (za && zb) return Expr::constant(0.0);
      if (zb) return da / b;
      Expr tail = a * db / Expr::power(b, 2);
      if (za) return -tail;
      return da / b - tail;
    }
    case ExprOp::kPow: {
      const Expr& a = e.child(0);
      int k = e.exponent();
      Expr da = differentiate(a, var);
      if (da.is_constant(0.0) || k == 0) return Expr::constant(0.0);
      Expr outer = (k == 1) ? Expr::constant(1.0) : Expr::constant(k) * Expr::power(a, k - 1);
      return da.is_constant(1.0) ? outer : outer * da;
    }
    default: break;
  }
  const Expr& a = e.child(0);
  Expr da = differentiate(a, var);
  if (da.is_constant(0.0)) return Expr::constant(0.0);
  Expr outer;
  switch (e.op()) {
    case ExprOp::kSin: outer = Expr::unary(ExprOp::kCos, a); break;
    case ExprOp::kCos: outer = -Expr::unary(ExprOp::kSin, a); break;
    case ExprOp::kExp: outer = e; break;
    case ExprOp::kLog: outer = Expr::constant(1.0) / a; break;
    case ExprOp::kAbs: outer = Expr::unary(ExprOp::kSign, a); break;
    case ExprOp::kSign:
      // d sgn / dx is 0 away from the origin; sgn(a) * 0 keeps the domain error at 0.
      return Expr::binary(ExprOp::kMul, e, Expr::constant(0.0));
    default: break;
  }
  return da.is_constant(1.0) ? outer : outer * da;
}

bool depends_on(const Expr& e, std::string_view var) {
  if (e.op() == ExprOp::kVar) return e.name() == var;
  for (std::size_t i = 0; i < e.arity(); ++i) {
    if (depends_on(e.child(i), var)) return true;
  }
  return false;
}

bool is_structurally_zero(const Expr& e) {
  switch (e.op()) {
    case ExprOp::kConst: return e.value() == 0.0;
    case ExprOp::kNeg: return is_structurally_zero(e.child(0));
    case ExprOp::kAdd:
    case ExprOp::kSub: return is_structurally_zero(e.child(0)) && is_structurally_zero(e.child(1));
    case ExprOp::kMul: return is_structurally_zero(e.child(0)) || is_structurally_zero(e.child(1));
    case ExprOp::kDiv: return is_structurally_zero(e.child(0));
    case ExprOp::kPow: return e.exponent() > 0 && is_structurally_zero(e.child(0));
    case ExprOp::kSin: return is_structurally_zero(e.child(0));
    case ExprOp::kAbs: return is_structurally_zero(e.child(0));
    default: return false;
  }
}

// ---------------------------------------------------------------------------
// Compiled form

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> slots) { emit(e, slots, 1); }

void CompiledExpr::emit(const Expr& e, std::span<const std::string> slots, int depth) {
  max_depth_ = std::max(max_depth_, depth);
  switch (e.op()) {
    case ExprOp::kConst:
      code_.push_back({ExprOp::kConst, 0, e.value()});
      return;
    case ExprOp::kVar: {
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i] == e.name()) {
          code_.push_back({ExprOp::kVar, static_cast<std::int32_t>(i), 0.0});
          return;
        }
      }
      throw UndeclaredVariableError(e.name());
    }
    case ExprOp::kAdd:
    case ExprOp::kSub:
    case ExprOp::kMul:
    case ExprOp::kDiv:
      emit(e.child(0), slots, depth);
      emit(e.child(1), slots, depth + 1);
      break;
    default:
      emit(e.child(0), slots, depth);
      break;
  }
  std::int32_t arg = 0;
  if (e.op() == ExprOp::kPow) {
    arg = e.exponent();
  }
  if (e.op() == ExprOp::kDiv || e.op() == ExprOp::kLog || e.op() == ExprOp::kSign ||
      e.op() == ExprOp::kPow) {
    labels_.push_back(e.str());
    code_.push_back({e.op(), arg, static_cast<double>(labels_.size() - 1)});
    return;
  }
  code_.push_back({e.op(), arg, 0.0});
}

void CompiledExpr::fail(const Instr& in, const char* what) const {
  throw DomainError(what, labels_.at(static_cast<std::size_t>(in.value)));
}

double CompiledExpr::operator()(std::span<const double> values) const {
  if (code_.size() == 1) {
    if (code_[0].op == ExprOp::kConst) return code_[0].value;
    if (code_[0].op == ExprOp::kVar) return values[static_cast<std::size_t>(code_[0].arg)];
  }
  constexpr int kInline = 64;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* st = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(static_cast<std::size_t>(max_depth_));
    st = heap.data();
  }
  int top = -1;
  for (const Instr& in : code_) {
    bool bad = false;
    switch (in.op) {
      case ExprOp::kConst: st[++top] = in.value; break;
      case ExprOp::kVar: st[++top] = values[static_cast<std::size_t>(in.arg)]; break;
      case ExprOp::kAdd:
      case ExprOp::kSub:
      case ExprOp::kMul:
      case ExprOp::kDiv: {
        double b = st[top--];
        st[top] = apply_binary(in.op, st[top], b, bad);
        if (bad) fail(in, domain_message(in.op));
        break;
      }
      case ExprOp::kPow:
        if (st[top] == 0.0 && in.arg < 0) fail(in, domain_message(in.op));
        st[top] = ipow(st[top], in.arg);
        break;
      default:
        st[top] = apply_unary(in.op, st[top], bad);
        if (bad) fail(in, domain_message(in.op));
        break;
    }
  }
  return top >= 0 ? st[top] : 0.0;
}

}  // namespace impgap
