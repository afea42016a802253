#pragma once

// Scalar expressions over named real variables: parsing, evaluation, exact
// symbolic partial derivatives and a compiled (postfix) form for hot loops.
//
// Grammar (lowest to highest precedence):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['+' | '-'] INTEGER)*
//   primary := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'
// with FUNC one of sin, cos, exp, log, abs, sgn.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace impgap {

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ExprError {
 public:
  ParseError(std::size_t position, const std::string& message);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UndeclaredVariableError : public ExprError {
 public:
  explicit UndeclaredVariableError(std::string name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Division by zero, log of a non-positive number, or the sign function at 0
/// (the derivative of abs). `node()` is the printed offending subexpression.
class DomainError : public ExprError {
 public:
  DomainError(const std::string& what, std::string node);
  const std::string& node() const { return node_; }

 private:
  std::string node_;
};

enum class ExprOp : std::uint8_t {
  kConst,
  kVar,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kSin,
  kCos,
  kExp,
  kLog,
  kAbs,
  kSign,
};

/// Immutable expression tree with shared nodes. Cheap to copy; safe to share
/// across threads.
class Expr {
 public:
  struct Node;

  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr variable(std::string name);
  static Expr unary(ExprOp op, Expr arg);
  static Expr binary(ExprOp op, Expr lhs, Expr rhs);
  static Expr power(Expr base, int exponent);

  ExprOp op() const;
  double value() const;             // kConst only
  const std::string& name() const;  // kVar only
  int exponent() const;             // kPow only
  std::size_t arity() const;
  const Expr& child(std::size_t i) const;

  bool is_constant() const { return op() == ExprOp::kConst; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  /// Re-parseable text form.
  std::string str() const;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

using Env = std::map<std::string, double, std::less<>>;

Expr parse(std::string_view source, std::span<const std::string> declared_vars);

double eval(const Expr& e, const Env& env);

/// Exact partial derivative. Terms whose derivative is the constant 0 are
/// dropped while the result is assembled; no other rewriting happens.
Expr differentiate(const Expr& e, std::string_view var);

bool depends_on(const Expr& e, std::string_view var);

/// True if the tree is 0 by structure (constant 0, products with a zero
/// factor, sums of zeros, ...). Never evaluates.
bool is_structurally_zero(const Expr& e);

/// Postfix program over a fixed slot layout. Evaluation of the compiled form
/// agrees bit-for-bit with `eval`.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, std::span<const std::string> slots);

  double operator()(std::span<const double> values) const;

  bool is_constant() const { return code_.size() == 1 && code_[0].op == ExprOp::kConst; }
  double constant_value() const { return code_.empty() ? 0.0 : code_[0].value; }

 private:
  struct Instr {
    ExprOp op;
    std::int32_t arg;  // slot index, exponent, or index into labels_
    double value;
  };
  void emit(const Expr& e, std::span<const std::string> slots, int depth);
  [[noreturn]] void fail(const Instr& in, const char* what) const;

  std::vector<Instr> code_;
  std::vector<std::string> labels_;
  int max_depth_ = 0;
};

}  // namespace impgap
