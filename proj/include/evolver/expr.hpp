#pragma once

// Arithmetic expressions over the variables t, s, T and the constant pi, used
// for time-dependent coefficients and nonlinearities in experiment configs.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | variable | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos exp tanh abs (one argument), min max (two).

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "evolver/error.hpp"

namespace evolver {

/// Parse failure with the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t offset, const std::string& message);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

struct Bindings {
  std::optional<double> t;
  std::optional<double> s;
  std::optional<double> T;
};

class Expr {
 public:
  enum class Kind { kNumber, kVariable, kNegate, kBinary, kCall };
  enum class Var { kT, kS, kPeriod, kPi };
  enum class Fn { kSin, kCos, kExp, kTanh, kAbs, kMin, kMax };

  struct Node {
    Kind kind;
    double number = 0.0;
    Var var = Var::kT;
    char op = 0;  // + - * / ^
    Fn fn = Fn::kSin;
    std::vector<std::shared_ptr<const Node>> args;
  };
  using NodePtr = std::shared_ptr<const Node>;

  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  static Expr number(double value);
  static Expr variable(Var var);
  static Expr negate(const Expr& operand);
  static Expr binary(char op, const Expr& lhs, const Expr& rhs);
  static Expr call(Fn fn, std::vector<Expr> args);

  const NodePtr& root() const { return root_; }
  bool empty() const { return !root_; }

  double eval(const Bindings& bindings) const;
  /// Normalized source: minimal parentheses, spaces around + and - only,
  /// numbers in shortest round-trip form.
  std::string print() const;
  /// Free variable names among {t, s, T} (pi is a constant).
  std::set<std::string> free_variables() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  NodePtr root_;
};

Expr parse_expr(std::string_view source);
double eval_expr(const Expr& expr, const Bindings& bindings);
std::string print_expr(const Expr& expr);

}  // namespace evolver
