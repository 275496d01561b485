#include "evolver/expr.hpp"

#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <numbers>

namespace evolver {

ParseError::ParseError(ErrorKind kind, std::size_t offset, const std::string& message)
    : Error(kind, message + " at offset " + std::to_string(offset)), offset_(offset) {}

namespace {

struct FnInfo {
  std::string_view name;
  Expr::Fn fn;
  int arity;
};

constexpr std::array<FnInfo, 7> kFunctions{{
    {"sin", Expr::Fn::kSin, 1},
    {"cos", Expr::Fn::kCos, 1},
    {"exp", Expr::Fn::kExp, 1},
    {"tanh", Expr::Fn::kTanh, 1},
    {"abs", Expr::Fn::kAbs, 1},
    {"min", Expr::Fn::kMin, 2},
    {"max", Expr::Fn::kMax, 2},
}};

const FnInfo& info(Expr::Fn fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f;
  }
  return kFunctions[0];
}

std::string_view var_name(Expr::Var v) {
  switch (v) {
    case Expr::Var::kT: return "t";
    case Expr::Var::kS: return "s";
    case Expr::Var::kPeriod: return "T";
    case Expr::Var::kPi: return "pi";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse() {
    Expr e = expression();
    skip();
    if (pos_ != src_.size()) syntax("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void syntax(const std::string& msg) const { throw ParseError(ErrorKind::kSyntax, pos_, msg); }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) syntax(std::string("expected '") + c + "' before end of input");
      syntax(std::string("expected '") + c + "'");
    }
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary('+', lhs, term());
      } else if (accept('-')) {
        lhs = Expr::binary('-', lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary('*', lhs, unary());
      } else if (accept('/')) {
        lhs = Expr::binary('/', lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::negate(unary());
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary('^', base, unary());
    return base;
  }

  Expr primary() {
    skip();
    if (pos_ >= src_.size()) syntax("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expression();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    syntax("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t count = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) {
      pos_ = start;
      syntax("malformed number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) syntax("malformed exponent");
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_ || !std::isfinite(value)) {
      pos_ = start;
      syntax("number out of range");
    }
    return Expr::number(value);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") return Expr::variable(Expr::Var::kT);
    if (name == "s") return Expr::variable(Expr::Var::kS);
    if (name == "T") return Expr::variable(Expr::Var::kPeriod);
    if (name == "pi") return Expr::variable(Expr::Var::kPi);
    const FnInfo* fn = nullptr;
    for (const auto& f : kFunctions) {
      if (f.name == name) fn = &f;
    }
    if (!fn) throw ParseError(ErrorKind::kUnknownIdentifier, start, "unknown identifier '" + std::string(name) + "'");
    const std::size_t call_at = pos_;
    if (!accept('(')) {
      pos_ = call_at;
      syntax("expected '(' after function " + std::string(name));
    }
    std::vector<Expr> args;
    args.push_back(expression());
    while (accept(',')) args.push_back(expression());
    expect(')');
    if (static_cast<int>(args.size()) != fn->arity) {
      throw ParseError(ErrorKind::kSyntax, start,
                       std::string(name) + " takes " + std::to_string(fn->arity) + " argument(s)");
    }
    return Expr::call(fn->fn, std::move(args));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double eval_node(const Expr::Node& n, const Bindings& b) {
  switch (n.kind) {
    case Expr::Kind::kNumber:
      return n.number;
    case Expr::Kind::kVariable: {
      const std::optional<double>* slot = nullptr;
      switch (n.var) {
        case Expr::Var::kPi: return std::numbers::pi;
        case Expr::Var::kT: slot = &b.t; break;
        case Expr::Var::kS: slot = &b.s; break;
        case Expr::Var::kPeriod: slot = &b.T; break;
      }
      if (!slot->has_value()) {
        fail(ErrorKind::kUnboundVariable, "variable '" + std::string(var_name(n.var)) + "' is not bound");
      }
      return **slot;
    }
    case Expr::Kind::kNegate:
      return -eval_node(*n.args[0], b);
    case Expr::Kind::kBinary: {
      const double x = eval_node(*n.args[0], b);
      const double y = eval_node(*n.args[1], b);
      switch (n.op) {
        case '+': return x + y;
        case '-': return x - y;
        case '*': return x * y;
        case '/':
          if (y == 0.0) fail(ErrorKind::kDivisionByZero, "division by zero");
          return x / y;
        default: return std::pow(x, y);
      }
    }
    case Expr::Kind::kCall: {
      const double x = eval_node(*n.args[0], b);
      switch (n.fn) {
        case Expr::Fn::kSin: return std::sin(x);
        case Expr::Fn::kCos: return std::cos(x);
        case Expr::Fn::kExp: return std::exp(x);
        case Expr::Fn::kTanh: return std::tanh(x);
        case Expr::Fn::kAbs: return std::abs(x);
        case Expr::Fn::kMin: return std::min(x, eval_node(*n.args[1], b));
        case Expr::Fn::kMax: return std::max(x, eval_node(*n.args[1], b));
      }
    }
  }
  return 0.0;
}

// Binding strength: sums 1, products 2, negation 3, powers 4, atoms 5.
int strength(const Expr::Node& n) {
  switch (n.kind) {
    case Expr::Kind::kNegate: return 3;
    case Expr::Kind::kBinary:
      if (n.op == '^') return 4;
      return (n.op == '+' || n.op == '-') ? 1 : 2;
    default: return 5;
  }
}

void print_node(const Expr::Node& n, std::string& out);

void print_wrapped(const Expr::Node& n, bool parens, std::string& out) {
  if (parens) out += '(';
  print_node(n, out);
  if (parens) out += ')';
}

void print_node(const Expr::Node& n, std::string& out) {
  switch (n.kind) {
    case Expr::Kind::kNumber: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, n.number);
      out.append(buf, res.ptr);
      return;
    }
    case Expr::Kind::kVariable:
      out += var_name(n.var);
      return;
    case Expr::Kind::kNegate:
      out += '-';
      print_wrapped(*n.args[0], strength(*n.args[0]) < 3, out);
      return;
    case Expr::Kind::kBinary: {
      const Expr::Node& lhs = *n.args[0];
      const Expr::Node& rhs = *n.args[1];
      if (n.op == '^') {
        print_wrapped(lhs, strength(lhs) < 5, out);
        out += '^';
        print_wrapped(rhs, strength(rhs) < 3, out);
        return;
      }
      const int own = strength(n);
      print_wrapped(lhs, strength(lhs) < own, out);
      if (own == 1) {
        out += ' ';
        out += n.op;
        out += ' ';
      } else {
        out += n.op;
      }
      print_wrapped(rhs, strength(rhs) <= own, out);
      return;
    }
    case Expr::Kind::kCall:
      out += info(n.fn).name;
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.args[i], out);
      }
      out += ')';
      return;
  }
}

void collect(const Expr::Node& n, std::set<std::string>& vars) {
  if (n.kind == Expr::Kind::kVariable && n.var != Expr::Var::kPi) vars.insert(std::string(var_name(n.var)));
  for (const auto& a : n.args) collect(*a, vars);
}

bool same(const Expr::Node& a, const Expr::Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case Expr::Kind::kNumber: if (a.number != b.number) return false; break;
    case Expr::Kind::kVariable: if (a.var != b.var) return false; break;
    case Expr::Kind::kBinary: if (a.op != b.op) return false; break;
    case Expr::Kind::kCall: if (a.fn != b.fn) return false; break;
    case Expr::Kind::kNegate: break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

const Expr::Node& checked(const Expr& e) {
  if (e.empty()) fail(ErrorKind::kInvalidInput, "empty expression");
  return *e.root();
}

}  // namespace

Expr Expr::number(double value) {
  if (!std::isfinite(value) || value < 0.0) fail(ErrorKind::kInvalidInput, "literals are finite and nonnegative");
  return Expr(std::make_shared<const Node>(Node{Kind::kNumber, value, Var::kT, 0, Fn::kSin, {}}));
}

Expr Expr::variable(Var var) {
  return Expr(std::make_shared<const Node>(Node{Kind::kVariable, 0.0, var, 0, Fn::kSin, {}}));
}

Expr Expr::negate(const Expr& operand) {
  return Expr(std::make_shared<const Node>(Node{Kind::kNegate, 0.0, Var::kT, 0, Fn::kSin, {operand.root()}}));
}

Expr Expr::binary(char op, const Expr& lhs, const Expr& rhs) {
  if (op != '+' && op != '-' && op != '*' && op != '/' && op != '^') {
    fail(ErrorKind::kInvalidInput, std::string("unknown operator ") + op);
  }
  return Expr(std::make_shared<const Node>(Node{Kind::kBinary, 0.0, Var::kT, op, Fn::kSin, {lhs.root(), rhs.root()}}));
}

Expr Expr::call(Fn fn, std::vector<Expr> args) {
  if (static_cast<int>(args.size()) != info(fn).arity) fail(ErrorKind::kInvalidInput, "wrong argument count");
  std::vector<NodePtr> nodes;
  for (auto& a : args) nodes.push_back(a.root());
  return Expr(std::make_shared<const Node>(Node{Kind::kCall, 0.0, Var::kT, 0, fn, std::move(nodes)}));
}

double Expr::eval(const Bindings& bindings) const { return eval_node(checked(*this), bindings); }

std::string Expr::print() const {
  std::string out;
  print_node(checked(*this), out);
  return out;
}

std::set<std::string> Expr::free_variables() const {
  std::set<std::string> vars;
  collect(checked(*this), vars);
  return vars;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  return same(*a.root(), *b.root());
}

Expr parse_expr(std::string_view source) { return Parser(source).parse(); }

double eval_expr(const Expr& expr, const Bindings& bindings) { return expr.eval(bindings); }

std::string print_expr(const Expr& expr) { return expr.print(); }

}  // namespace evolver
