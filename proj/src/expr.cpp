#include "monocert/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <system_error>
#include <utility>

namespace monocert {

struct Expr::Node {
  NodeKind kind = NodeKind::Number;
  double value = 0.0;
  Variable var{};
  BinaryOp op = BinaryOp::Add;
  Function fn = Function::Sqrt;
  std::vector<Expr> args;
};

std::string Variable::name() const {
  switch (kind) {
    case VarKind::X: return "x" + std::to_string(index + 1);
    case VarKind::Y: return "y" + std::to_string(index + 1);
    case VarKind::S: return "s";
    case VarKind::T: return "t";
    case VarKind::Lambda: return "lambda";
  }
  return "?";
}

const char* function_name(Function fn) noexcept {
  switch (fn) {
    case Function::Sqrt: return "sqrt";
    case Function::Exp: return "exp";
    case Function::Ln: return "ln";
    case Function::Abs: return "abs";
    case Function::Pow: return "pow";
    case Function::Min: return "min";
    case Function::Max: return "max";
  }
  return "?";
}

std::size_t function_arity(Function fn) noexcept {
  switch (fn) {
    case Function::Pow:
    case Function::Min:
    case Function::Max: return 2;
    default: return 1;
  }
}

const char* to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ParseErrorKind::UnbalancedParens: return "UnbalancedParens";
    case ParseErrorKind::BadNumber: return "BadNumber";
    case ParseErrorKind::ArityMismatch: return "ArityMismatch";
    case ParseErrorKind::UnexpectedToken: return "UnexpectedToken";
    case ParseErrorKind::NestingTooDeep: return "NestingTooDeep";
  }
  return "?";
}

namespace {

std::string describe_parse_error(ParseErrorKind kind, std::size_t offset,
                                 const std::vector<std::string>& expected,
                                 const std::string& detail) {
  std::string msg = std::string(to_string(kind)) + " at offset " + std::to_string(offset);
  if (!detail.empty()) msg += ": " + detail;
  if (!expected.empty()) {
    msg += " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += " or ";
      msg += expected[i];
    }
    msg += ")";
  }
  return msg;
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, std::vector<std::string> expected,
                       const std::string& detail)
    : Error(ErrorCode::Parse, describe_parse_error(kind, offset, expected, detail)),
      kind_(kind),
      offset_(offset),
      expected_(std::move(expected)) {}

// ---------------------------------------------------------------------------
// Construction and accessors

Expr::Expr() : Expr(number(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Number;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(Variable v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Var;
  n->var = v;
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Negate;
  n->args.push_back(std::move(operand));
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Binary;
  n->op = op;
  n->args.push_back(std::move(lhs));
  n->args.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr Expr::call(Function fn, std::vector<Expr> args) {
  if (args.size() != function_arity(fn)) {
    throw Error(ErrorCode::Parse, std::string(function_name(fn)) + " expects " +
                                      std::to_string(function_arity(fn)) + " argument(s)");
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->fn = fn;
  n->args = std::move(args);
  return Expr(std::move(n));
}

NodeKind Expr::kind() const noexcept { return node_->kind; }
double Expr::number_value() const { return node_->value; }
Variable Expr::var() const { return node_->var; }
BinaryOp Expr::op() const { return node_->op; }
Function Expr::function() const { return node_->fn; }
const std::vector<Expr>& Expr::args() const noexcept { return node_->args; }

bool Expr::is_number(double value) const {
  return node_->kind == NodeKind::Number && node_->value == value;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void domain_error(const std::string& what) { throw Error(ErrorCode::DomainError, what); }

double lookup(const Env& env, Variable v) {
  switch (v.kind) {
    case VarKind::X:
      if (v.index < env.x.size()) return env.x[v.index];
      break;
    case VarKind::Y:
      if (v.index < env.y.size()) return env.y[v.index];
      break;
    case VarKind::S:
      if (env.s) return *env.s;
      break;
    case VarKind::T:
      if (env.t) return *env.t;
      break;
    case VarKind::Lambda:
      if (env.lambda) return *env.lambda;
      break;
  }
  throw Error(ErrorCode::UnboundVariable, "variable '" + v.name() + "' is not bound");
}

double checked_pow(double base, double exponent) {
  if (base == 0.0 && exponent < 0.0) domain_error("zero raised to a negative power");
  const double r = std::pow(base, exponent);
  if (std::isnan(r) && !std::isnan(base) && !std::isnan(exponent)) {
    domain_error("negative base with non-integer exponent");
  }
  return r;
}

}  // namespace

double Expr::eval(const Env& env) const {
  const Node& n = *node_;
  switch (n.kind) {
    case NodeKind::Number: return n.value;
    case NodeKind::Var: return lookup(env, n.var);
    case NodeKind::Negate: return -n.args[0].eval(env);
    case NodeKind::Binary: {
      const double a = n.args[0].eval(env);
      const double b = n.args[1].eval(env);
      switch (n.op) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div:
          if (b == 0.0) domain_error("division by zero");
          return a / b;
        case BinaryOp::Pow: return checked_pow(a, b);
      }
      break;
    }
    case NodeKind::Call: {
      const double a = n.args[0].eval(env);
      switch (n.fn) {
        case Function::Sqrt:
          if (a < 0.0) domain_error("sqrt of a negative number");
          return std::sqrt(a);
        case Function::Exp: return std::exp(a);
        case Function::Ln:
          if (!(a > 0.0)) domain_error("ln of a nonpositive number");
          return std::log(a);
        case Function::Abs: return std::fabs(a);
        case Function::Pow: return checked_pow(a, n.args[1].eval(env));
        case Function::Min: return std::min(a, n.args[1].eval(env));
        case Function::Max: return std::max(a, n.args[1].eval(env));
      }
      break;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Structural queries

bool Expr::depends_on(Variable v) const {
  if (node_->kind == NodeKind::Var) return node_->var == v;
  return std::any_of(node_->args.begin(), node_->args.end(),
                     [&](const Expr& a) { return a.depends_on(v); });
}

bool Expr::is_differentiable() const {
  if (node_->kind == NodeKind::Call &&
      (node_->fn == Function::Abs || node_->fn == Function::Min || node_->fn == Function::Max)) {
    return false;
  }
  return std::all_of(node_->args.begin(), node_->args.end(),
                     [](const Expr& a) { return a.is_differentiable(); });
}

std::vector<Variable> Expr::variables() const {
  std::vector<Variable> out;
  auto visit = [&out](const Expr& e, const auto& self) -> void {
    if (e.kind() == NodeKind::Var) {
      if (std::find(out.begin(), out.end(), e.var()) == out.end()) out.push_back(e.var());
      return;
    }
    for (const Expr& a : e.args()) self(a, self);
  };
  visit(*this, visit);
  return out;
}

Expr Expr::substitute(Variable v, const Expr& replacement) const {
  switch (node_->kind) {
    case NodeKind::Number: return *this;
    case NodeKind::Var: return node_->var == v ? replacement : *this;
    case NodeKind::Negate: return negate(node_->args[0].substitute(v, replacement));
    case NodeKind::Binary:
      return binary(node_->op, node_->args[0].substitute(v, replacement),
                    node_->args[1].substitute(v, replacement));
    case NodeKind::Call: {
      std::vector<Expr> args;
      args.reserve(node_->args.size());
      for (const Expr& a : node_->args) args.push_back(a.substitute(v, replacement));
      return call(node_->fn, std::move(args));
    }
  }
  return *this;
}

// ---------------------------------------------------------------------------
// Differentiation. The builders below only drop 0/1 identities and fold
// literal arithmetic so derivative trees stay readable.

namespace {

bool is_num(const Expr& e) { return e.kind() == NodeKind::Number; }

Expr make_neg(const Expr& a) {
  if (is_num(a)) return Expr::number(-a.number_value());
  if (a.kind() == NodeKind::Negate) return a.args()[0];
  return Expr::negate(a);
}

Expr make_add(const Expr& a, const Expr& b) {
  if (a.is_number(0.0)) return b;
  if (b.is_number(0.0)) return a;
  if (is_num(a) && is_num(b)) return Expr::number(a.number_value() + b.number_value());
  return Expr::binary(BinaryOp::Add, a, b);
}

Expr make_sub(const Expr& a, const Expr& b) {
  if (b.is_number(0.0)) return a;
  if (a.is_number(0.0)) return make_neg(b);
  if (is_num(a) && is_num(b)) return Expr::number(a.number_value() - b.number_value());
  return Expr::binary(BinaryOp::Sub, a, b);
}

Expr make_mul(const Expr& a, const Expr& b) {
  if (a.is_number(0.0) || b.is_number(0.0)) return Expr::number(0.0);
  if (a.is_number(1.0)) return b;
  if (b.is_number(1.0)) return a;
  if (is_num(a) && is_num(b)) return Expr::number(a.number_value() * b.number_value());
  return Expr::binary(BinaryOp::Mul, a, b);
}

Expr make_div(const Expr& a, const Expr& b) {
  if (a.is_number(0.0)) return Expr::number(0.0);
  if (b.is_number(1.0)) return a;
  return Expr::binary(BinaryOp::Div, a, b);
}

Expr make_pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_number(1.0)) return base;
  if (exponent.is_number(0.0)) return Expr::number(1.0);
  return Expr::binary(BinaryOp::Pow, base, exponent);
}

Expr make_ln(const Expr& a) { return Expr::call(Function::Ln, {a}); }

Expr diff_pow(const Expr& u, const Expr& v, Variable var) {
  const bool base_dep = u.depends_on(var);
  const bool exp_dep = v.depends_on(var);
  if (!base_dep && !exp_dep) return Expr::number(0.0);
  const Expr du = u.differentiate(var);
  if (!exp_dep) {
    // d(u^c) = c u^(c-1) u'
    const Expr c_minus_1 = make_sub(v, Expr::number(1.0));
    return make_mul(make_mul(v, make_pow(u, c_minus_1)), du);
  }
  const Expr dv = v.differentiate(var);
  const Expr power = make_pow(u, v);
  if (!base_dep) return make_mul(make_mul(power, make_ln(u)), dv);
  // d(u^v) = u^v (v' ln u + v u'/u)
  return make_mul(power, make_add(make_mul(dv, make_ln(u)), make_div(make_mul(v, du), u)));
}

}  // namespace

Expr Expr::differentiate(Variable v) const {
  const Node& n = *node_;
  switch (n.kind) {
    case NodeKind::Number: return number(0.0);
    case NodeKind::Var: return number(n.var == v ? 1.0 : 0.0);
    case NodeKind::Negate: return make_neg(n.args[0].differentiate(v));
    case NodeKind::Binary: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      switch (n.op) {
        case BinaryOp::Add: return make_add(a.differentiate(v), b.differentiate(v));
        case BinaryOp::Sub: return make_sub(a.differentiate(v), b.differentiate(v));
        case BinaryOp::Mul:
          return make_add(make_mul(a.differentiate(v), b), make_mul(a, b.differentiate(v)));
        case BinaryOp::Div: {
          const Expr da = a.differentiate(v);
          const Expr db = b.differentiate(v);
          if (db.is_number(0.0)) return make_div(da, b);
          return make_div(make_sub(make_mul(da, b), make_mul(a, db)), make_pow(b, number(2.0)));
        }
        case BinaryOp::Pow: return diff_pow(a, b, v);
      }
      break;
    }
    case NodeKind::Call: {
      const Expr& a = n.args[0];
      switch (n.fn) {
        case Function::Sqrt:
          return make_div(a.differentiate(v), make_mul(number(2.0), *this));
        case Function::Exp: return make_mul(*this, a.differentiate(v));
        case Function::Ln: return make_div(a.differentiate(v), a);
        case Function::Pow: return diff_pow(a, n.args[1], v);
        case Function::Abs:
        case Function::Min:
        case Function::Max:
          throw Error(ErrorCode::NonDifferentiablePrimitive,
                      std::string(function_name(n.fn)) + " cannot be differentiated symbolically");
      }
      break;
    }
  }
  return number(0.0);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Number: return std::signbit(e.number_value()) ? 4 : 5;
    case NodeKind::Var:
    case NodeKind::Call: return 5;
    case NodeKind::Negate: return 4;
    case NodeKind::Binary:
      switch (e.op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 3;
      }
  }
  return 5;
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  print(e, out);
  if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Number: {
      const double v = e.number_value();
      if (std::signbit(v)) {
        out += '-';
        out += format_number(-v);
      } else {
        out += format_number(v);
      }
      return;
    }
    case NodeKind::Var: out += e.var().name(); return;
    case NodeKind::Negate:
      out += '-';
      print_wrapped(e.args()[0], precedence(e.args()[0]) < 4, out);
      return;
    case NodeKind::Binary: {
      const Expr& a = e.args()[0];
      const Expr& b = e.args()[1];
      const int pa = precedence(a);
      const int pb = precedence(b);
      switch (e.op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
          print_wrapped(a, pa < 1, out);
          out += e.op() == BinaryOp::Add ? " + " : " - ";
          print_wrapped(b, pb <= 1, out);
          return;
        case BinaryOp::Mul:
        case BinaryOp::Div:
          print_wrapped(a, pa < 2, out);
          out += e.op() == BinaryOp::Mul ? '*' : '/';
          print_wrapped(b, pb <= 2, out);
          return;
        case BinaryOp::Pow:
          print_wrapped(a, pa <= 3, out);
          out += '^';
          print_wrapped(b, pb < 3, out);
          return;
      }
      return;
    }
    case NodeKind::Call: {
      out += function_name(e.function());
      out += '(';
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) out += ", ";
        print(e.args()[i], out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string Expr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing (recursive descent, see docs/grammar.md)

namespace {

constexpr std::size_t kMaxDepth = 200;

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

const std::vector<std::string> kOperand = {"number", "identifier", "'('", "'-'"};
const std::vector<std::string> kOperatorOrEnd = {"operator", "end of input"};

std::optional<Function> function_from_name(std::string_view name) {
  static constexpr std::pair<std::string_view, Function> kTable[] = {
      {"sqrt", Function::Sqrt}, {"exp", Function::Exp}, {"ln", Function::Ln},
      {"abs", Function::Abs},   {"pow", Function::Pow}, {"min", Function::Min},
      {"max", Function::Max},
  };
  for (const auto& [n, f] : kTable) {
    if (n == name) return f;
  }
  return std::nullopt;
}

class Parser {
 public:
  Parser(std::string_view src, const ParseOptions& options) : src_(src), options_(options) {}

  Expr parse_all() {
    skip_ws();
    if (at_end()) fail(ParseErrorKind::UnexpectedToken, pos_, kOperand, "empty expression");
    Expr e = parse_sum(0);
    skip_ws();
    if (!at_end()) {
      if (peek() == ')') {
        fail(ParseErrorKind::UnbalancedParens, pos_, kOperatorOrEnd, "unmatched ')'");
      }
      fail(ParseErrorKind::UnexpectedToken, pos_, kOperatorOrEnd,
           std::string("unexpected character '") + peek() + "'");
    }
    return e;
  }

 private:
  [[noreturn]] void fail(ParseErrorKind kind, std::size_t offset, std::vector<std::string> expected,
                         const std::string& detail) const {
    throw ParseError(kind, offset, std::move(expected), detail);
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  void enter(std::size_t depth) const {
    if (depth > kMaxDepth) {
      fail(ParseErrorKind::NestingTooDeep, pos_, {}, "expression nesting exceeds limit");
    }
  }

  Expr parse_sum(std::size_t depth) {
    Expr lhs = parse_product(depth);
    for (;;) {
      skip_ws();
      if (at_end() || (peek() != '+' && peek() != '-')) return lhs;
      const BinaryOp op = peek() == '+' ? BinaryOp::Add : BinaryOp::Sub;
      ++pos_;
      lhs = Expr::binary(op, std::move(lhs), parse_product(depth));
    }
  }

  Expr parse_product(std::size_t depth) {
    Expr lhs = parse_power(depth);
    for (;;) {
      skip_ws();
      if (at_end() || (peek() != '*' && peek() != '/')) return lhs;
      const BinaryOp op = peek() == '*' ? BinaryOp::Mul : BinaryOp::Div;
      ++pos_;
      lhs = Expr::binary(op, std::move(lhs), parse_power(depth));
    }
  }

  // Right-associative; the base is a unary term so -x^2 reads as (-x)^2.
  Expr parse_power(std::size_t depth) {
    Expr base = parse_unary(depth);
    skip_ws();
    if (!at_end() && peek() == '^') {
      ++pos_;
      return Expr::binary(BinaryOp::Pow, std::move(base), parse_power(depth + 1));
    }
    return base;
  }

  Expr parse_unary(std::size_t depth) {
    enter(depth);
    skip_ws();
    if (!at_end() && peek() == '-') {
      ++pos_;
      return Expr::negate(parse_unary(depth + 1));
    }
    return parse_primary(depth);
  }

  Expr parse_primary(std::size_t depth) {
    skip_ws();
    if (at_end()) fail(ParseErrorKind::UnexpectedToken, pos_, kOperand, "unexpected end of input");
    const char c = peek();
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier(depth);
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum(depth + 1);
      expect_close();
      return inner;
    }
    fail(ParseErrorKind::UnexpectedToken, pos_, kOperand,
         std::string("unexpected character '") + c + "'");
  }

  void expect_close() {
    skip_ws();
    if (at_end()) fail(ParseErrorKind::UnbalancedParens, pos_, {"')'"}, "missing ')'");
    if (peek() != ')') {
      fail(ParseErrorKind::UnexpectedToken, pos_, {"')'", "operator"},
           std::string("unexpected character '") + peek() + "'");
    }
    ++pos_;
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    std::size_t digits = 0;
    while (!at_end() && is_digit(peek())) ++pos_, ++digits;
    if (!at_end() && peek() == '.') {
      ++pos_;
      while (!at_end() && is_digit(peek())) ++pos_, ++digits;
    }
    if (digits == 0) fail(ParseErrorKind::BadNumber, start, {"digit"}, "malformed number");
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      ++pos_;
      if (!at_end() && (peek() == '+' || peek() == '-')) ++pos_;
      std::size_t exp_digits = 0;
      while (!at_end() && is_digit(peek())) ++pos_, ++exp_digits;
      if (exp_digits == 0) fail(ParseErrorKind::BadNumber, start, {"exponent digits"}, "malformed exponent");
    }
    if (!at_end() && (peek() == '.' || is_digit(peek()))) {
      fail(ParseErrorKind::BadNumber, start, {}, "malformed number");
    }
    if (!at_end() && is_ident_start(peek())) {
      fail(ParseErrorKind::UnexpectedToken, pos_, {"operator"},
           "implicit multiplication is not supported; write '*'");
    }
    double value = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
      fail(ParseErrorKind::BadNumber, start, {}, "number out of range");
    }
    return Expr::number(value);
  }

  Expr parse_identifier(std::size_t depth) {
    const std::size_t start = pos_;
    while (!at_end() && is_ident_char(peek())) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    const std::size_t after = pos_;
    skip_ws();
    const bool call_follows = !at_end() && peek() == '(';

    if (const auto fn = function_from_name(name)) {
      if (!call_follows) {
        fail(ParseErrorKind::UnexpectedToken, pos_, {"'('"},
             "function '" + std::string(name) + "' needs an argument list");
      }
      return parse_call(*fn, name, start, depth);
    }
    if (call_follows) {
      fail(ParseErrorKind::UnknownIdentifier, start, {"function name"},
           "unknown function '" + std::string(name) + "'");
    }
    pos_ = after;
    if (const auto v = variable_from_name(name)) return Expr::variable(*v);
    fail(ParseErrorKind::UnknownIdentifier, start, {"variable"},
         "unknown identifier '" + std::string(name) + "'");
  }

  std::optional<Variable> variable_from_name(std::string_view name) const {
    if (name == "s") return Variable::s();
    if (name == "t") return Variable::t();
    if (name == "lambda") return Variable::lambda();
    if (name.size() < 2 || (name[0] != 'x' && name[0] != 'y')) return std::nullopt;
    const std::string_view digits = name.substr(1);
    if (digits[0] == '0') return std::nullopt;
    std::size_t index = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || index == 0) {
      return std::nullopt;
    }
    if (options_.dimension && index > *options_.dimension) return std::nullopt;
    return name[0] == 'x' ? Variable::x(index - 1) : Variable::y(index - 1);
  }

  Expr parse_call(Function fn, std::string_view name, std::size_t start, std::size_t depth) {
    ++pos_;  // '('
    std::vector<Expr> args;
    skip_ws();
    if (!at_end() && peek() == ')') {
      ++pos_;
    } else {
      for (;;) {
        args.push_back(parse_sum(depth + 1));
        skip_ws();
        if (at_end()) fail(ParseErrorKind::UnbalancedParens, pos_, {"')'", "','"}, "missing ')'");
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        fail(ParseErrorKind::UnexpectedToken, pos_, {"')'", "','", "operator"},
             std::string("unexpected character '") + peek() + "'");
      }
    }
    if (args.size() != function_arity(fn)) {
      fail(ParseErrorKind::ArityMismatch, start, {},
           std::string(name) + " takes " + std::to_string(function_arity(fn)) + " argument(s), got " +
               std::to_string(args.size()));
    }
    return Expr::call(fn, std::move(args));
  }

  std::string_view src_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view source, const ParseOptions& options) {
  Parser parser(source, options);
  return parser.parse_all();
}

// ---------------------------------------------------------------------------
// ExprSystem

ExprSystem::ExprSystem(std::size_t dimension, std::vector<Expr> components, VariableRoles roles)
    : components_(std::move(components)), roles_(roles) {
  if (dimension == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
  if (components_.size() != dimension) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(dimension) +
                                                  " component expressions, got " +
                                                  std::to_string(components_.size()));
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (const Variable& v : components_[i].variables()) {
      const bool state = v.kind == VarKind::X;
      const bool delayed = v.kind == VarKind::Y && roles_ == VariableRoles::StateAndDelayed;
      if (!state && !delayed) {
        throw Error(ErrorCode::InvalidVariableUse,
                    "component " + std::to_string(i + 1) + " uses '" + v.name() + "'");
      }
      if (v.index >= dimension) {
        throw Error(ErrorCode::DimensionMismatch, "component " + std::to_string(i + 1) + " uses '" +
                                                      v.name() + "' beyond dimension " +
                                                      std::to_string(dimension));
      }
    }
  }
}

ExprSystem ExprSystem::parse(std::size_t dimension, const std::vector<std::string>& sources,
                             VariableRoles roles) {
  ParseOptions options;
  options.dimension = dimension;
  std::vector<Expr> comps;
  comps.reserve(sources.size());
  for (const std::string& src : sources) comps.push_back(parse_expr(src, options));
  return ExprSystem(dimension, std::move(comps), roles);
}

bool ExprSystem::is_differentiable() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const Expr& e) { return e.is_differentiable(); });
}

}  // namespace monocert
