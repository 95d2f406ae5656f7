#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monocert/error.hpp"

namespace monocert {

// Scalar expression language used by every config file. The grammar is
// documented in docs/grammar.md.

enum class VarKind : std::uint8_t { X, Y, S, T, Lambda };

/// A free variable. X and Y carry a zero-based index (x1 has index 0).
struct Variable {
  VarKind kind = VarKind::X;
  std::size_t index = 0;

  [[nodiscard]] static Variable x(std::size_t i) { return {VarKind::X, i}; }
  [[nodiscard]] static Variable y(std::size_t i) { return {VarKind::Y, i}; }
  [[nodiscard]] static Variable s() { return {VarKind::S, 0}; }
  [[nodiscard]] static Variable t() { return {VarKind::T, 0}; }
  [[nodiscard]] static Variable lambda() { return {VarKind::Lambda, 0}; }

  [[nodiscard]] std::string name() const;
  friend bool operator==(const Variable&, const Variable&) = default;
};

enum class NodeKind : std::uint8_t { Number, Var, Negate, Binary, Call };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };
enum class Function : std::uint8_t { Sqrt, Exp, Ln, Abs, Pow, Min, Max };

[[nodiscard]] const char* function_name(Function fn) noexcept;
[[nodiscard]] std::size_t function_arity(Function fn) noexcept;

/// Variable bindings for evaluation. An empty span leaves x or y unbound.
struct Env {
  std::span<const double> x{};
  std::span<const double> y{};
  std::optional<double> s{};
  std::optional<double> t{};
  std::optional<double> lambda{};
};

/// Immutable expression tree. Copies share structure, so passing by value is
/// cheap and concurrent evaluation of one Expr is safe.
class Expr {
 public:
  Expr();  // the constant 0

  [[nodiscard]] static Expr number(double value);
  [[nodiscard]] static Expr variable(Variable v);
  [[nodiscard]] static Expr negate(Expr operand);
  [[nodiscard]] static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  [[nodiscard]] static Expr call(Function fn, std::vector<Expr> args);

  [[nodiscard]] NodeKind kind() const noexcept;
  [[nodiscard]] double number_value() const;  // Number nodes only
  [[nodiscard]] Variable var() const;         // Var nodes only
  [[nodiscard]] BinaryOp op() const;          // Binary nodes only
  [[nodiscard]] Function function() const;    // Call nodes only
  [[nodiscard]] const std::vector<Expr>& args() const noexcept;

  /// Throws Error{DomainError} for sqrt of a negative, ln of a nonpositive,
  /// division by zero or a NaN-producing power; Error{UnboundVariable} when
  /// env misses a referenced variable.
  [[nodiscard]] double eval(const Env& env) const;

  /// Symbolic partial derivative. abs/min/max raise NonDifferentiablePrimitive.
  [[nodiscard]] Expr differentiate(Variable v) const;

  [[nodiscard]] Expr substitute(Variable v, const Expr& replacement) const;

  [[nodiscard]] bool depends_on(Variable v) const;
  [[nodiscard]] bool is_differentiable() const;  // no abs/min/max anywhere
  [[nodiscard]] bool is_number(double value) const;
  [[nodiscard]] std::vector<Variable> variables() const;

  /// Canonical text form with minimal parentheses; parses back to an
  /// identical tree.
  [[nodiscard]] std::string to_string() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

enum class ParseErrorKind : std::uint8_t {
  UnknownIdentifier,
  UnbalancedParens,
  BadNumber,
  ArityMismatch,
  UnexpectedToken,
  NestingTooDeep,
};

[[nodiscard]] const char* to_string(ParseErrorKind kind) noexcept;

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, std::vector<std::string> expected,
             const std::string& detail);

  [[nodiscard]] ParseErrorKind kind() const noexcept { return kind_; }
  /// Byte offset into the source where the problem was detected.
  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }
  [[nodiscard]] const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
  std::vector<std::string> expected_;
};

struct ParseOptions {
  /// When set, x_k / y_k with k > dimension are rejected as unknown identifiers.
  std::optional<std::size_t> dimension{};
};

[[nodiscard]] Expr parse_expr(std::string_view source, const ParseOptions& options = {});

enum class VariableRoles : std::uint8_t { StateOnly, StateAndDelayed };

/// n component expressions over x1..xn (and y1..yn for delayed systems).
class ExprSystem {
 public:
  ExprSystem(std::size_t dimension, std::vector<Expr> components, VariableRoles roles);

  [[nodiscard]] static ExprSystem parse(std::size_t dimension,
                                        const std::vector<std::string>& sources,
                                        VariableRoles roles);

  [[nodiscard]] std::size_t dimension() const noexcept { return components_.size(); }
  [[nodiscard]] const std::vector<Expr>& components() const noexcept { return components_; }
  [[nodiscard]] const Expr& component(std::size_t i) const { return components_.at(i); }
  [[nodiscard]] VariableRoles roles() const noexcept { return roles_; }
  [[nodiscard]] bool is_differentiable() const;

 private:
  std::vector<Expr> components_;
  VariableRoles roles_;
};

}  // namespace monocert
