#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "valence/state.hpp"

namespace valence {

enum class ExprType { number, boolean };

using ExprValue = std::variant<double, bool>;

/// Raised while parsing or binding expression text. `offset` is the byte
/// position inside the expression text.
class ExprError : public std::runtime_error {
public:
    ExprError(std::string code, std::string message, int offset)
        : std::runtime_error(std::move(message)), code_(std::move(code)), offset_(offset) {}
    [[nodiscard]] const std::string& code() const { return code_; }
    [[nodiscard]] int offset() const { return offset_; }

private:
    std::string code_;
    int offset_;
};

/// Raised when evaluation fails at run time (division by zero).
class EvalError : public std::runtime_error {
public:
    EvalError(std::string message, int offset)
        : std::runtime_error(std::move(message)), offset_(offset) {}
    [[nodiscard]] int offset() const { return offset_; }

private:
    int offset_;
};

/// A parsed, name-resolved, type-checked guard or score expression.
///
/// Grammar, loosest binding first:
///
///     or      := and ( ("or" | "||") and )*
///     and     := not ( ("and" | "&&") not )*
///     not     := ("not" | "!") not | compare
///     compare := sum ( ("==" | "!=" | "<" | "<=" | ">" | ">=") sum )?
///     sum     := product ( ("+" | "-") product )*
///     product := unary ( ("*" | "/") unary )*
///     unary   := "-" unary | "+" unary | primary
///     primary := number | "true" | "false" | identifier | "(" or ")"
///
/// An identifier naming a variable evaluates to that variable's level index.
/// Any other identifier is a level literal: it is resolved against the
/// variable on the other side of a comparison when there is one, otherwise
/// it must name a level of exactly one variable.
class Expr {
public:
    enum class Op : std::uint8_t {
        number, boolean, variable, level,
        neg, logical_not,
        add, sub, mul, div,
        eq, ne, lt, le, gt, ge,
        logical_and, logical_or,
    };

    struct Node {
        Op op = Op::number;
        ExprType type = ExprType::number;
        double number = 0.0;  // literal value; 0/1 for booleans
        int var = -1;         // variable and level references
        int level = -1;
        int lhs = -1;
        int rhs = -1;
        int offset = 0;
    };

    Expr() = default;

    /// Parses and binds `text` against `variables`. Throws ExprError.
    static Expr parse(std::string_view text, std::span<const VariableDef> variables);

    /// Parses and additionally requires the given result type.
    static Expr parse(std::string_view text, std::span<const VariableDef> variables,
                      ExprType expected);

    static Expr constant(double value);
    static Expr constant(bool value);

    [[nodiscard]] ExprType type() const;
    [[nodiscard]] bool empty() const { return nodes_.empty(); }

    [[nodiscard]] ExprValue eval(const StateVector& state) const;
    [[nodiscard]] double eval_number(const StateVector& state) const;
    [[nodiscard]] bool eval_bool(const StateVector& state) const;

    /// Value of an expression that references no variables.
    [[nodiscard]] std::optional<double> constant_value() const;

    /// Canonical text; re-parsing it yields a structurally equal expression.
    [[nodiscard]] std::string render(std::span<const VariableDef> variables) const;

    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
    [[nodiscard]] int root() const { return root_; }

    /// Structural equality; source offsets are ignored.
    friend bool operator==(const Expr& a, const Expr& b);

private:
    std::vector<Node> nodes_;
    int root_ = -1;

    friend class ExprBuilder;
};

}  // namespace valence
