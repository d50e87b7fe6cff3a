#include "valence/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>

namespace valence {

namespace {

enum class Tok {
    end, number, ident, lparen, rparen,
    plus, minus, star, slash,
    eq, ne, lt, le, gt, ge,
    kw_and, kw_or, kw_not, kw_true, kw_false,
};

struct Token {
    Tok kind = Tok::end;
    std::string_view text;
    double number = 0.0;
    int offset = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        Token t;
        t.offset = static_cast<int>(pos_);
        if (pos_ >= src_.size()) return t;
        char c = src_[pos_];
        auto two = [&](char second) { return pos_ + 1 < src_.size() && src_[pos_ + 1] == second; };
        auto single = [&](Tok k, std::size_t len) {
            t.kind = k;
            t.text = src_.substr(pos_, len);
            pos_ += len;
            return t;
        };
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() &&
                                                            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
            if (ec != std::errc{}) throw ExprError("syntax", "malformed number", t.offset);
            std::size_t len = static_cast<std::size_t>(p - (src_.data() + pos_));
            t.kind = Tok::number;
            t.number = v;
            t.text = src_.substr(pos_, len);
            pos_ += len;
            if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                throw ExprError("syntax", "malformed number", t.offset);
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            t.text = src_.substr(start, pos_ - start);
            if (t.text == "and") t.kind = Tok::kw_and;
            else if (t.text == "or") t.kind = Tok::kw_or;
            else if (t.text == "not") t.kind = Tok::kw_not;
            else if (t.text == "true") t.kind = Tok::kw_true;
            else if (t.text == "false") t.kind = Tok::kw_false;
            else t.kind = Tok::ident;
            return t;
        }
        switch (c) {
            case '(': return single(Tok::lparen, 1);
            case ')': return single(Tok::rparen, 1);
            case '+': return single(Tok::plus, 1);
            case '-': return single(Tok::minus, 1);
            case '*': return single(Tok::star, 1);
            case '/': return single(Tok::slash, 1);
            case '=':
                if (two('=')) return single(Tok::eq, 2);
                break;
            case '!':
                if (two('=')) return single(Tok::ne, 2);
                return single(Tok::kw_not, 1);
            case '<':
                if (two('=')) return single(Tok::le, 2);
                return single(Tok::lt, 1);
            case '>':
                if (two('=')) return single(Tok::ge, 2);
                return single(Tok::gt, 1);
            case '&':
                if (two('&')) return single(Tok::kw_and, 2);
                break;
            case '|':
                if (two('|')) return single(Tok::kw_or, 2);
                break;
            default:
                break;
        }
        throw ExprError("syntax", std::string("unexpected character '") + c + "'", t.offset);
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
};

using Op = Expr::Op;

bool is_comparison(Op op) { return op >= Op::eq && op <= Op::ge; }

int precedence(Op op) {
    switch (op) {
        case Op::logical_or: return 1;
        case Op::logical_and: return 2;
        case Op::logical_not: return 3;
        case Op::eq: case Op::ne: case Op::lt: case Op::le: case Op::gt: case Op::ge: return 4;
        case Op::add: case Op::sub: return 5;
        case Op::mul: case Op::div: return 6;
        case Op::neg: return 7;
        default: return 8;
    }
}

const char* op_text(Op op) {
    switch (op) {
        case Op::add: return "+";
        case Op::sub: return "-";
        case Op::mul: return "*";
        case Op::div: return "/";
        case Op::eq: return "==";
        case Op::ne: return "!=";
        case Op::lt: return "<";
        case Op::le: return "<=";
        case Op::gt: return ">";
        case Op::ge: return ">=";
        case Op::logical_and: return "and";
        case Op::logical_or: return "or";
        default: return "?";
    }
}

std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace

/// Recursive-descent parser producing raw nodes, followed by a binding pass
/// that resolves identifiers and checks types.
class ExprBuilder {
public:
    ExprBuilder(std::string_view text, std::span<const VariableDef> vars) : lexer_(text), vars_(vars) {
        advance();
    }

    Expr build() {
        int root = parse_or();
        if (tok_.kind != Tok::end) throw ExprError("syntax", "unexpected '" + std::string(tok_.text) + "'", tok_.offset);
        bind(root, -1);
        Expr e;
        e.nodes_ = std::move(nodes_);
        e.root_ = root;
        return e;
    }

private:
    Lexer lexer_;
    std::span<const VariableDef> vars_;
    Token tok_;
    std::vector<Expr::Node> nodes_;
    std::vector<std::string> idents_;  // parallel to nodes_, non-empty for unbound identifiers

    void advance() { tok_ = lexer_.next(); }

    int add(Expr::Node n, std::string ident = {}) {
        nodes_.push_back(n);
        idents_.push_back(std::move(ident));
        return static_cast<int>(nodes_.size()) - 1;
    }

    int binary(Op op, int lhs, int rhs, int offset) {
        Expr::Node n;
        n.op = op;
        n.lhs = lhs;
        n.rhs = rhs;
        n.offset = offset;
        return add(n);
    }

    int parse_or() {
        int lhs = parse_and();
        while (tok_.kind == Tok::kw_or) {
            int off = tok_.offset;
            advance();
            lhs = binary(Op::logical_or, lhs, parse_and(), off);
        }
        return lhs;
    }

    int parse_and() {
        int lhs = parse_not();
        while (tok_.kind == Tok::kw_and) {
            int off = tok_.offset;
            advance();
            lhs = binary(Op::logical_and, lhs, parse_not(), off);
        }
        return lhs;
    }

    int parse_not() {
        if (tok_.kind == Tok::kw_not) {
            int off = tok_.offset;
            advance();
            Expr::Node n;
            n.op = Op::logical_not;
            n.lhs = parse_not();
            n.offset = off;
            return add(n);
        }
        return parse_compare();
    }

    int parse_compare() {
        int lhs = parse_sum();
        Op op;
        switch (tok_.kind) {
            case Tok::eq: op = Op::eq; break;
            case Tok::ne: op = Op::ne; break;
            case Tok::lt: op = Op::lt; break;
            case Tok::le: op = Op::le; break;
            case Tok::gt: op = Op::gt; break;
            case Tok::ge: op = Op::ge; break;
            default: return lhs;
        }
        int off = tok_.offset;
        advance();
        int rhs = parse_sum();
        switch (tok_.kind) {
            case Tok::eq: case Tok::ne: case Tok::lt: case Tok::le: case Tok::gt: case Tok::ge:
                throw ExprError("syntax", "comparisons cannot be chained", tok_.offset);
            default: break;
        }
        return binary(op, lhs, rhs, off);
    }

    int parse_sum() {
        int lhs = parse_product();
        while (tok_.kind == Tok::plus || tok_.kind == Tok::minus) {
            Op op = tok_.kind == Tok::plus ? Op::add : Op::sub;
            int off = tok_.offset;
            advance();
            lhs = binary(op, lhs, parse_product(), off);
        }
        return lhs;
    }

    int parse_product() {
        int lhs = parse_unary();
        while (tok_.kind == Tok::star || tok_.kind == Tok::slash) {
            Op op = tok_.kind == Tok::star ? Op::mul : Op::div;
            int off = tok_.offset;
            advance();
            lhs = binary(op, lhs, parse_unary(), off);
        }
        return lhs;
    }

    int parse_unary() {
        if (tok_.kind == Tok::plus) {
            advance();
            return parse_unary();
        }
        if (tok_.kind == Tok::minus) {
            int off = tok_.offset;
            advance();
            int operand = parse_unary();
            // Fold negative literals so "-1" is a single literal node.
            if (nodes_[operand].op == Op::number && operand == static_cast<int>(nodes_.size()) - 1) {
                nodes_[operand].number = -nodes_[operand].number;
                nodes_[operand].offset = off;
                return operand;
            }
            Expr::Node n;
            n.op = Op::neg;
            n.lhs = operand;
            n.offset = off;
            return add(n);
        }
        return parse_primary();
    }

    int parse_primary() {
        Expr::Node n;
        n.offset = tok_.offset;
        switch (tok_.kind) {
            case Tok::number:
                n.op = Op::number;
                n.number = tok_.number;
                advance();
                return add(n);
            case Tok::kw_true:
            case Tok::kw_false:
                n.op = Op::boolean;
                n.number = tok_.kind == Tok::kw_true ? 1.0 : 0.0;
                advance();
                return add(n);
            case Tok::ident: {
                std::string name(tok_.text);
                n.op = Op::variable;  // provisional until bound
                advance();
                return add(n, std::move(name));
            }
            case Tok::lparen: {
                advance();
                int inner = parse_or();
                if (tok_.kind != Tok::rparen) throw ExprError("syntax", "expected ')'", tok_.offset);
                advance();
                return inner;
            }
            case Tok::end:
                throw ExprError("syntax", "unexpected end of expression", tok_.offset);
            default:
                throw ExprError("syntax", "unexpected '" + std::string(tok_.text) + "'", tok_.offset);
        }
    }

    int find_variable(const std::string& name) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    int bound_variable(int node) const {
        if (idents_[node].empty()) return -1;
        return find_variable(idents_[node]);
    }

    void bind_identifier(int id, int context_var) {
        auto& n = nodes_[id];
        const std::string& name = idents_[id];
        if (int v = find_variable(name); v >= 0) {
            n.op = Op::variable;
            n.var = v;
            return;
        }
        if (context_var >= 0) {
            int level = vars_[context_var].level_index(name);
            if (level < 0)
                throw ExprError("unknown-level",
                                "'" + name + "' is not a level of variable '" + vars_[context_var].name + "'",
                                n.offset);
            n.op = Op::level;
            n.var = context_var;
            n.level = level;
            return;
        }
        int found_var = -1, found_level = -1, matches = 0;
        for (std::size_t v = 0; v < vars_.size(); ++v) {
            int level = vars_[v].level_index(name);
            if (level >= 0) {
                ++matches;
                found_var = static_cast<int>(v);
                found_level = level;
            }
        }
        if (matches == 0) throw ExprError("unknown-identifier", "unknown identifier '" + name + "'", n.offset);
        if (matches > 1)
            throw ExprError("ambiguous-level", "level '" + name + "' belongs to several variables", n.offset);
        n.op = Op::level;
        n.var = found_var;
        n.level = found_level;
    }

    static const char* type_name(ExprType t) { return t == ExprType::number ? "number" : "boolean"; }

    void expect(int id, ExprType want, int offset) {
        if (nodes_[id].type != want)
            throw ExprError("type-error", std::string("expected a ") + type_name(want) + " operand", offset);
    }

    bool references_state(int id) const {
        const auto& n = nodes_[id];
        if (n.op == Op::variable) return true;
        if (n.lhs >= 0 && references_state(n.lhs)) return true;
        if (n.rhs >= 0 && references_state(n.rhs)) return true;
        return false;
    }

    double fold(int id) const {
        const auto& n = nodes_[id];
        switch (n.op) {
            case Op::number: case Op::boolean: return n.number;
            case Op::level: return n.level;
            case Op::neg: return -fold(n.lhs);
            case Op::add: return fold(n.lhs) + fold(n.rhs);
            case Op::sub: return fold(n.lhs) - fold(n.rhs);
            case Op::mul: return fold(n.lhs) * fold(n.rhs);
            case Op::div: {
                double d = fold(n.rhs);
                return d == 0.0 ? 0.0 : fold(n.lhs) / d;
            }
            default: return 0.0;
        }
    }

    void bind(int id, int context_var) {
        auto& n = nodes_[id];
        switch (n.op) {
            case Op::number:
                n.type = ExprType::number;
                return;
            case Op::boolean:
                n.type = ExprType::boolean;
                return;
            case Op::variable:
            case Op::level:
                if (!idents_[id].empty()) bind_identifier(id, context_var);
                n.type = ExprType::number;
                return;
            case Op::neg:
                bind(n.lhs, -1);
                expect(n.lhs, ExprType::number, n.offset);
                n.type = ExprType::number;
                return;
            case Op::logical_not:
                bind(n.lhs, -1);
                expect(n.lhs, ExprType::boolean, n.offset);
                n.type = ExprType::boolean;
                return;
            case Op::add: case Op::sub: case Op::mul: case Op::div:
                bind(n.lhs, -1);
                bind(n.rhs, -1);
                expect(n.lhs, ExprType::number, n.offset);
                expect(n.rhs, ExprType::number, n.offset);
                if (n.op == Op::div && !references_state(n.rhs) && fold(n.rhs) == 0.0)
                    throw ExprError("division-by-zero", "division by zero", n.offset);
                n.type = ExprType::number;
                return;
            case Op::eq: case Op::ne: case Op::lt: case Op::le: case Op::gt: case Op::ge: {
                int lhs = n.lhs, rhs = n.rhs, off = n.offset;
                Op op = n.op;
                int lv = bound_variable(lhs);
                int rv = bound_variable(rhs);
                bind(lhs, rv);
                bind(rhs, lv);
                if (nodes_[lhs].type != nodes_[rhs].type)
                    throw ExprError("type-error", "comparison between number and boolean", off);
                if (nodes_[lhs].type == ExprType::boolean && op != Op::eq && op != Op::ne)
                    throw ExprError("type-error", "ordering comparison on booleans", off);
                nodes_[id].type = ExprType::boolean;
                return;
            }
            case Op::logical_and: case Op::logical_or:
                bind(n.lhs, -1);
                bind(n.rhs, -1);
                expect(n.lhs, ExprType::boolean, n.offset);
                expect(n.rhs, ExprType::boolean, n.offset);
                n.type = ExprType::boolean;
                return;
        }
    }
};

Expr Expr::parse(std::string_view text, std::span<const VariableDef> variables) {
    return ExprBuilder(text, variables).build();
}

Expr Expr::parse(std::string_view text, std::span<const VariableDef> variables, ExprType expected) {
    Expr e = parse(text, variables);
    if (e.type() != expected)
        throw ExprError("type-error",
                        expected == ExprType::boolean ? "expected a boolean condition" : "expected a numeric expression",
                        0);
    return e;
}

Expr Expr::constant(double value) {
    Expr e;
    Node n;
    n.op = Op::number;
    n.number = value;
    e.nodes_.push_back(n);
    e.root_ = 0;
    return e;
}

Expr Expr::constant(bool value) {
    Expr e;
    Node n;
    n.op = Op::boolean;
    n.type = ExprType::boolean;
    n.number = value ? 1.0 : 0.0;
    e.nodes_.push_back(n);
    e.root_ = 0;
    return e;
}

ExprType Expr::type() const { return nodes_.at(root_).type; }

namespace {

double eval_num(const std::vector<Expr::Node>& nodes, int id, const StateVector& s);

bool eval_boolean(const std::vector<Expr::Node>& nodes, int id, const StateVector& s) {
    const auto& n = nodes[id];
    switch (n.op) {
        case Op::boolean: return n.number != 0.0;
        case Op::logical_not: return !eval_boolean(nodes, n.lhs, s);
        case Op::logical_and: return eval_boolean(nodes, n.lhs, s) && eval_boolean(nodes, n.rhs, s);
        case Op::logical_or: return eval_boolean(nodes, n.lhs, s) || eval_boolean(nodes, n.rhs, s);
        case Op::eq: case Op::ne: {
            bool same = nodes[n.lhs].type == ExprType::boolean ? eval_boolean(nodes, n.lhs, s) == eval_boolean(nodes, n.rhs, s)
                                         : eval_num(nodes, n.lhs, s) == eval_num(nodes, n.rhs, s);
            return n.op == Op::eq ? same : !same;
        }
        case Op::lt: return eval_num(nodes, n.lhs, s) < eval_num(nodes, n.rhs, s);
        case Op::le: return eval_num(nodes, n.lhs, s) <= eval_num(nodes, n.rhs, s);
        case Op::gt: return eval_num(nodes, n.lhs, s) > eval_num(nodes, n.rhs, s);
        case Op::ge: return eval_num(nodes, n.lhs, s) >= eval_num(nodes, n.rhs, s);
        default: return eval_num(nodes, id, s) != 0.0;
    }
}

double eval_num(const std::vector<Expr::Node>& nodes, int id, const StateVector& s) {
    const auto& n = nodes[id];
    switch (n.op) {
        case Op::number: return n.number;
        case Op::variable: return static_cast<double>(s.levels.at(static_cast<std::size_t>(n.var)));
        case Op::level: return static_cast<double>(n.level);
        case Op::neg: return -eval_num(nodes, n.lhs, s);
        case Op::add: return eval_num(nodes, n.lhs, s) + eval_num(nodes, n.rhs, s);
        case Op::sub: return eval_num(nodes, n.lhs, s) - eval_num(nodes, n.rhs, s);
        case Op::mul: return eval_num(nodes, n.lhs, s) * eval_num(nodes, n.rhs, s);
        case Op::div: {
            double d = eval_num(nodes, n.rhs, s);
            if (d == 0.0) throw EvalError("division by zero", n.offset);
            return eval_num(nodes, n.lhs, s) / d;
        }
        default: return eval_boolean(nodes, id, s) ? 1.0 : 0.0;
    }
}

}  // namespace

ExprValue Expr::eval(const StateVector& state) const {
    if (type() == ExprType::boolean) return eval_bool(state);
    return eval_number(state);
}

double Expr::eval_number(const StateVector& state) const { return eval_num(nodes_, root_, state); }

bool Expr::eval_bool(const StateVector& state) const { return eval_boolean(nodes_, root_, state); }

std::optional<double> Expr::constant_value() const {
    for (const auto& n : nodes_)
        if (n.op == Op::variable) return std::nullopt;
    try {
        return eval_num(nodes_, root_, StateVector{});
    } catch (const EvalError&) {
        return std::nullopt;
    }
}

namespace {

void render_node(const std::vector<Expr::Node>& nodes, int id, std::span<const VariableDef> vars,
                 std::string& out) {
    const auto& n = nodes[id];
    auto child = [&](int c, bool parens) {
        if (parens) out += '(';
        render_node(nodes, c, vars, out);
        if (parens) out += ')';
    };
    switch (n.op) {
        case Op::number: out += format_number(n.number); return;
        case Op::boolean: out += n.number != 0.0 ? "true" : "false"; return;
        case Op::variable: out += vars[n.var].name; return;
        case Op::level: out += vars[n.var].levels[n.level]; return;
        case Op::neg: {
            out += '-';
            const auto& c = nodes[n.lhs];
            bool negative_literal = c.op == Op::number && std::signbit(c.number);
            child(n.lhs, precedence(c.op) < precedence(Op::neg) || negative_literal || c.op == Op::neg);
            return;
        }
        case Op::logical_not:
            out += "not ";
            child(n.lhs, precedence(nodes[n.lhs].op) < precedence(Op::logical_not));
            return;
        default: {
            int p = precedence(n.op);
            int lp = precedence(nodes[n.lhs].op);
            int rp = precedence(nodes[n.rhs].op);
            bool cmp = is_comparison(n.op);
            child(n.lhs, lp < p || (cmp && lp == p));
            out += ' ';
            out += op_text(n.op);
            out += ' ';
            child(n.rhs, rp <= p);
            return;
        }
    }
}

bool equal_nodes(const Expr& a, int ia, const Expr& b, int ib) {
    const auto& x = a.nodes()[ia];
    const auto& y = b.nodes()[ib];
    if (x.op != y.op) return false;
    switch (x.op) {
        case Op::number: case Op::boolean:
            return x.number == y.number && std::signbit(x.number) == std::signbit(y.number);
        case Op::variable: return x.var == y.var;
        case Op::level: return x.var == y.var && x.level == y.level;
        case Op::neg: case Op::logical_not: return equal_nodes(a, x.lhs, b, y.lhs);
        default: return equal_nodes(a, x.lhs, b, y.lhs) && equal_nodes(a, x.rhs, b, y.rhs);
    }
}

}  // namespace

std::string Expr::render(std::span<const VariableDef> variables) const {
    std::string out;
    if (root_ >= 0) render_node(nodes_, root_, variables, out);
    return out;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.root_ < 0 || b.root_ < 0) return a.root_ == b.root_;
    return equal_nodes(a, a.root_, b, b.root_);
}

}  // namespace valence
