#include "melast/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "melast/errors.hpp"

namespace melast {

struct Expr::Node {
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };
    Kind kind;
    double value = 0.0;  // Const
    int var = 0;         // Var: 0 = x1, 1 = x2, 2 = t
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;

NodePtr make_const(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Kind::Const;
    n->value = v;
    return n;
}

NodePtr make_var(int var) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Kind::Var;
    n->var = var;
    return n;
}

NodePtr make_node(Kind kind, NodePtr a, NodePtr b = nullptr) {
    // Light constant folding keeps derivative trees small.
    const bool a_const = a && a->kind == Kind::Const;
    const bool b_const = b && b->kind == Kind::Const;
    auto n = std::make_shared<Expr::Node>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    if (kind == Kind::Mul) {
        if ((a_const && n->a->value == 0.0) || (b_const && n->b->value == 0.0))
            return make_const(0.0);
        if (a_const && n->a->value == 1.0) return n->b;
        if (b_const && n->b->value == 1.0) return n->a;
    }
    if (kind == Kind::Add) {
        if (a_const && n->a->value == 0.0) return n->b;
        if (b_const && n->b->value == 0.0) return n->a;
    }
    if (kind == Kind::Sub && b_const && n->b->value == 0.0) return n->a;
    return n;
}

double eval_node(const Expr::Node& n, double x1, double x2, double t) {
    switch (n.kind) {
        case Kind::Const: return n.value;
        case Kind::Var: return n.var == 0 ? x1 : (n.var == 1 ? x2 : t);
        case Kind::Add: return eval_node(*n.a, x1, x2, t) + eval_node(*n.b, x1, x2, t);
        case Kind::Sub: return eval_node(*n.a, x1, x2, t) - eval_node(*n.b, x1, x2, t);
        case Kind::Mul: return eval_node(*n.a, x1, x2, t) * eval_node(*n.b, x1, x2, t);
        case Kind::Div: return eval_node(*n.a, x1, x2, t) / eval_node(*n.b, x1, x2, t);
        case Kind::Pow: return std::pow(eval_node(*n.a, x1, x2, t), eval_node(*n.b, x1, x2, t));
        case Kind::Neg: return -eval_node(*n.a, x1, x2, t);
        case Kind::Sin: return std::sin(eval_node(*n.a, x1, x2, t));
        case Kind::Cos: return std::cos(eval_node(*n.a, x1, x2, t));
        case Kind::Exp: return std::exp(eval_node(*n.a, x1, x2, t));
    }
    return 0.0;
}

NodePtr diff_node(const NodePtr& n, int var) {
    switch (n->kind) {
        case Kind::Const: return make_const(0.0);
        case Kind::Var: return make_const(n->var == var ? 1.0 : 0.0);
        case Kind::Add: return make_node(Kind::Add, diff_node(n->a, var), diff_node(n->b, var));
        case Kind::Sub: return make_node(Kind::Sub, diff_node(n->a, var), diff_node(n->b, var));
        case Kind::Mul:
            return make_node(Kind::Add,
                             make_node(Kind::Mul, diff_node(n->a, var), n->b),
                             make_node(Kind::Mul, n->a, diff_node(n->b, var)));
        case Kind::Div:
            // (a/b)' = a'/b - a b'/b^2
            return make_node(Kind::Sub,
                             make_node(Kind::Div, diff_node(n->a, var), n->b),
                             make_node(Kind::Div,
                                       make_node(Kind::Mul, n->a, diff_node(n->b, var)),
                                       make_node(Kind::Mul, n->b, n->b)));
        case Kind::Pow: {
            if (n->b->kind == Kind::Const) {
                // (a^c)' = c a^(c-1) a'
                const double c = n->b->value;
                return make_node(
                    Kind::Mul, make_const(c),
                    make_node(Kind::Mul,
                              make_node(Kind::Pow, n->a, make_const(c - 1.0)),
                              diff_node(n->a, var)));
            }
            throw ConfigError("expression differentiation requires a constant exponent");
        }
        case Kind::Neg: return make_node(Kind::Neg, diff_node(n->a, var));
        case Kind::Sin:
            return make_node(Kind::Mul, make_node(Kind::Cos, n->a), diff_node(n->a, var));
        case Kind::Cos:
            return make_node(Kind::Neg,
                             make_node(Kind::Mul, make_node(Kind::Sin, n->a),
                                       diff_node(n->a, var)));
        case Kind::Exp:
            return make_node(Kind::Mul, make_node(Kind::Exp, n->a), diff_node(n->a, var));
    }
    return make_const(0.0);
}

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr parse() {
        auto n = parse_sum();
        skip_ws();
        if (pos_ != s_.size())
            fail("unexpected trailing input");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression parse error at position " +
                          std::to_string(pos_) + " in '" + s_ + "': " + what);
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            if (consume('+')) lhs = make_node(Kind::Add, lhs, parse_product());
            else if (consume('-')) lhs = make_node(Kind::Sub, lhs, parse_product());
            else return lhs;
        }
    }
    NodePtr parse_product() {
        auto lhs = parse_unary();
        for (;;) {
            if (consume('*')) lhs = make_node(Kind::Mul, lhs, parse_unary());
            else if (consume('/')) lhs = make_node(Kind::Div, lhs, parse_unary());
            else return lhs;
        }
    }
    NodePtr parse_unary() {
        if (consume('-')) return make_node(Kind::Neg, parse_unary());
        if (consume('+')) return parse_unary();
        return parse_power();
    }
    NodePtr parse_power() {
        auto base = parse_atom();
        if (consume('^')) {
            // Right-associative; exponent may itself be signed.
            auto exp = parse_unary();
            return make_node(Kind::Pow, base, exp);
        }
        return base;
    }
    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto n = parse_sum();
            if (!consume(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(s_.c_str() + pos_, &end);
            if (end == s_.c_str() + pos_) fail("bad number");
            pos_ = static_cast<size_t>(end - s_.c_str());
            return make_const(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x1") return make_var(0);
            if (name == "x2") return make_var(1);
            if (name == "t") return make_var(2);
            if (name == "pi") return make_const(3.14159265358979323846);
            if (name == "sin" || name == "cos" || name == "exp") {
                if (!consume('(')) fail("expected '(' after " + name);
                auto arg = parse_sum();
                if (!consume(')')) fail("expected ')'");
                const Kind k = name == "sin" ? Kind::Sin
                             : name == "cos" ? Kind::Cos : Kind::Exp;
                return make_node(k, arg);
            }
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& s_;
    size_t pos_ = 0;
};

}  // namespace

Expr::Expr() : root_(make_const(0.0)), text_("0") {}

Expr::Expr(std::shared_ptr<const Node> root, std::string text)
    : root_(std::move(root)), text_(std::move(text)) {}

Expr Expr::parse(const std::string& text) {
    Parser p(text);
    return Expr(p.parse(), text);
}

Expr Expr::constant(double v) {
    return Expr(make_const(v), std::to_string(v));
}

double Expr::eval(double x1, double x2, double t) const {
    return eval_node(*root_, x1, x2, t);
}

Expr Expr::diff(int var) const {
    return Expr(diff_node(root_, var), "d/d" + std::to_string(var) + "(" + text_ + ")");
}

bool Expr::is_constant_zero() const {
    return root_->kind == Node::Kind::Const && root_->value == 0.0;
}

Mat2 Expr2::jacobian(Vec2 p, double t) const {
    return {x.diff(0).eval(p, t), x.diff(1).eval(p, t),
            y.diff(0).eval(p, t), y.diff(1).eval(p, t)};
}

}  // namespace melast
