#pragma once

#include <memory>
#include <string>

#include "melast/geometry.hpp"

namespace melast {

/// Closed-form scalar expression in the variables x1, x2 (position) and t
/// (time). Grammar: numbers, x1, x2, t, + - * / ^, sin, cos, exp, parentheses,
/// unary minus. Parse errors carry the offending position.
class Expr {
public:
    Expr();  // constant 0
    static Expr parse(const std::string& text);
    static Expr constant(double v);

    double eval(double x1, double x2, double t) const;
    double eval(Vec2 x, double t) const { return eval(x.x, x.y, t); }

    /// Symbolic partial derivative; var is 0 for x1, 1 for x2, 2 for t.
    Expr diff(int var) const;

    bool is_constant_zero() const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> root, std::string text);
    std::shared_ptr<const Node> root_;
    std::string text_;
};

/// Vector-valued expression (two scalar components).
struct Expr2 {
    Expr x, y;

    static Expr2 parse(const std::string& comp_x, const std::string& comp_y) {
        return {Expr::parse(comp_x), Expr::parse(comp_y)};
    }
    static Expr2 zero() { return {Expr::constant(0.0), Expr::constant(0.0)}; }

    Vec2 eval(Vec2 p, double t) const { return {x.eval(p, t), y.eval(p, t)}; }
    /// Spatial Jacobian d(component i)/d(x_j).
    Mat2 jacobian(Vec2 p, double t) const;
    bool is_zero() const { return x.is_constant_zero() && y.is_constant_zero(); }
};

}  // namespace melast
