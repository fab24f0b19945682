#pragma once

// Closed expression language for test functions. Expressions are immutable
// DAGs over the primitive set in autodiff.hpp and evaluate on any AdScalar,
// so the same tree yields values (complex) and exact partials (Dual<M>).

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hardylab/autodiff.hpp"

namespace hlab {

enum class Op {
    variable,
    constant,
    add,
    sub,
    mul,
    div,
    neg,
    pow,
    powi,
    exp,
    log,
    sin,
    cos,
    bump,
    smooth_step,
};

class Expr {
public:
    struct Node {
        Op op = Op::constant;
        std::size_t index = 0;  // variable slot
        complex value{};        // constant
        double exponent = 0.0;  // pow
        int int_exponent = 0;   // powi
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };

    Expr() : Expr(complex(0.0, 0.0)) {}
    Expr(complex c) : node_(constant_node(c)) {}  // NOLINT(implicit)
    Expr(double c) : Expr(complex(c, 0.0)) {}               // NOLINT(implicit)

    static Expr var(std::size_t i) {
        Node n = blank(Op::variable);
        n.index = i;
        return Expr(make(std::move(n)));
    }

    [[nodiscard]] const Node& node() const { return *node_; }
    [[nodiscard]] bool is_constant_zero() const {
        return node_->op == Op::constant && node_->value == complex(0.0, 0.0);
    }

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(Op::add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(Op::sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(Op::mul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return binary(Op::div, a, b); }
    friend Expr operator-(const Expr& a) { return unary(Op::neg, a); }

    friend Expr exp(const Expr& a) { return unary(Op::exp, a); }
    friend Expr log(const Expr& a) { return unary(Op::log, a); }
    friend Expr sin(const Expr& a) { return unary(Op::sin, a); }
    friend Expr cos(const Expr& a) { return unary(Op::cos, a); }
    friend Expr bump(const Expr& a) { return unary(Op::bump, a); }
    friend Expr smooth_step(const Expr& a) { return unary(Op::smooth_step, a); }
    friend Expr pow(const Expr& a, double e) {
        Node n = blank(Op::pow);
        n.exponent = e;
        n.lhs = a.node_;
        return Expr(make(std::move(n)));
    }
    friend Expr powi(const Expr& a, int m) {
        Node n = blank(Op::powi);
        n.int_exponent = m;
        n.lhs = a.node_;
        return Expr(make(std::move(n)));
    }
    friend Expr sqrt(const Expr& a) { return pow(a, 0.5); }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Node blank(Op op) {
        Node n;
        n.op = op;
        return n;
    }
    static std::shared_ptr<const Node> constant_node(complex c) {
        Node n = blank(Op::constant);
        n.value = c;
        return make(std::move(n));
    }
    static std::shared_ptr<const Node> make(Node n) {
        return std::make_shared<const Node>(std::move(n));
    }
    static Expr unary(Op op, const Expr& a) {
        Node n = blank(op);
        n.lhs = a.node_;
        return Expr(make(std::move(n)));
    }
    static Expr binary(Op op, const Expr& a, const Expr& b) {
        Node n = blank(op);
        n.lhs = a.node_;
        n.rhs = b.node_;
        return Expr(make(std::move(n)));
    }

    std::shared_ptr<const Node> node_;
};

namespace detail {

template <AdScalar T>
T eval_node(const Expr::Node& n, std::span<const T> vars) {
    switch (n.op) {
        case Op::variable:
            if (n.index >= vars.size()) throw std::out_of_range("expression variable out of range");
            return vars[n.index];
        case Op::constant:
            return T(n.value);
        case Op::add:
            return eval_node(*n.lhs, vars) + eval_node(*n.rhs, vars);
        case Op::sub:
            return eval_node(*n.lhs, vars) - eval_node(*n.rhs, vars);
        case Op::mul: {
            // Exact zeros short-circuit so cutoffs placed on the left mask
            // singular factors outside the support.
            T a = eval_node(*n.lhs, vars);
            if (scalar_traits<T>::is_exact_zero(a)) return a;
            return a * eval_node(*n.rhs, vars);
        }
        case Op::div: {
            T a = eval_node(*n.lhs, vars);
            if (scalar_traits<T>::is_exact_zero(a)) return a;
            return a / eval_node(*n.rhs, vars);
        }
        case Op::neg:
            return -eval_node(*n.lhs, vars);
        case Op::pow:
            return hlab::pow(eval_node(*n.lhs, vars), n.exponent);
        case Op::powi:
            return hlab::powi(eval_node(*n.lhs, vars), n.int_exponent);
        case Op::exp:
            return hlab::exp(eval_node(*n.lhs, vars));
        case Op::log:
            return hlab::log(eval_node(*n.lhs, vars));
        case Op::sin:
            return hlab::sin(eval_node(*n.lhs, vars));
        case Op::cos:
            return hlab::cos(eval_node(*n.lhs, vars));
        case Op::bump:
            return hlab::bump(eval_node(*n.lhs, vars));
        case Op::smooth_step:
            return hlab::smooth_step(eval_node(*n.lhs, vars));
    }
    throw std::logic_error("unknown expression op");
}

}  // namespace detail

template <AdScalar T>
T evaluate(const Expr& e, std::span<const T> vars) {
    return detail::eval_node(e.node(), vars);
}

inline complex evaluate(const Expr& e, std::span<const double> x) {
    std::vector<complex> z(x.begin(), x.end());
    return evaluate<complex>(e, std::span<const complex>(z));
}

/// |x_{first}, ..., x_{first+count-1}| as an expression.
inline Expr euclidean_norm_expr(std::size_t first, std::size_t count) {
    Expr sum = powi(Expr::var(first), 2);
    for (std::size_t i = 1; i < count; ++i) sum = sum + powi(Expr::var(first + i), 2);
    return sqrt(sum);
}

}  // namespace hlab
