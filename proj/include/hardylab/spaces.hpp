#pragma once

/**
 * @file spaces.hpp
 * @brief Geometric settings: cylindrical R^k x R^{n-k}, homogeneous groups
 *        with anisotropic dilations, and step-2 stratified groups.
 *
 * Only what the identities need is modelled: dilations, homogeneous
 * quasi-norms, the first-stratum vector fields and the radial derivative
 * along the dilation flow. The group law itself is never used.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hardylab/autodiff.hpp"
#include "hardylab/test_function.hpp"

namespace hlab {

inline constexpr std::size_t max_cylindrical_dim = 4;
inline constexpr std::size_t max_group_dim = 3;

class CylindricalSpace {
public:
    CylindricalSpace(std::size_t n, std::size_t k) : n_(n), k_(k) {
        if (n == 0 || n > max_cylindrical_dim)
            throw InvalidInput("cylindrical space: n must be in [1, 4], got " + std::to_string(n));
        if (k < 1 || k > n)
            throw InvalidInput("cylindrical space: k must satisfy 1 <= k <= n");
    }

    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] std::size_t k() const { return k_; }

    /// (x', x'') with x' the first k coordinates.
    [[nodiscard]] std::pair<Point, Point> split(std::span<const double> x) const {
        check(x);
        return {Point(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k_)),
                Point(x.begin() + static_cast<std::ptrdiff_t>(k_), x.end())};
    }

    /// |x'|_k.
    [[nodiscard]] double norm_prime(std::span<const double> x) const {
        check(x);
        double s = 0.0;
        for (std::size_t i = 0; i < k_; ++i) s += x[i] * x[i];
        return std::sqrt(s);
    }

    void check(std::span<const double> x) const {
        if (x.size() != n_)
            throw InvalidInput("point has dimension " + std::to_string(x.size()) +
                               ", space has n = " + std::to_string(n_));
    }

private:
    std::size_t n_;
    std::size_t k_;
};

struct Rational {
    long num = 1;
    long den = 1;
    [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Rational reduce(Rational r) {
    const long g = std::gcd(r.num, r.den);
    return {r.num / g, r.den / g};
}

/// Least common multiple of positive rationals: lcm(numerators)/gcd(denominators).
inline Rational lcm(std::span<const Rational> rs) {
    long num = 1, den = 0;
    for (Rational r : rs) {
        r = reduce(r);
        num = std::lcm(num, r.num);
        den = std::gcd(den, r.den);
    }
    return reduce({num, den});
}

enum class NormKind { euclidean, anisotropic, koranyi };

inline std::string to_string(NormKind k) {
    switch (k) {
        case NormKind::euclidean: return "euclidean";
        case NormKind::anisotropic: return "anisotropic";
        case NormKind::koranyi: return "koranyi";
    }
    return "?";
}

/// First-stratum data of a step-2 stratified group: coordinates are
/// (x', t) with x' in R^N, t in R^{n-N}, and
///   X_j = d/dx'_j + sum_m a_{j,m}(x') d/dt_m,  a_{j,m}(x') = sum_i coeffs[j][m][i] x'_i.
struct StratifiedData {
    std::size_t N = 0;
    std::vector<std::vector<std::vector<double>>> coeffs;
};

class GroupStructure {
public:
    /// (R^n, +) with unit weights.
    static GroupStructure euclidean(std::size_t n, NormKind kind = NormKind::euclidean) {
        return GroupStructure(std::vector<Rational>(n, Rational{1, 1}), kind, std::nullopt);
    }

    static GroupStructure anisotropic(std::vector<Rational> weights) {
        return GroupStructure(std::move(weights), NormKind::anisotropic, std::nullopt);
    }

    /// Heisenberg group H^1 with X_1 = d_1 - (x_2/2) d_t, X_2 = d_2 + (x_1/2) d_t.
    static GroupStructure heisenberg(NormKind kind = NormKind::koranyi) {
        StratifiedData s;
        s.N = 2;
        s.coeffs = {{{0.0, -0.5}}, {{0.5, 0.0}}};
        return GroupStructure({{1, 1}, {1, 1}, {2, 1}}, kind, std::move(s));
    }

    GroupStructure(std::vector<Rational> weights, NormKind kind, std::optional<StratifiedData> strat)
        : weights_(std::move(weights)), kind_(kind), strat_(std::move(strat)) {
        const std::size_t n = weights_.size();
        if (n == 0 || n > max_group_dim)
            throw InvalidInput("group: dimension must be in [1, 3], got " + std::to_string(n));
        for (const auto& w : weights_)
            if (w.num <= 0 || w.den <= 0) throw InvalidInput("group: dilation weights must be positive");
        bool unit = true;
        for (const auto& w : weights_) unit = unit && w.num == w.den;
        if (kind_ == NormKind::euclidean && !unit)
            throw InvalidInput("group: euclidean norm needs unit weights");
        if (kind_ == NormKind::koranyi && !is_heisenberg_shape())
            throw InvalidInput("group: koranyi norm is defined on H^1 (weights 1,1,2)");
        Q_ = 0.0;
        for (const auto& w : weights_) Q_ += w.value();
        exponents_.resize(n);
        const Rational L = lcm(weights_);
        for (std::size_t i = 0; i < n; ++i) {
            const Rational w = reduce(weights_[i]);
            // 2L/w is an even integer since L is a multiple of w.
            exponents_[i] = static_cast<int>(2 * L.num * w.den / (L.den * w.num));
        }
        two_s_ = 2.0 * L.value();
        if (strat_) {
            const auto& s = *strat_;
            if (s.N == 0 || s.N >= n) throw InvalidInput("group: first stratum must be a proper subspace");
            if (s.coeffs.size() != s.N) throw InvalidInput("group: need one coefficient block per X_j");
            for (std::size_t i = 0; i < n; ++i) {
                const double expected = i < s.N ? 1.0 : 2.0;
                if (weights_[i].value() != expected)
                    throw InvalidInput("group: stratified weights must be 1 on x' and 2 on t");
            }
        }
    }

    [[nodiscard]] std::size_t n() const { return weights_.size(); }
    [[nodiscard]] const std::vector<Rational>& weights() const { return weights_; }
    [[nodiscard]] double weight(std::size_t i) const { return weights_[i].value(); }
    [[nodiscard]] double Q() const { return Q_; }
    [[nodiscard]] NormKind norm_kind() const { return kind_; }
    [[nodiscard]] const std::optional<StratifiedData>& stratified() const { return strat_; }
    /// First-stratum dimension (N); n when not stratified.
    [[nodiscard]] std::size_t first_stratum_dim() const { return strat_ ? strat_->N : n(); }

    void check(std::span<const double> x) const {
        if (x.size() != n())
            throw InvalidInput("point has dimension " + std::to_string(x.size()) +
                               ", group has n = " + std::to_string(n()));
    }

    [[nodiscard]] double quasi_norm(std::span<const double> x) const {
        check(x);
        switch (kind_) {
            case NormKind::euclidean: {
                double s = 0.0;
                for (double v : x) s += v * v;
                return std::sqrt(s);
            }
            case NormKind::anisotropic: {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]), exponents_[i]);
                return std::pow(s, 1.0 / two_s_);
            }
            case NormKind::koranyi: {
                const double r2 = x[0] * x[0] + x[1] * x[1];
                return std::pow(r2 * r2 + 16.0 * x[2] * x[2], 0.25);
            }
        }
        return 0.0;
    }

    [[nodiscard]] Point dilate(double lambda, std::span<const double> x) const {
        check(x);
        if (!(lambda > 0.0)) throw InvalidInput("dilate: lambda must be positive");
        Point y(x.begin(), x.end());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] *= std::pow(lambda, weight(i));
        return y;
    }

    /// Half-widths h_i with {|x| <= R} contained in prod [-h_i R^{nu_i}, h_i R^{nu_i}].
    [[nodiscard]] std::vector<double> unit_ball_half_widths() const {
        std::vector<double> h(n(), 1.0);
        if (kind_ == NormKind::koranyi) h[2] = 0.25;
        return h;
    }

    /// Even exponents 2s/nu_i of the anisotropic norm.
    [[nodiscard]] const std::vector<int>& norm_exponents() const { return exponents_; }

private:
    [[nodiscard]] bool is_heisenberg_shape() const {
        return weights_.size() == 3 && weights_[0].value() == 1.0 && weights_[1].value() == 1.0 &&
               weights_[2].value() == 2.0;
    }

    std::vector<Rational> weights_;
    NormKind kind_;
    std::optional<StratifiedData> strat_;
    double Q_ = 0.0;
    double two_s_ = 2.0;
    std::vector<int> exponents_;
};

/// The group's quasi-norm as an expression (for test functions built on it).
inline Expr quasi_norm_expr(const GroupStructure& g) {
    switch (g.norm_kind()) {
        case NormKind::euclidean:
            return euclidean_norm_expr(0, g.n());
        case NormKind::anisotropic: {
            const auto& e = g.norm_exponents();
            Expr sum = powi(Expr::var(0), e[0]);
            for (std::size_t i = 1; i < g.n(); ++i) sum = sum + powi(Expr::var(i), e[i]);
            // 2s = exponent_i * nu_i for any i.
            return pow(sum, 1.0 / (static_cast<double>(e[0]) * g.weight(0)));
        }
        case NormKind::koranyi: {
            const Expr r2 = powi(Expr::var(0), 2) + powi(Expr::var(1), 2);
            return pow(powi(r2, 2) + 16.0 * powi(Expr::var(2), 2), 0.25);
        }
    }
    return {};
}

/// Vector field sum_j x'_j X_j evaluated at x, as a direction in R^n. On a
/// step-2 group the t-components are sum_j x'_j a_{j,m}(x').
inline Point horizontal_euler_direction(const GroupStructure& g, std::span<const double> x) {
    g.check(x);
    const auto& s = g.stratified();
    if (!s) throw InvalidInput("group carries no stratified data");
    Point v(g.n(), 0.0);
    for (std::size_t j = 0; j < s->N; ++j) v[j] = x[j];
    for (std::size_t j = 0; j < s->N; ++j)
        for (std::size_t m = 0; m < s->coeffs[j].size(); ++m) {
            double a = 0.0;
            for (std::size_t i = 0; i < s->N; ++i) a += s->coeffs[j][m][i] * x[i];
            v[s->N + m] += x[j] * a;
        }
    return v;
}

/// (X_1 f, ..., X_N f)(x).
inline std::vector<complex> horizontal_gradient(const GroupStructure& g, const TestFunction& f,
                                                std::span<const double> x) {
    g.check(x);
    const auto& s = g.stratified();
    if (!s) throw InvalidInput("horizontal_gradient: group carries no stratified data");
    const std::vector<complex> d = f.gradient(x);
    std::vector<complex> out(s->N);
    for (std::size_t j = 0; j < s->N; ++j) {
        complex v = d[j];
        for (std::size_t m = 0; m < s->coeffs[j].size(); ++m) {
            double a = 0.0;
            for (std::size_t i = 0; i < s->N; ++i) a += s->coeffs[j][m][i] * x[i];
            v += a * d[s->N + m];
        }
        out[j] = v;
    }
    return out;
}

/// Value f(x) and R_{|x|} f(x) = d/ds f(delta_s y) at s = |x|, y = delta_{1/|x|} x,
/// differentiated exactly along the dilation flow.
inline std::pair<complex, complex> radial_derivative_with_value(const GroupStructure& g,
                                                                 const TestFunction& f,
                                                                 std::span<const double> x) {
    const double r = g.quasi_norm(x);
    if (r == 0.0) throw InvalidInput("radial_derivative: singular point x = 0");
    if (!f.support.contains(x) || f.is_zero()) return {{0.0, 0.0}, {0.0, 0.0}};
    const Point y = g.dilate(1.0 / r, x);
    const Dual<1> s = Dual<1>::variable(complex(r, 0.0), 0);
    std::array<Dual<1>, max_group_dim> vars;
    for (std::size_t i = 0; i < g.n(); ++i) vars[i] = hlab::pow(s, g.weight(i)) * Dual<1>(y[i]);
    const Dual<1> v = f.eval<1>(std::span<const Dual<1>>(vars.data(), g.n()), x);
    return {v.value(), v.tangent(0)};
}

inline complex radial_derivative(const GroupStructure& g, const TestFunction& f,
                                 std::span<const double> x) {
    return radial_derivative_with_value(g, f, x).second;
}

/// x' . grad_k f(x).
inline complex cylindrical_radial_term(const CylindricalSpace& s, const TestFunction& f,
                                       std::span<const double> x) {
    s.check(x);
    if (s.norm_prime(x) == 0.0) throw InvalidInput("cylindrical_radial_term: x' = 0");
    Point v(s.n(), 0.0);
    for (std::size_t j = 0; j < s.k(); ++j) v[j] = x[j];
    return f.directional(x, v).second;
}

/// div_k (x' / |x'|^alpha) evaluated by dual numbers.
inline double weighted_divergence_check(const CylindricalSpace& s, double alpha,
                                        std::span<const double> x) {
    s.check(x);
    if (s.norm_prime(x) == 0.0) throw InvalidInput("weighted_divergence_check: x' = 0");
    constexpr std::size_t K = max_cylindrical_dim;
    std::array<Dual<K>, K> v;
    for (std::size_t j = 0; j < s.k(); ++j) v[j] = Dual<K>::variable(complex(x[j], 0.0), j);
    Dual<K> r2(0.0);
    for (std::size_t j = 0; j < s.k(); ++j) r2 += v[j] * v[j];
    const Dual<K> scale = hlab::pow(r2, -0.5 * alpha);
    double div = 0.0;
    for (std::size_t j = 0; j < s.k(); ++j) div += (v[j] * scale).tangent(j).real();
    return div;
}

}  // namespace hlab
