#pragma once

// Factories for admissible test functions: smooth, compactly supported away
// from the singular set ({x' = 0}, {0}, or the sphere of radius R), built as
// expressions so derivatives come from dual numbers. Every factory puts the
// cutoff factor first in each product; outside the support the evaluator
// short-circuits before touching singular profile factors.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hardylab/expression.hpp"
#include "hardylab/spaces.hpp"
#include "hardylab/test_function.hpp"

namespace hlab {

/// exp(-1/(1-s^2)) in the variable s = (2v - lo - hi)/(hi - lo).
inline Expr interval_bump(const Expr& v, double lo, double hi) {
    return bump((2.0 * v - (lo + hi)) / (hi - lo));
}

inline Interval symmetric(double h) { return {-h, h}; }

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

inline Support radial_x_prime_support(const CylindricalSpace& s, double r0, double r1, double tail_width) {
    Support sup;
    for (std::size_t i = 0; i < s.k(); ++i) sup.box.push_back(symmetric(r1));
    for (std::size_t i = s.k(); i < s.n(); ++i) sup.box.push_back(symmetric(tail_width));
    const std::size_t k = s.k();
    sup.radial = [k](std::span<const double> x) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < k; ++i) r2 += x[i] * x[i];
        return std::sqrt(r2);
    };
    sup.r_min = r0;
    sup.r_max = r1;
    sup.radial_name = "x'";
    return sup;
}

inline Expr tail_bumps(const CylindricalSpace& s, double width) {
    Expr e(1.0);
    bool first = true;
    for (std::size_t i = s.k(); i < s.n(); ++i) {
        Expr b = interval_bump(Expr::var(i), -width, width);
        e = first ? b : e * b;
        first = false;
    }
    return e;
}

}  // namespace detail

/// Real nonnegative bump: annular profile in |x'| on (r0, r1) times a bump
/// in each x'' coordinate on (-width, width).
inline TestFunction make_annular_bump(const CylindricalSpace& s, double r0, double r1, double tail_width = 1.0) {
    if (!(r0 > 0.0)) throw InvalidInput("make_annular_bump: r0 must be positive");
    if (!(r1 > r0)) throw InvalidInput("make_annular_bump: need r1 > r0");
    if (s.n() > s.k() && !(tail_width > 0.0)) throw InvalidInput("make_annular_bump: x'' width must be positive");
    TestFunction f;
    f.dim = s.n();
    f.expr = interval_bump(euclidean_norm_expr(0, s.k()), r0, r1);
    if (s.n() > s.k()) f.expr = f.expr * detail::tail_bumps(s, tail_width);
    f.support = detail::radial_x_prime_support(s, r0, r1, tail_width);
    f.radial_in_x_prime = true;
    f.radial_dims = s.k();
    f.label = "annular-bump(n=" + std::to_string(s.n()) + ",k=" + std::to_string(s.k()) + ",r0=" +
              detail::fmt(r0) + ",r1=" + detail::fmt(r1) + ",w=" + detail::fmt(tail_width) + ")";
    return f;
}

/// Product of interval bumps over a box.
inline TestFunction make_box_bump(const std::vector<Interval>& box) {
    if (box.empty()) throw InvalidInput("make_box_bump: empty box");
    TestFunction f;
    f.dim = box.size();
    std::string label = "box-bump(";
    for (std::size_t i = 0; i < box.size(); ++i) {
        if (!(box[i].hi > box[i].lo)) throw InvalidInput("make_box_bump: empty interval");
        Expr b = interval_bump(Expr::var(i), box[i].lo, box[i].hi);
        f.expr = i == 0 ? b : f.expr * b;
        label += (i ? "," : "") + std::string("[") + detail::fmt(box[i].lo) + "," + detail::fmt(box[i].hi) + "]";
    }
    f.support.box = box;
    f.label = label + ")";
    return f;
}

/// Bump in the quasi-norm annulus r0 < |x| < r1 of a homogeneous group.
inline TestFunction make_quasi_annular_bump(const GroupStructure& g, double r0, double r1) {
    if (!(r0 > 0.0)) throw InvalidInput("make_quasi_annular_bump: r0 must be positive");
    if (!(r1 > r0)) throw InvalidInput("make_quasi_annular_bump: need r1 > r0");
    TestFunction f;
    f.dim = g.n();
    f.expr = interval_bump(quasi_norm_expr(g), r0, r1);
    const auto h = g.unit_ball_half_widths();
    for (std::size_t i = 0; i < g.n(); ++i) f.support.box.push_back(symmetric(h[i] * std::pow(r1, g.weight(i))));
    f.support.radial = [g](std::span<const double> x) { return g.quasi_norm(x); };
    f.support.r_min = r0;
    f.support.r_max = r1;
    f.support.radial_name = "quasi-norm";
    f.label = "quasi-annular-bump(" + to_string(g.norm_kind()) + ",r0=" + detail::fmt(r0) + ",r1=" +
              detail::fmt(r1) + ")";
    return f;
}

/// base * exp(i theta); support unchanged.
inline TestFunction make_phase_modulated(const TestFunction& base, const Expr& theta, const std::string& name = "theta") {
    TestFunction f = base;
    if (base.is_zero()) return f;
    f.expr = base.expr * exp(Expr(complex(0.0, 1.0)) * theta);
    f.radial_in_x_prime = false;
    f.label = "phase(" + name + ")*" + base.label;
    return f;
}

inline TestFunction scaled(const TestFunction& base, complex lambda) {
    TestFunction f = base;
    f.expr = lambda == complex(0.0, 0.0) ? Expr(0.0) : base.expr * Expr(lambda);
    f.label = "scaled*" + base.label;
    return f;
}

enum class ExtremizerKind { h1, h2, vanishing_angular };

inline std::string to_string(ExtremizerKind k) {
    switch (k) {
        case ExtremizerKind::h1: return "h1";
        case ExtremizerKind::h2: return "h2";
        case ExtremizerKind::vanishing_angular: return "vanishing-angular";
    }
    return "?";
}

/// Transition profile of the extremizer cutoff.
///  log_scale:   1 on [eps, 1/eps], support (eps^2, eps^-2), smooth step in log v.
///  fixed_ratio: 1 on [eps, 1/eps], support (eps/2, 2/eps), smooth step in v.
enum class Taper { log_scale, fixed_ratio };

inline std::string to_string(Taper t) { return t == Taper::log_scale ? "log-scale" : "fixed-ratio"; }

struct ExtremizerOptions {
    Taper taper = Taper::log_scale;
    /// 0: phi = 1; 1: phi = 1 + w_1/2; 2: additionally + w_1 w_2 / 4, with w = x'/|x'|.
    int angular_order = 0;
    double tail_width = 1.0;
    complex amplitude{1.0, 0.0};
};

/// Support (open) of the cutoff in its variable.
inline Interval cutoff_support(double eps, Taper taper) {
    return taper == Taper::log_scale ? Interval{eps * eps, 1.0 / (eps * eps)} : Interval{0.5 * eps, 2.0 / eps};
}

/// Smooth cutoff in v: 1 on [eps, 1/eps], zero outside cutoff_support.
inline Expr cutoff_expr(const Expr& v, double eps, Taper taper) {
    if (taper == Taper::log_scale) {
        const double L = -std::log(eps);
        const Expr lv = log(v);
        return smooth_step((lv + 2.0 * L) / L) * smooth_step((2.0 * L - lv) / L);
    }
    return smooth_step((v - 0.5 * eps) / (0.5 * eps)) * smooth_step((2.0 / eps - v) / (1.0 / eps));
}

/// Low-order angular factor on S^{k-1}; strictly positive.
inline Expr angular_factor(std::size_t k, int order) {
    if (order <= 0) return Expr(1.0);
    const Expr r = euclidean_norm_expr(0, k);
    Expr phi = 1.0 + 0.5 * (Expr::var(0) / r);
    if (order >= 2 && k >= 2) phi = phi + 0.25 * (Expr::var(0) / r) * (Expr::var(1) / r);
    return phi;
}

/// Mollified extremizer:
///  h1: |x'|^{-(k-alpha)/p} * phi, cutoff in |x'|;
///  h2: (log R/|x'|)^{(beta+p)/p} * phi, cutoff in s = log(R/|x'|);
///  vanishing-angular: h1 with angular order max(1, options.angular_order).
/// For n > k a bump in x'' of half-width options.tail_width is attached.
inline TestFunction make_extremizer(const CylindricalSpace& s, ExtremizerKind kind, double p, double alpha,
                                    double beta, double R, double eps, ExtremizerOptions opt = {}) {
    if (!(p > 1.0)) throw InvalidInput("make_extremizer: p must exceed 1");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("make_extremizer: eps must lie in (0, 1)");
    const double k = static_cast<double>(s.k());
    if (kind == ExtremizerKind::vanishing_angular) opt.angular_order = std::max(1, opt.angular_order);
    const bool log_family = kind == ExtremizerKind::h2;
    if (!log_family && alpha == k) throw InvalidInput("make_extremizer: alpha = k is degenerate for h1");
    if (log_family && beta == -p) throw InvalidInput("make_extremizer: beta = -p is degenerate for h2");
    if (log_family && !(R > 0.0)) throw InvalidInput("make_extremizer: R must be positive");

    const Interval cut = cutoff_support(eps, opt.taper);
    double r_lo = cut.lo, r_hi = cut.hi;
    if (log_family) {
        r_lo = R * std::exp(-cut.hi);
        r_hi = R * std::exp(-cut.lo);
        if (!(r_lo > 1e-300)) throw InvalidInput("make_extremizer: eps too small for the h2 family in double precision");
    }
    TestFunction f;
    f.dim = s.n();
    f.support = detail::radial_x_prime_support(s, r_lo, r_hi, opt.tail_width);
    f.radial_dims = s.k();
    f.radial_in_x_prime = opt.angular_order == 0;
    std::string label = to_string(kind) + "(n=" + std::to_string(s.n()) + ",k=" + std::to_string(s.k()) +
                        ",p=" + detail::fmt(p) + ",alpha=" + detail::fmt(alpha);
    if (log_family) label += ",beta=" + detail::fmt(beta) + ",R=" + detail::fmt(R);
    label += ",eps=" + detail::fmt(eps) + ",taper=" + to_string(opt.taper) + "[" + detail::fmt(cut.lo) + "," +
             detail::fmt(cut.hi) + "],phi=" + std::to_string(opt.angular_order) + ")";
    f.label = label;
    if (opt.amplitude == complex(0.0, 0.0)) {
        f.expr = Expr(0.0);
        return f;
    }
    const Expr r = euclidean_norm_expr(0, s.k());
    Expr e;
    if (log_family) {
        const Expr sv = log(Expr(R) / r);
        e = cutoff_expr(sv, eps, opt.taper) * pow(sv, (beta + p) / p);
    } else {
        e = cutoff_expr(r, eps, opt.taper) * pow(r, -(k - alpha) / p);
    }
    if (s.n() > s.k()) e = e * detail::tail_bumps(s, opt.tail_width);
    if (opt.angular_order > 0) e = e * angular_factor(s.k(), opt.angular_order);
    if (opt.amplitude != complex(1.0, 0.0)) e = e * Expr(opt.amplitude);
    f.expr = e;
    return f;
}

/// Closed-form singular profile of the family at |x'| = r (no cutoff, phi = 1).
inline double extremizer_profile(ExtremizerKind kind, std::size_t k, double p, double alpha, double beta, double R,
                                 double r) {
    if (kind == ExtremizerKind::h2) return std::pow(std::log(R / r), (beta + p) / p);
    return std::pow(r, -(static_cast<double>(k) - alpha) / p);
}

namespace detail {

inline Expr random_modulation(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double amp = 0.5 + 1.5 * u(rng);
    const double phase0 = 2.0 * std::numbers::pi * u(rng);
    Expr lin(complex(0.0, phase0));
    for (std::size_t i = 0; i < n; ++i) {
        const double gamma = -0.3 + 0.6 * u(rng);
        const double theta = -1.0 + 2.0 * u(rng);
        lin = lin + Expr(complex(gamma, theta)) * Expr::var(i);
    }
    return Expr(amp) * exp(lin);
}

}  // namespace detail

/// Random admissible function on a cylindrical space: annular bump in |x'|
/// inside `radial_range`, shifted bumps in x'', modulus exp(gamma.x), phase
/// exp(i theta.x). Nonvanishing in the interior of its support.
inline TestFunction random_cylindrical(const CylindricalSpace& s, std::uint64_t seed,
                                       Interval radial_range = {0.4, 2.4}) {
    if (!(radial_range.lo > 0.0 && radial_range.hi > radial_range.lo))
        throw InvalidInput("random_cylindrical: radial range must satisfy 0 < lo < hi");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double span = radial_range.width();
    const double r0 = radial_range.lo + 0.25 * span * u(rng);
    const double r1 = radial_range.hi - 0.25 * span * u(rng);
    Expr e = interval_bump(euclidean_norm_expr(0, s.k()), r0, r1);
    Support sup = detail::radial_x_prime_support(s, r0, r1, 1.0);
    for (std::size_t i = s.k(); i < s.n(); ++i) {
        const double c = -0.2 + 0.4 * u(rng);
        const double w = 0.8 + 0.4 * u(rng);
        e = e * interval_bump(Expr::var(i), c - w, c + w);
        sup.box[i] = {c - w, c + w};
    }
    e = e * detail::random_modulation(s.n(), rng);
    TestFunction f;
    f.dim = s.n();
    f.expr = e;
    f.support = sup;
    f.radial_dims = s.k();
    f.label = "random-cylindrical(n=" + std::to_string(s.n()) + ",k=" + std::to_string(s.k()) +
              ",seed=" + std::to_string(seed) + ")";
    return f;
}

/// Random admissible function on a group: product of bumps on a box that
/// avoids the singular set and lies inside the quasi-ball of radius `scale`
/// (coordinate i scaled by scale^{nu_i}). The box is
/// x_1 in ~[0.3, 0.7], |x_i| <~ 0.25 for other weight-1 coordinates and
/// |x_i| <~ 0.15 for heavier ones.
inline TestFunction random_group(const GroupStructure& g, std::uint64_t seed, double scale = 1.0) {
    if (!(scale > 0.0)) throw InvalidInput("random_group: scale must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Interval> box(g.n());
    box[0] = {0.25 + 0.1 * u(rng), 0.65 + 0.05 * u(rng)};
    for (std::size_t i = 1; i < g.n(); ++i) {
        const double h = (g.weight(i) > 1.0 ? 0.15 : 0.25) * (0.8 + 0.2 * u(rng));
        const double c = 0.1 * h * (2.0 * u(rng) - 1.0);
        box[i] = {c - h, c + h};
    }
    for (std::size_t i = 0; i < g.n(); ++i) {
        const double sc = std::pow(scale, g.weight(i));
        box[i] = {box[i].lo * sc, box[i].hi * sc};
    }
    TestFunction f = make_box_bump(box);
    f.expr = f.expr * detail::random_modulation(g.n(), rng);
    f.label = "random-group(" + to_string(g.norm_kind()) + ",n=" + std::to_string(g.n()) + ",seed=" +
              std::to_string(seed) + ",scale=" + detail::fmt(scale) + ")";
    return f;
}

/// Largest quasi-norm over the corners of f's support box (the quasi-norms
/// offered are monotone in each |x_i|).
inline double max_quasi_norm_on_support(const GroupStructure& g, const TestFunction& f) {
    Point corner(g.n());
    for (std::size_t i = 0; i < g.n(); ++i)
        corner[i] = std::max(std::abs(f.support.box[i].lo), std::abs(f.support.box[i].hi));
    return g.quasi_norm(corner);
}

/// The library used for gradient checks: every factory at representative
/// parameters across the supported spaces.
inline std::vector<TestFunction> test_function_library() {
    std::vector<TestFunction> lib;
    const std::vector<std::pair<std::size_t, std::size_t>> spaces = {{1, 1}, {2, 1}, {2, 2}, {3, 2}, {3, 3}, {4, 4}};
    std::uint64_t seed = 101;
    for (auto [n, k] : spaces) {
        const CylindricalSpace s(n, k);
        lib.push_back(make_annular_bump(s, 1.0, 2.0, 1.0));
        lib.push_back(random_cylindrical(s, seed++));
        ExtremizerOptions o;
        lib.push_back(make_extremizer(s, ExtremizerKind::h1, 2.0, 0.0, 0.0, 1.0, 0.5, o));
        o.angular_order = 2;
        o.taper = Taper::fixed_ratio;
        lib.push_back(make_extremizer(s, ExtremizerKind::h1, 3.0, -1.0, 0.0, 1.0, 0.5, o));
        lib.push_back(make_extremizer(s, ExtremizerKind::h2, 2.0, static_cast<double>(k) - 2.0, -1.0, 1.0, 0.5));
    }
    const CylindricalSpace s32(3, 2);
    lib.push_back(make_phase_modulated(make_annular_bump(s32, 0.5, 1.5, 0.8),
                                       Expr::var(0) * Expr::var(1) + sin(Expr::var(2)), "x1*x2+sin(x3)"));
    const std::vector<GroupStructure> groups = {
        GroupStructure::euclidean(2), GroupStructure::euclidean(3),
        GroupStructure::anisotropic({{1, 1}, {2, 1}}), GroupStructure::anisotropic({{1, 1}, {1, 1}, {2, 1}}),
        GroupStructure::heisenberg()};
    for (const auto& g : groups) {
        lib.push_back(make_quasi_annular_bump(g, 0.5, 1.0));
        lib.push_back(random_group(g, seed++));
    }
    return lib;
}

}  // namespace hlab
