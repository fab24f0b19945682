#pragma once

/**
 * @file quadrature.hpp
 * @brief Tensor-product quadrature for compactly supported integrands on
 *        the cylindrical space (polar in x') and on homogeneous groups
 *        (Cartesian, Haar measure = Lebesgue measure).
 *
 * Integrands are vector-valued: a callback fills one slot per component, so
 * every term of an identity is accumulated from a single pass over the nodes.
 * Each result carries an error estimate from two refinement levels (node
 * counts N/2 and N); levels are doubled until the estimate meets
 * target_rel_err or max_refinements is exhausted. Summation order is fixed,
 * so results are bit-reproducible for a given spec.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hardylab/spaces.hpp"
#include "hardylab/test_function.hpp"

namespace hlab {

/// Thrown when an integral misses its tolerance at maximum refinement, or
/// the integrand produces NaN.
class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Scheme { gauss_legendre, tanh_sinh };
/// Radial node placement: uniform in r, in log r, or in log log(c/r) for a
/// centre c > r_max (logarithmic weights at the sphere of radius c).
enum class RadialMap { linear, logarithmic, log_log };

inline std::string to_string(Scheme s) { return s == Scheme::gauss_legendre ? "gauss-legendre" : "tanh-sinh"; }
inline std::string to_string(RadialMap m) {
    switch (m) {
        case RadialMap::linear: return "linear";
        case RadialMap::logarithmic: return "logarithmic";
        case RadialMap::log_log: return "log-log";
    }
    return "?";
}

struct QuadratureSpec {
    std::size_t radial_nodes = 48;
    std::size_t angular_nodes = 24;
    std::size_t box_nodes = 48;
    /// Each axis is split into this many equal panels carrying the nodes.
    std::size_t panels = 1;
    Scheme scheme = Scheme::gauss_legendre;
    RadialMap radial_map = RadialMap::linear;
    /// Outer radius beyond the declared support; unused for compact supports.
    double truncation = 0.0;
    double target_rel_err = 1e-9;
    int max_refinements = 2;
    /// Centre c of the log-log map.
    double log_center = 1.0;

    void validate() const {
        if (radial_nodes < 4 || angular_nodes < 4 || box_nodes < 4)
            throw InvalidInput("quadrature: node counts must be >= 4");
        if (panels < 1) throw InvalidInput("quadrature: panels must be >= 1");
        if (!(target_rel_err > 0.0 && target_rel_err <= 1e-2))
            throw InvalidInput("quadrature: target_rel_err must lie in (0, 1e-2]");
        if (max_refinements < 0) throw InvalidInput("quadrature: max_refinements must be >= 0");
        if (!(log_center > 0.0) || !std::isfinite(log_center))
            throw InvalidInput("quadrature: log_center must be a positive number");
    }

    [[nodiscard]] QuadratureSpec scaled(double factor) const {
        QuadratureSpec s = *this;
        // Floor 2, not 4: the coarse level of a 4-node spec must still differ from it.
        auto sc = [factor](std::size_t v) {
            return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(static_cast<double>(v) * factor)));
        };
        s.radial_nodes = sc(radial_nodes);
        s.angular_nodes = sc(angular_nodes);
        s.box_nodes = sc(box_nodes);
        return s;
    }
};

struct IntegralResult {
    double value = 0.0;
    /// |I_N - I_{N/2}|, floored at the rounding level of the sum.
    double err_estimate = 0.0;
    bool converged = true;
    std::size_t nodes = 0;
    int refinements = 0;
};

struct Node1D {
    double x;
    double w;
};

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n; cached.
inline const std::vector<Node1D>& gauss_legendre(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::vector<Node1D>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<Node1D> rule(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * static_cast<double>(j) - 1.0) * z * p1 - (static_cast<double>(j) - 1.0) * p2) /
                     static_cast<double>(j);
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule[i] = {-z, w};
        rule[n - 1 - i] = {z, w};
    }
    if (n % 2 == 1) rule[n / 2].x = 0.0;
    return cache.emplace(n, std::move(rule)).first->second;
}

/// Tanh-sinh rule on [-1, 1] with n equispaced abscissae in [-t_max, t_max].
inline std::vector<Node1D> tanh_sinh(std::size_t n) {
    constexpr double t_max = 3.15;
    constexpr double half_pi = 0.5 * std::numbers::pi;
    std::vector<Node1D> rule;
    rule.reserve(n);
    const double h = 2.0 * t_max / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = -t_max + h * static_cast<double>(j);
        const double u = half_pi * std::sinh(t);
        const double ch = std::cosh(u);
        rule.push_back({std::tanh(u), h * half_pi * std::cosh(t) / (ch * ch)});
    }
    return rule;
}

/// Composite rule on [a, b]: `panels` equal panels with n/panels nodes each.
inline std::vector<Node1D> rule_on(Scheme scheme, std::size_t n, std::size_t panels, double a, double b) {
    panels = std::max<std::size_t>(1, std::min(panels, n / 2));
    const std::size_t per = std::max<std::size_t>(2, n / panels);
    const std::vector<Node1D> base = scheme == Scheme::gauss_legendre ? gauss_legendre(per) : tanh_sinh(per);
    std::vector<Node1D> out;
    out.reserve(per * panels);
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + width * static_cast<double>(p);
        const double half = 0.5 * width;
        for (const auto& nd : base) out.push_back({lo + half * (1.0 + nd.x), half * nd.w});
    }
    return out;
}

inline std::vector<Node1D> periodic_trapezoid(std::size_t n, double a, double b) {
    std::vector<Node1D> out(n);
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = {a + h * static_cast<double>(j), h};
    return out;
}

/// Area of the unit sphere S^{k-1} in R^k.
inline double sphere_area(std::size_t k) {
    constexpr double pi = std::numbers::pi;
    switch (k) {
        case 1: return 2.0;
        case 2: return 2.0 * pi;
        case 3: return 4.0 * pi;
        case 4: return 2.0 * pi * pi;
        default: break;
    }
    throw InvalidInput("sphere_area: k must be in [1, 4]");
}

/// Integration domain for the cylindrical engine: r_min <= |x'| <= r_max
/// times a box in x''.
struct CylindricalDomain {
    double r_min = 0.0;
    double r_max = 0.0;
    std::vector<Interval> tail;
    /// Integrand depends on x' only through |x'|: exact sphere area is used.
    bool radial_in_x_prime = false;
};

/// Domain covering the support of f in the given space.
inline CylindricalDomain cylindrical_domain(const CylindricalSpace& s, const TestFunction& f) {
    if (f.dim != s.n()) throw InvalidInput("test function dimension does not match the space");
    CylindricalDomain d;
    const auto& box = f.support.box;
    double lo2 = 0.0, hi2 = 0.0;
    for (std::size_t i = 0; i < s.k(); ++i) {
        const Interval iv = box.at(i);
        const double a = std::abs(iv.lo), b = std::abs(iv.hi);
        const double mn = (iv.lo <= 0.0 && iv.hi >= 0.0) ? 0.0 : std::min(a, b);
        lo2 += mn * mn;
        hi2 += std::max(a, b) * std::max(a, b);
    }
    d.r_min = std::sqrt(lo2);
    d.r_max = std::sqrt(hi2);
    if (f.support.radial && f.radial_dims == s.k() && f.support.radial_name == "x'") {
        d.r_min = std::max(d.r_min, f.support.r_min);
        d.r_max = std::min(d.r_max, f.support.r_max);
    }
    for (std::size_t i = s.k(); i < s.n(); ++i) d.tail.push_back(box.at(i));
    d.radial_in_x_prime = f.radial_in_x_prime && f.radial_dims == s.k();
    return d;
}

namespace detail {

struct LevelSums {
    std::vector<double> sum;
    std::vector<double> abs_sum;
    std::size_t nodes = 0;
};

struct Direction {
    std::array<double, max_cylindrical_dim> u{};
    double w = 0.0;
};

inline std::vector<Direction> sphere_directions(std::size_t k, std::size_t m, bool radial) {
    std::vector<Direction> dirs;
    if (radial) {
        Direction d;
        d.u[0] = 1.0;
        d.w = sphere_area(k);
        dirs.push_back(d);
        return dirs;
    }
    constexpr double pi = std::numbers::pi;
    switch (k) {
        case 1:
            for (double sgn : {-1.0, 1.0}) {
                Direction d;
                d.u[0] = sgn;
                d.w = 1.0;
                dirs.push_back(d);
            }
            break;
        case 2:
            for (const auto& t : periodic_trapezoid(m, 0.0, 2.0 * pi)) {
                Direction d;
                d.u[0] = std::cos(t.x);
                d.u[1] = std::sin(t.x);
                d.w = t.w;
                dirs.push_back(d);
            }
            break;
        case 3: {
            const auto& polar = gauss_legendre(m);
            const auto azimuth = periodic_trapezoid(2 * m, 0.0, 2.0 * pi);
            for (const auto& c : polar) {
                const double st = std::sqrt(std::max(0.0, 1.0 - c.x * c.x));
                for (const auto& a : azimuth) {
                    Direction d;
                    d.u[0] = st * std::cos(a.x);
                    d.u[1] = st * std::sin(a.x);
                    d.u[2] = c.x;
                    d.w = c.w * a.w;
                    dirs.push_back(d);
                }
            }
            break;
        }
        default:
            throw InvalidInput("cylindrical quadrature: k = 4 supports only integrands radial in x'");
    }
    return dirs;
}

/// Visit every point of a tensor grid given per-axis rules; `fn(x, w)`.
template <class F>
void tensor_walk(const std::vector<std::vector<Node1D>>& axes, std::size_t offset, std::span<double> x,
                 double w, F&& fn, std::size_t axis = 0) {
    if (axis == axes.size()) {
        fn(std::span<const double>(x.data(), x.size()), w);
        return;
    }
    for (const auto& nd : axes[axis]) {
        x[offset + axis] = nd.x;
        tensor_walk(axes, offset, x, w * nd.w, fn, axis + 1);
    }
}

template <class Level>
std::vector<IntegralResult> refine(const QuadratureSpec& spec, std::size_t ncomp,
                                   std::span<const std::size_t> scale_group, Level&& level) {
    spec.validate();
    QuadratureSpec fine = spec;
    QuadratureSpec coarse = spec.scaled(0.5);
    LevelSums lo = level(coarse);
    std::vector<IntegralResult> out(ncomp);
    for (int ref = 0;; ++ref) {
        LevelSums hi = level(fine);
        for (std::size_t c = 0; c < ncomp; ++c)
            if (!std::isfinite(hi.sum[c])) throw NonConvergence("integrand produced a non-finite value");
        // Scale per group: the largest magnitude among components sharing it.
        std::vector<double> scale(ncomp, 0.0);
        for (std::size_t c = 0; c < ncomp; ++c) {
            double s = 0.0;
            const std::size_t g = scale_group.empty() ? c : scale_group[c];
            for (std::size_t d = 0; d < ncomp; ++d)
                if ((scale_group.empty() ? d : scale_group[d]) == g) s = std::max(s, std::abs(hi.sum[d]));
            scale[c] = s;
        }
        bool ok = true;
        for (std::size_t c = 0; c < ncomp; ++c) {
            const double floor = 64.0 * std::numeric_limits<double>::epsilon() * hi.abs_sum[c];
            const double diff = std::abs(hi.sum[c] - lo.sum[c]);
            out[c].value = hi.sum[c];
            out[c].err_estimate = std::max(diff, floor);
            out[c].nodes = hi.nodes;
            out[c].refinements = ref;
            if (diff > std::max(spec.target_rel_err * scale[c], floor)) ok = false;
        }
        if (ok || ref >= spec.max_refinements) {
            for (auto& r : out) r.converged = ok;
            return out;
        }
        lo = std::move(hi);
        coarse = fine;
        fine = fine.scaled(2.0);
    }
}

}  // namespace detail

/// Integral over R^n of a vector-valued integrand supported in `dom`,
/// in coordinates x = (r u, x''), dx = r^{k-1} dr du dx''.
/// `fn(x, out)` must fill out[0..ncomp).
template <class F>
std::vector<IntegralResult> integrate_cylindrical(const CylindricalSpace& space, const CylindricalDomain& dom,
                                                  const QuadratureSpec& spec, std::size_t ncomp, F&& fn,
                                                  std::span<const std::size_t> scale_group = {}) {
    if (!(dom.r_min >= 0.0 && dom.r_max > dom.r_min))
        throw InvalidInput("cylindrical quadrature: need 0 <= r_min < r_max");
    if (dom.tail.size() != space.n() - space.k())
        throw InvalidInput("cylindrical quadrature: x'' box has wrong dimension");
    if (spec.radial_map == RadialMap::logarithmic && !(dom.r_min > 0.0))
        throw InvalidInput("cylindrical quadrature: logarithmic map needs r_min > 0");
    if (spec.radial_map == RadialMap::log_log && !(dom.r_min > 0.0 && dom.r_max < spec.log_center))
        throw InvalidInput("cylindrical quadrature: log-log map needs 0 < r_min < r_max < log_center");
    const std::size_t n = space.n(), k = space.k();

    auto level = [&](const QuadratureSpec& q) {
        detail::LevelSums acc;
        acc.sum.assign(ncomp, 0.0);
        acc.abs_sum.assign(ncomp, 0.0);
        std::vector<Node1D> radial;
        if (q.radial_map == RadialMap::linear) {
            radial = rule_on(q.scheme, q.radial_nodes, q.panels, dom.r_min, dom.r_max);
        } else if (q.radial_map == RadialMap::logarithmic) {
            radial = rule_on(q.scheme, q.radial_nodes, q.panels, std::log(dom.r_min), std::log(dom.r_max));
            for (auto& nd : radial) {
                nd.x = std::exp(nd.x);
                nd.w *= nd.x;
            }
        } else {
            // r = c exp(-e^u), |dr/du| = r e^u.
            const double c = q.log_center;
            radial = rule_on(q.scheme, q.radial_nodes, q.panels, std::log(std::log(c / dom.r_max)),
                             std::log(std::log(c / dom.r_min)));
            for (auto& nd : radial) {
                const double s = std::exp(nd.x);
                nd.x = c * std::exp(-s);
                nd.w *= nd.x * s;
            }
        }
        const auto dirs = detail::sphere_directions(k, q.angular_nodes, dom.radial_in_x_prime);
        std::vector<std::vector<Node1D>> tail_axes;
        for (const auto& iv : dom.tail) tail_axes.push_back(rule_on(q.scheme, q.box_nodes, q.panels, iv.lo, iv.hi));

        std::vector<double> x(n, 0.0), vals(ncomp, 0.0), part(ncomp), part_abs(ncomp);
        for (const auto& rn : radial) {
            std::fill(part.begin(), part.end(), 0.0);
            std::fill(part_abs.begin(), part_abs.end(), 0.0);
            const double rw = rn.w * std::pow(rn.x, static_cast<double>(k) - 1.0);
            for (const auto& d : dirs) {
                for (std::size_t i = 0; i < k; ++i) x[i] = rn.x * d.u[i];
                detail::tensor_walk(tail_axes, k, std::span<double>(x), rw * d.w,
                                    [&](std::span<const double> pt, double w) {
                                        fn(pt, std::span<double>(vals));
                                        for (std::size_t c = 0; c < ncomp; ++c) {
                                            part[c] += w * vals[c];
                                            part_abs[c] += std::abs(w * vals[c]);
                                        }
                                        ++acc.nodes;
                                    });
            }
            for (std::size_t c = 0; c < ncomp; ++c) {
                acc.sum[c] += part[c];
                acc.abs_sum[c] += part_abs[c];
            }
        }
        return acc;
    };
    return detail::refine(spec, ncomp, scale_group, level);
}

/// Scalar convenience overload.
template <class F>
IntegralResult integrate_cylindrical(const CylindricalSpace& space, const CylindricalDomain& dom,
                                     const QuadratureSpec& spec, F&& scalar_fn) {
    return integrate_cylindrical(space, dom, spec, 1,
                                 [&](std::span<const double> x, std::span<double> out) { out[0] = scalar_fn(x); })
        .front();
}

/// Integral over a box in R^n (Haar measure of a homogeneous group is
/// Lebesgue measure) on a Cartesian tensor grid.
template <class F>
std::vector<IntegralResult> integrate_group(const GroupStructure& group, std::span<const Interval> box,
                                            const QuadratureSpec& spec, std::size_t ncomp, F&& fn,
                                            std::span<const std::size_t> scale_group = {}) {
    if (box.size() != group.n()) throw InvalidInput("group quadrature: box has wrong dimension");
    for (const auto& iv : box)
        if (!(iv.hi > iv.lo) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
            throw InvalidInput("group quadrature: box must be bounded and nonempty");
    const std::size_t n = group.n();
    auto level = [&](const QuadratureSpec& q) {
        detail::LevelSums acc;
        acc.sum.assign(ncomp, 0.0);
        acc.abs_sum.assign(ncomp, 0.0);
        std::vector<std::vector<Node1D>> axes;
        for (const auto& iv : box) axes.push_back(rule_on(q.scheme, q.box_nodes, q.panels, iv.lo, iv.hi));
        std::vector<std::vector<Node1D>> rest(axes.begin() + 1, axes.end());
        std::vector<double> x(n, 0.0), vals(ncomp, 0.0), part(ncomp), part_abs(ncomp);
        for (const auto& first : axes.front()) {
            std::fill(part.begin(), part.end(), 0.0);
            std::fill(part_abs.begin(), part_abs.end(), 0.0);
            x[0] = first.x;
            detail::tensor_walk(rest, 1, std::span<double>(x), first.w, [&](std::span<const double> pt, double w) {
                fn(pt, std::span<double>(vals));
                for (std::size_t c = 0; c < ncomp; ++c) {
                    part[c] += w * vals[c];
                    part_abs[c] += std::abs(w * vals[c]);
                }
                ++acc.nodes;
            });
            for (std::size_t c = 0; c < ncomp; ++c) {
                acc.sum[c] += part[c];
                acc.abs_sum[c] += part_abs[c];
            }
        }
        return acc;
    };
    return detail::refine(spec, ncomp, scale_group, level);
}

template <class F>
IntegralResult integrate_group(const GroupStructure& group, std::span<const Interval> box,
                               const QuadratureSpec& spec, F&& scalar_fn) {
    return integrate_group(group, box, spec, 1,
                           [&](std::span<const double> x, std::span<double> out) { out[0] = scalar_fn(x); })
        .front();
}

}  // namespace hlab
