#pragma once

// Rayleigh-quotient sweeps along the mollified extremizer families.
//
// h1: f = |x'|^{-(k-a)/p} phi cut off in |x'|; quotient int|xi|^p / int|f|^p rho^{-a}
//     tends to |(k-a)/p|^p.
// h2: f = (log R/|x'|)^{(b+p)/p} phi cut off in s = log(R/|x'|), with k = a + p;
//     quotient int|xi|^p / int|f|^p rho^{-k} w^{-(b+p+1)} tends to |(b+p)/p|^p.
//
// In the log variable (t = log r for h1, u = log s for h2) both quotients read
// int |chi' - c chi|^p / int chi^p, so the gap closes like 1/log(1/eps).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hardylab/identities.hpp"
#include "hardylab/testfns.hpp"

namespace hlab {

inline constexpr double sharpness_tolerance = 0.01;

/// Radial node floor for sweeps: the p-th power of |chi' - c chi| has kinks
/// for p > 2, so Gauss-Legendre converges only algebraically there.
inline constexpr std::size_t sweep_min_radial_nodes = 192;

struct SharpnessSweep {
    std::string family;
    std::string setting;
    WeightParams params;
    int angular_order = 0;
    std::string taper;
    double target_constant = 0.0;
    std::vector<double> eps_sequence;
    std::vector<double> quotients;
    std::vector<double> gaps;      // quotient - target
    std::vector<double> rel_gaps;  // gap / target
    std::vector<double> weighted_norms;
    std::vector<double> quotient_errs;
    std::vector<std::size_t> nodes;
    /// "decreasing", "increasing" or "non-monotone", judged after the first two entries.
    std::string trend;
    bool monotone = true;
    /// quotient >= target - 10 err at every eps (the inequality direction).
    bool lower_bound_ok = true;
    bool within_tolerance = false;
    bool converged = true;
    bool passed = false;
};

namespace detail {

inline void check_eps_sequence(std::span<const double> eps) {
    if (eps.empty()) throw InvalidInput("eps sequence is empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0 && eps[i] < 1.0)) throw InvalidInput("eps values must lie in (0, 1)");
        if (i > 0 && !(eps[i] < eps[i - 1])) throw InvalidInput("eps sequence must be strictly decreasing");
    }
}

inline std::string judge_trend(const std::vector<double>& q, const std::vector<double>& err, bool& monotone) {
    int up = 0, down = 0;
    for (std::size_t i = 2; i < q.size(); ++i) {
        const double d = q[i] - q[i - 1];
        if (std::abs(d) <= 10.0 * (err[i] + err[i - 1])) continue;
        (d > 0.0 ? up : down)++;
    }
    monotone = up == 0 || down == 0;
    if (!monotone) return "non-monotone";
    return up > 0 ? "increasing" : "decreasing";
}

inline void finish_sweep(SharpnessSweep& sw) {
    for (std::size_t i = 0; i < sw.quotients.size(); ++i) {
        sw.gaps.push_back(sw.quotients[i] - sw.target_constant);
        sw.rel_gaps.push_back(sw.gaps.back() / sw.target_constant);
        if (sw.quotients[i] < sw.target_constant - 10.0 * sw.quotient_errs[i]) sw.lower_bound_ok = false;
    }
    sw.trend = judge_trend(sw.quotients, sw.quotient_errs, sw.monotone);
    sw.within_tolerance = !sw.rel_gaps.empty() && std::abs(sw.rel_gaps.back()) <= sharpness_tolerance;
    sw.passed = sw.monotone && sw.lower_bound_ok && sw.within_tolerance;
}

/// Smallest |x'| of an h2 member must keep rho^{-(a+p)} finite in double precision.
inline void check_h2_representable(const WeightParams& w, double eps, Taper taper) {
    const double s_hi = cutoff_support(eps, taper).hi;
    const double log_inv_rlo = s_hi - std::log(w.R);
    if (!((w.alpha + w.p) * log_inv_rlo < 700.0))
        throw InvalidInput("eps = " + std::to_string(eps) +
                           " is too small for the h2 family: |x'|^-(alpha+p) overflows at the inner edge");
}

}  // namespace detail

/// h1 sweep on R^k x R^{n-k}. The radial rule is placed uniformly in log|x'|
/// with four panels so each taper transition has its own panel.
inline SharpnessSweep sweep_hardy_constant(const CylindricalSpace& s, const WeightParams& w,
                                           std::span<const double> eps, const QuadratureSpec& spec,
                                           ExtremizerOptions opt = {}) {
    check_p(w.p);
    const double k = static_cast<double>(s.k());
    if (w.alpha == k) throw InvalidInput("sweep: alpha = k is degenerate");
    detail::check_eps_sequence(eps);
    QuadratureSpec q = spec;
    q.radial_map = RadialMap::logarithmic;
    q.panels = std::max<std::size_t>(q.panels, 4);
    q.radial_nodes = std::max(q.radial_nodes, sweep_min_radial_nodes);
    const Geometry geo = Geometry::cylindrical(s);
    SharpnessSweep sw;
    sw.family = "h1";
    sw.setting = geo.describe();
    sw.params = w;
    sw.angular_order = opt.angular_order;
    sw.taper = to_string(opt.taper);
    sw.target_constant = std::pow(std::abs((k - w.alpha) / w.p), w.p);
    sw.eps_sequence.assign(eps.begin(), eps.end());
    for (double e : eps) {
        const auto f = make_extremizer(s, ExtremizerKind::h1, w.p, w.alpha, 0.0, 1.0, e, opt);
        if (f.is_zero()) throw InvalidInput("sweep: the zero function has no Rayleigh quotient");
        const auto r = evaluate_hardy(geo, std::span<const WeightParams>(&w, 1), f, q).front();
        const double cst = sw.target_constant;
        const double qv = r.gradient_term / r.weighted_norm;
        sw.quotients.push_back(qv);
        sw.quotient_errs.push_back(r.quadrature_err / (cst * r.weighted_norm) * std::max(1.0, qv));
        sw.weighted_norms.push_back(r.weighted_norm);
        sw.nodes.push_back(r.nodes);
        sw.converged = sw.converged && r.converged;
    }
    detail::finish_sweep(sw);
    return sw;
}

/// h2 sweep with k = alpha + p so the middle term vanishes. The radial rule
/// is placed uniformly in log log(R/|x'|).
inline SharpnessSweep sweep_log_constant(const CylindricalSpace& s, const WeightParams& w,
                                         std::span<const double> eps, const QuadratureSpec& spec,
                                         ExtremizerOptions opt = {}) {
    const double k = static_cast<double>(s.k());
    validate_log_params(w, k, false);
    if (w.beta == -w.p) throw InvalidInput("sweep: beta = -p is degenerate");
    if (std::abs(k - w.alpha - w.p) > 1e-12) throw InvalidInput("log sweep needs k = alpha + p");
    detail::check_eps_sequence(eps);
    for (double e : eps) detail::check_h2_representable(w, e, opt.taper);
    QuadratureSpec q = spec;
    q.radial_map = RadialMap::log_log;
    q.log_center = w.R;
    q.panels = std::max<std::size_t>(q.panels, 4);
    q.radial_nodes = std::max(q.radial_nodes, sweep_min_radial_nodes);
    const Geometry geo = Geometry::cylindrical(s);
    SharpnessSweep sw;
    sw.family = "h2";
    sw.setting = geo.describe();
    sw.params = w;
    sw.angular_order = opt.angular_order;
    sw.taper = to_string(opt.taper);
    sw.target_constant = std::pow(std::abs((w.beta + w.p) / w.p), w.p);
    sw.eps_sequence.assign(eps.begin(), eps.end());
    for (double e : eps) {
        const auto f = make_extremizer(s, ExtremizerKind::h2, w.p, w.alpha, w.beta, w.R, e, opt);
        if (f.is_zero()) throw InvalidInput("sweep: the zero function has no Rayleigh quotient");
        const auto r = evaluate_log_hardy(geo, std::span<const WeightParams>(&w, 1), f, q).front();
        const double cst = sw.target_constant;
        const double qv = r.gradient_term / r.weighted_norm;
        sw.quotients.push_back(qv);
        sw.quotient_errs.push_back(r.quadrature_err / (cst * r.weighted_norm) * std::max(1.0, qv));
        sw.weighted_norms.push_back(r.weighted_norm);
        sw.nodes.push_back(r.nodes);
        sw.converged = sw.converged && r.converged;
    }
    detail::finish_sweep(sw);
    return sw;
}

struct DivergenceReport {
    std::string family;
    std::string setting;
    WeightParams params;
    std::vector<double> eps_sequence;
    std::vector<double> norms;
    /// Weighted norm split at |x'| = 1 (h1) or |x'| = R/e (h2): the inner
    /// part is the side of the singular set x' = 0.
    std::vector<double> inner_norms;
    std::vector<double> outer_norms;
    std::vector<double> quotients;
    /// Least-squares slope of the norm against log(1/eps).
    double slope = 0.0;
    bool increasing = true;
    bool inner_diverges = false;
    bool outer_diverges = false;
    /// |quotient differences| shrink along the sequence.
    bool quotient_settles = true;
    bool diverges = false;
    bool passed = false;
};

namespace detail {

/// Growth rates per unit log(1/eps) stay positive and do not decay below
/// half their first value: the signature of unbounded growth, as opposed to
/// the geometric decay of a convergent tail.
inline bool growth_persists(const std::vector<double>& v, std::span<const double> eps) {
    if (v.size() < 2) return false;
    std::vector<double> rate;
    for (std::size_t i = 1; i < v.size(); ++i)
        rate.push_back((v[i] - v[i - 1]) / (std::log(eps[i - 1]) - std::log(eps[i])));
    for (double r : rate)
        if (!(r > 0.0)) return false;
    return rate.back() >= 0.5 * rate.front();
}

inline double lsq_slope(const std::vector<double>& y, std::span<const double> eps) {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += -std::log(eps[i]);
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = -std::log(eps[i]) - mx;
        sxy += dx * (y[i] - my);
        sxx += dx * dx;
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace detail

/// Evidence that the sharp constant is not attained: the weighted norm grows
/// without bound while the quotient settles. Both halves of the radial
/// integral are reported so the side(s) driving the growth are visible.
inline DivergenceReport divergence_probe(const CylindricalSpace& s, ExtremizerKind kind, const WeightParams& w,
                                         std::span<const double> eps, const QuadratureSpec& spec,
                                         ExtremizerOptions opt = {}) {
    const bool h2 = kind == ExtremizerKind::h2;
    detail::check_eps_sequence(eps);
    const Geometry geo = Geometry::cylindrical(s);
    const double k = static_cast<double>(s.k());
    DivergenceReport rep;
    rep.family = to_string(kind);
    rep.setting = geo.describe();
    rep.params = w;
    rep.eps_sequence.assign(eps.begin(), eps.end());
    if (opt.amplitude == complex(0.0, 0.0)) {
        if (h2) validate_log_params(w, k, false);
        else check_p(w.p);
        rep.norms.assign(eps.size(), 0.0);
        rep.inner_norms = rep.outer_norms = rep.quotients = rep.norms;
        rep.increasing = false;
        return rep;
    }
    const SharpnessSweep sw = h2 ? sweep_log_constant(s, w, eps, spec, opt) : sweep_hardy_constant(s, w, eps, spec, opt);
    rep.norms = sw.weighted_norms;
    rep.quotients = sw.quotients;
    QuadratureSpec q = spec;
    q.panels = std::max<std::size_t>(q.panels, 4);
    q.radial_nodes = std::max(q.radial_nodes, sweep_min_radial_nodes);
    q.radial_map = h2 ? RadialMap::log_log : RadialMap::logarithmic;
    q.log_center = w.R;
    const double split = h2 ? w.R * std::exp(-1.0) : 1.0;
    for (double e : eps) {
        const auto f = make_extremizer(s, kind, w.p, w.alpha, w.beta, w.R, e, opt);
        FieldSample smp;
        auto fn = [&](std::span<const double> x, std::span<double> v) {
            v[0] = 0.0;
            if (!geo.sample(f, x, smp)) return;
            const double af = std::pow(std::abs(smp.f), w.p);
            if (h2) {
                const double lg = std::log(w.R / smp.rho);
                v[0] = af * std::pow(smp.rho, -(w.alpha + w.p)) * std::pow(lg, -(w.beta + w.p + 1.0));
            } else {
                v[0] = af * std::pow(smp.rho, -w.alpha);
            }
        };
        rep.inner_norms.push_back(geo.integrate_band(f, 0.0, split, q, 1, fn)[0].value);
        rep.outer_norms.push_back(geo.integrate_band(f, split, h2 ? w.R : 1e300, q, 1, fn)[0].value);
    }
    for (std::size_t i = 1; i < rep.norms.size(); ++i)
        if (!(rep.norms[i] > rep.norms[i - 1])) rep.increasing = false;
    for (std::size_t i = 2; i < rep.quotients.size(); ++i)
        if (std::abs(rep.quotients[i] - rep.quotients[i - 1]) > std::abs(rep.quotients[i - 1] - rep.quotients[i - 2]))
            rep.quotient_settles = false;
    rep.slope = detail::lsq_slope(rep.norms, eps);
    rep.inner_diverges = detail::growth_persists(rep.inner_norms, eps);
    rep.outer_diverges = detail::growth_persists(rep.outer_norms, eps);
    rep.diverges = rep.increasing && rep.slope > 0.0 && detail::growth_persists(rep.norms, eps);
    rep.passed = rep.diverges && rep.quotient_settles;
    return rep;
}

}  // namespace hlab
