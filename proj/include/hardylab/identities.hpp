#pragma once

/**
 * @file identities.hpp
 * @brief The C_p functional and evaluators for the Hardy-type identities
 *        with power and logarithmic weights.
 *
 * Power weights (constant d = k, N or Q):
 *   |(d-a)/p|^p int |f|^p/rho^a = int |xi|^p - int C_p(xi, eta),
 *   xi = E f / rho^{a/p},  eta = xi + ((d-a)/p) f / rho^{a/p}.
 *
 * Logarithmic weights on {rho < R}, w = log(R/rho), c = (b+p)/p:
 *   |c|^p int |f|^p/(rho^{a+p} w^{b+p+1})
 *     = int |xi|^p - (d-a-p) c |c|^{p-2} int |f|^p/(rho^{a+p} w^{b+p}) - m int C_p(xi, eta),
 *   xi = E f / (rho^{(a+p)/p} w^{(b+1)/p}),  eta = xi + c f / (rho^{(a+p)/p} w^{(b+p+1)/p}),
 * with m = 1 (CpFactorMode::one) or m = p (CpFactorMode::p).
 *
 * All norms are reported as p-th powers.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hardylab/geometry.hpp"
#include "hardylab/quadrature.hpp"
#include "hardylab/test_function.hpp"

namespace hlab {

/// Exponent record shared by every evaluator. Fields unused by a given
/// identity are ignored.
struct WeightParams {
    double p = 2.0;
    double q = 2.0;
    double r = 2.0;
    double alpha = 0.0;
    double beta = 0.0;
    double b = 0.0;
    double c = 0.0;
    double delta = 0.0;
    double R = 1.0;
};

struct CpArguments {
    complex xi;
    complex eta;
};

/// C_p(xi, eta) = |xi|^p - |xi-eta|^p - p |xi-eta|^{p-2} Re((xi-eta) conj(eta)),
/// with |z|^{p-2} z extended by 0 at z = 0.
inline double cp(double p, CpArguments a) {
    if (!(p > 1.0)) throw InvalidInput("cp: p must exceed 1");
    const complex d = a.xi - a.eta;
    const double ad = std::abs(d);
    const double third = ad == 0.0 ? 0.0 : p * std::pow(ad, p - 2.0) * (d * std::conj(a.eta)).real();
    return std::pow(std::abs(a.xi), p) - std::pow(ad, p) - third;
}

enum class CpFactorMode { one, p };

inline std::string to_string(CpFactorMode m) { return m == CpFactorMode::one ? "one" : "p"; }

struct IdentityReport {
    std::string identity;  // "hardy" or "log-hardy"
    std::string setting;
    std::string function;
    WeightParams params;
    double dimension = 0.0;  // k, N or Q
    double lhs = 0.0;
    double gradient_term = 0.0;
    double middle_term = 0.0;
    double cp_term = 0.0;
    double residual = 0.0;
    double rel_residual = 0.0;
    double quadrature_err = 0.0;
    /// Weighted norm^p appearing on the left without its constant.
    double weighted_norm = 0.0;
    double cp_factor = 1.0;
    bool sign_condition_holds = true;
    bool converged = true;
    std::size_t nodes = 0;
};

inline constexpr double tiny_floor = 1e-300;

inline void finish(IdentityReport& r) {
    r.residual = r.lhs - (r.gradient_term - r.middle_term - r.cp_factor * r.cp_term);
    r.rel_residual = std::abs(r.residual) / std::max({std::abs(r.lhs), std::abs(r.gradient_term), tiny_floor});
}

inline void check_p(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("p must be a finite number > 1");
}

/// Identity mode ignores the sign condition (d-a-p)(b+p) >= 0; inequality
/// mode requires it.
inline bool log_sign_condition(const WeightParams& w, double d) { return (d - w.alpha - w.p) * (w.beta + w.p) >= 0.0; }

inline void validate_log_params(const WeightParams& w, double d, bool inequality_mode) {
    check_p(w.p);
    if (!(w.R > 0.0) || !std::isfinite(w.R)) throw InvalidInput("R must be a positive number");
    if (inequality_mode && !log_sign_condition(w, d))
        throw InvalidInput("inequality mode requires (d - alpha - p)(beta + p) >= 0");
}

/// Hardy identity for a batch of parameter records sharing one pass over
/// the quadrature nodes.
inline std::vector<IdentityReport> evaluate_hardy(const Geometry& geo, std::span<const WeightParams> params,
                                                  const TestFunction& f, const QuadratureSpec& spec) {
    for (const auto& w : params) check_p(w.p);
    const double d = geo.dimension();
    std::vector<IdentityReport> out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        out[i].identity = "hardy";
        out[i].setting = geo.describe();
        out[i].function = f.label;
        out[i].params = params[i];
        out[i].dimension = d;
    }
    if (f.is_zero() || params.empty()) return out;

    const std::size_t m = params.size();
    std::vector<std::size_t> groups(3 * m);
    for (std::size_t i = 0; i < 3 * m; ++i) groups[i] = i / 3;
    FieldSample s;
    auto fn = [&](std::span<const double> x, std::span<double> vals) {
        if (!geo.sample(f, x, s)) {
            std::fill(vals.begin(), vals.end(), 0.0);
            return;
        }
        const double af = std::abs(s.f);
        for (std::size_t i = 0; i < m; ++i) {
            const double p = params[i].p, a = params[i].alpha;
            const double scale = std::pow(s.rho, -a / p);
            const complex xi = s.Ef * scale;
            const complex g = s.f * scale;
            const complex eta = xi + ((d - a) / p) * g;
            vals[3 * i] = std::pow(af * scale, p);
            vals[3 * i + 1] = std::pow(std::abs(xi), p);
            vals[3 * i + 2] = cp(p, {xi, eta});
        }
    };
    const auto res = geo.integrate(f, spec, 3 * m, fn, groups);
    for (std::size_t i = 0; i < m; ++i) {
        auto& r = out[i];
        const double p = params[i].p;
        const double cst = std::pow(std::abs((d - params[i].alpha) / p), p);
        r.weighted_norm = res[3 * i].value;
        r.lhs = cst * r.weighted_norm;
        r.gradient_term = res[3 * i + 1].value;
        r.cp_term = res[3 * i + 2].value;
        r.quadrature_err = cst * res[3 * i].err_estimate + res[3 * i + 1].err_estimate + res[3 * i + 2].err_estimate;
        r.converged = res[3 * i].converged && res[3 * i + 1].converged && res[3 * i + 2].converged;
        r.nodes = res[3 * i].nodes;
        finish(r);
    }
    return out;
}

/// Logarithmic-weight identity for a batch of parameter records. Each
/// record yields a report under every requested C_p factor mode.
inline std::vector<IdentityReport> evaluate_log_hardy(const Geometry& geo, std::span<const WeightParams> params,
                                                      const TestFunction& f, const QuadratureSpec& spec,
                                                      CpFactorMode mode = CpFactorMode::one) {
    const double d = geo.dimension();
    for (const auto& w : params) validate_log_params(w, d, false);
    std::vector<IdentityReport> out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        out[i].identity = "log-hardy";
        out[i].setting = geo.describe();
        out[i].function = f.label;
        out[i].params = params[i];
        out[i].dimension = d;
        out[i].cp_factor = mode == CpFactorMode::one ? 1.0 : params[i].p;
        out[i].sign_condition_holds = log_sign_condition(params[i], d);
    }
    if (f.is_zero() || params.empty()) return out;

    const std::size_t m = params.size();
    std::vector<std::size_t> groups(4 * m);
    for (std::size_t i = 0; i < 4 * m; ++i) groups[i] = i / 4;
    FieldSample s;
    auto fn = [&](std::span<const double> x, std::span<double> vals) {
        if (!geo.sample(f, x, s)) {
            std::fill(vals.begin(), vals.end(), 0.0);
            return;
        }
        const double af = std::abs(s.f);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& w = params[i];
            if (!(s.rho < w.R))
                throw InvalidInput("support of '" + f.label + "' reaches the sphere of radius R = " +
                                   std::to_string(w.R));
            const double p = w.p;
            const double lg = std::log(w.R / s.rho);
            const double cst = (w.beta + p) / p;
            const double rw = std::pow(s.rho, -(w.alpha + p) / p);
            const complex xi = s.Ef * (rw * std::pow(lg, -(w.beta + 1.0) / p));
            const complex g = s.f * (rw * std::pow(lg, -(w.beta + p + 1.0) / p));
            const complex eta = xi + cst * g;
            vals[4 * i] = std::pow(std::abs(g), p);
            vals[4 * i + 1] = std::pow(std::abs(xi), p);
            vals[4 * i + 2] = std::pow(af, p) * std::pow(s.rho, -(w.alpha + p)) * std::pow(lg, -(w.beta + p));
            vals[4 * i + 3] = cp(p, {xi, eta});
        }
    };
    const auto res = geo.integrate(f, spec, 4 * m, fn, groups);
    for (std::size_t i = 0; i < m; ++i) {
        auto& r = out[i];
        const auto& w = params[i];
        const double p = w.p;
        const double cst = (w.beta + p) / p;
        const double lcst = std::pow(std::abs(cst), p);
        const double mid = (d - w.alpha - w.p) * cst * std::pow(std::abs(cst), p - 2.0);
        r.weighted_norm = res[4 * i].value;
        r.lhs = lcst * r.weighted_norm;
        r.gradient_term = res[4 * i + 1].value;
        r.middle_term = mid * res[4 * i + 2].value;
        r.cp_term = res[4 * i + 3].value;
        r.quadrature_err = lcst * res[4 * i].err_estimate + res[4 * i + 1].err_estimate +
                           std::abs(mid) * res[4 * i + 2].err_estimate + r.cp_factor * res[4 * i + 3].err_estimate;
        r.converged = res[4 * i].converged && res[4 * i + 1].converged && res[4 * i + 2].converged &&
                      res[4 * i + 3].converged;
        r.nodes = res[4 * i].nodes;
        finish(r);
    }
    return out;
}

/// Recompute residuals of log reports under another C_p factor (the
/// integrals do not depend on it).
inline IdentityReport with_cp_factor(IdentityReport r, CpFactorMode mode) {
    r.cp_factor = mode == CpFactorMode::one ? 1.0 : r.params.p;
    finish(r);
    return r;
}

// Named single-record entry points.

inline IdentityReport evaluate_hardy_cylindrical(const CylindricalSpace& s, const WeightParams& w,
                                                 const TestFunction& f, const QuadratureSpec& spec) {
    return evaluate_hardy(Geometry::cylindrical(s), std::span<const WeightParams>(&w, 1), f, spec).front();
}

inline IdentityReport evaluate_hardy_stratified(const GroupStructure& g, const WeightParams& w, const TestFunction& f,
                                                const QuadratureSpec& spec) {
    return evaluate_hardy(Geometry::stratified(g), std::span<const WeightParams>(&w, 1), f, spec).front();
}

inline IdentityReport evaluate_hardy_homogeneous(const GroupStructure& g, const WeightParams& w,
                                                 const TestFunction& f, const QuadratureSpec& spec) {
    return evaluate_hardy(Geometry::homogeneous(g), std::span<const WeightParams>(&w, 1), f, spec).front();
}

inline IdentityReport evaluate_log_hardy_cylindrical(const CylindricalSpace& s, const WeightParams& w,
                                                     const TestFunction& f, const QuadratureSpec& spec) {
    return evaluate_log_hardy(Geometry::cylindrical(s), std::span<const WeightParams>(&w, 1), f, spec).front();
}

/// Group log identity; `stratified` selects |x'| with x'.grad_H (constant N)
/// instead of the quasi-norm with the radial derivative (constant Q).
inline IdentityReport evaluate_log_hardy_group(const GroupStructure& g, const WeightParams& w, const TestFunction& f,
                                               const QuadratureSpec& spec, CpFactorMode mode,
                                               bool stratified = false) {
    const Geometry geo = stratified ? Geometry::stratified(g) : Geometry::homogeneous(g);
    return evaluate_log_hardy(geo, std::span<const WeightParams>(&w, 1), f, spec, mode).front();
}

struct VanishingStep {
    double eps = 0.0;
    double lhs = 0.0;
    double weighted_norm = 0.0;
    double plateau_gradient = 0.0;
    double plateau_cp = 0.0;
    double plateau_ratio = 0.0;    // plateau_cp / plateau_gradient
    double max_eta_ratio = 0.0;    // max |eta| / |xi| at sampled plateau points
    double quadrature_err = 0.0;
};

struct VanishingReport {
    std::string setting;
    std::string function_family;
    WeightParams params;
    int angular_order = 0;
    std::vector<VanishingStep> steps;
    bool plateau_cp_small = true;  // plateau_cp <= 1e-8 plateau_gradient at every eps
    bool eta_vanishes = true;      // max |eta|/|xi| <= 1e-10 at every eps
    bool lhs_increasing = true;
    bool passed = true;
};

}  // namespace hlab

#include "hardylab/testfns.hpp"

namespace hlab {

/// For f = |x'|^{-(k-a)/p} phi cut off outside [eps, 1/eps], C_p vanishes on
/// the plateau while the weighted norm grows as eps decreases.
inline VanishingReport vanishing_family_check(const CylindricalSpace& s, const WeightParams& w, int angular_order,
                                              std::span<const double> eps_seq, const QuadratureSpec& spec,
                                              complex amplitude = 1.0) {
    if (!(w.p >= 2.0)) throw InvalidInput("vanishing_family_check: p must be >= 2");
    if (w.alpha == static_cast<double>(s.k())) throw InvalidInput("vanishing_family_check: alpha = k is degenerate");
    if (eps_seq.empty()) throw InvalidInput("vanishing_family_check: empty eps sequence");
    const Geometry geo = Geometry::cylindrical(s);
    const double d = geo.dimension();
    VanishingReport rep;
    rep.setting = geo.describe();
    rep.params = w;
    rep.angular_order = angular_order;
    ExtremizerOptions opt;
    opt.angular_order = angular_order;
    opt.amplitude = amplitude;
    rep.function_family = "h1 phi-order " + std::to_string(angular_order);
    double prev_lhs = -1.0;
    for (double eps : eps_seq) {
        VanishingStep st;
        st.eps = eps;
        const TestFunction f = make_extremizer(s, ExtremizerKind::h1, w.p, w.alpha, 0.0, 1.0, eps, opt);
        const IdentityReport full = evaluate_hardy(geo, std::span<const WeightParams>(&w, 1), f, spec).front();
        st.lhs = full.lhs;
        st.weighted_norm = full.weighted_norm;
        st.quadrature_err = full.quadrature_err;
        if (!f.is_zero()) {
            FieldSample smp;
            auto fn = [&](std::span<const double> x, std::span<double> vals) {
                vals[0] = vals[1] = 0.0;
                if (!geo.sample(f, x, smp)) return;
                const double sc = std::pow(smp.rho, -w.alpha / w.p);
                const complex xi = smp.Ef * sc;
                const complex eta = xi + ((d - w.alpha) / w.p) * smp.f * sc;
                vals[0] = std::pow(std::abs(xi), w.p);
                vals[1] = cp(w.p, {xi, eta});
            };
            const auto res = geo.integrate_band(f, eps, 1.0 / eps, spec, 2, fn);
            st.plateau_gradient = res[0].value;
            st.plateau_cp = res[1].value;
            st.plateau_ratio = st.plateau_gradient > 0.0 ? st.plateau_cp / st.plateau_gradient : 0.0;
            // Pointwise eta on a deterministic set of plateau points.
            for (int i = 0; i < 64; ++i) {
                const double t = (static_cast<double>(i) + 0.5) / 64.0;
                const double r = std::exp(std::log(eps) * (1.0 - 2.0 * t));
                Point x(s.n(), 0.0);
                const double th = 2.399963 * i;
                x[0] = r * (s.k() >= 2 ? std::cos(th) : (i % 2 ? -1.0 : 1.0));
                if (s.k() >= 2) x[1] = r * std::sin(th);
                if (!geo.sample(f, x, smp)) continue;
                const double sc = std::pow(smp.rho, -w.alpha / w.p);
                const complex xi = smp.Ef * sc;
                const complex eta = xi + ((d - w.alpha) / w.p) * smp.f * sc;
                if (std::abs(xi) > 0.0) st.max_eta_ratio = std::max(st.max_eta_ratio, std::abs(eta) / std::abs(xi));
            }
        }
        rep.plateau_cp_small = rep.plateau_cp_small && std::abs(st.plateau_cp) <= 1e-8 * st.plateau_gradient;
        rep.eta_vanishes = rep.eta_vanishes && st.max_eta_ratio <= 1e-10;
        if (prev_lhs >= 0.0 && !(st.lhs > prev_lhs) && !f.is_zero()) rep.lhs_increasing = false;
        prev_lhs = st.lhs;
        rep.steps.push_back(st);
    }
    rep.passed = rep.plateau_cp_small && rep.eta_vanishes && rep.lhs_increasing;
    return rep;
}

}  // namespace hlab
