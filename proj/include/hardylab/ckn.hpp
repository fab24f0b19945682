#pragma once

// Caffarelli-Kohn-Nirenberg inequalities with remainder:
//   |(d-a)/p|^delta ||rho^{a c/p} f||_r
//     <= [ ||xi||_p^p - int C_p(xi, eta) ]^{delta/p} ||rho^{a b/p} f||_q^{1-delta},
// with xi, eta as in the Hardy identity, and the uncertainty corollary
//   |(k-p)/p| int |f|^2 <= (int |E f/|x'||^p)^{1/p} (int |x'|^{p'} |f|^{p'})^{1/p'}.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "hardylab/geometry.hpp"
#include "hardylab/identities.hpp"

namespace hlab {

inline constexpr double ckn_equality_tol = 1e-12;

struct CknVerdict {
    bool admissible = true;
    /// Short name of the first violated constraint, empty when admissible.
    std::string violated;
    std::string detail;
    /// alpha = d makes the constant vanish; the inequality is then trivial.
    bool degenerate_constant = false;
};

inline CknVerdict validate_ckn_params(const WeightParams& w, double d) {
    CknVerdict v;
    auto fail = [&](const std::string& name, const std::string& detail) {
        v.admissible = false;
        v.violated = name;
        v.detail = detail;
        return v;
    };
    const double p = w.p, q = w.q, r = w.r, dl = w.delta;
    for (double x : {p, q, r, dl, w.alpha, w.b, w.c})
        if (!std::isfinite(x)) return fail("finite", "all exponents must be finite");
    if (!(p > 1.0)) return fail("p", "p must exceed 1");
    if (!(q > 1.0)) return fail("q", "q must exceed 1");
    if (!(r > 0.0)) return fail("r", "r must be positive");
    if (!(r >= 1.0)) return fail("r", "r >= 1 is required (r in (0,1) is excluded)");
    if (!(p + q >= r)) return fail("p+q>=r", "p + q >= r fails");
    if (!(dl >= 0.0 && dl <= 1.0)) return fail("delta", "delta must lie in [0,1]");
    if (!(dl >= (r - q) / r)) return fail("delta", "delta must be >= (r-q)/r");
    if (!(dl <= p / r)) return fail("delta", "delta must be <= p/r");
    if (std::abs(dl * r / p + (1.0 - dl) * r / q - 1.0) > ckn_equality_tol)
        return fail("delta*r/p+(1-delta)*r/q=1", "exponent balance delta r/p + (1-delta) r/q = 1 fails");
    if (std::abs(w.c - (-dl + w.b * (1.0 - dl))) > ckn_equality_tol)
        return fail("c=-delta+b(1-delta)", "weight balance c = -delta + b (1-delta) fails");
    v.degenerate_constant = w.alpha == d;
    return v;
}

struct CknReport {
    std::string identity;  // "ckn" or "hpw"
    std::string setting;
    std::string function;
    WeightParams params;
    double dimension = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    /// gradient_term - cp_term (HPW: gradient_term alone).
    double bracket = 0.0;
    bool bracket_nonneg = true;
    double gradient_term = 0.0;
    double cp_term = 0.0;
    /// Weighted norms (roots, not powers) of the two sides.
    double norm_lhs = 0.0;
    double norm_rhs = 0.0;
    double quadrature_err = 0.0;
    bool converged = true;
    std::size_t nodes = 0;
    /// rhs with the C_p remainder kept (equals rhs for CKN).
    double rhs_with_remainder = 0.0;
};

namespace detail {

inline double root(double v, double e) { return e == 0.0 ? 1.0 : std::pow(std::max(v, 0.0), e); }

}  // namespace detail

/// CKN for a batch of admissible parameter records sharing one pass over
/// the quadrature nodes.
inline std::vector<CknReport> evaluate_ckn(const Geometry& geo, std::span<const WeightParams> params,
                                           const TestFunction& f, const QuadratureSpec& spec) {
    const double d = geo.dimension();
    for (const auto& w : params) {
        const auto v = validate_ckn_params(w, d);
        if (!v.admissible) throw InvalidInput("inadmissible CKN parameters (" + v.violated + "): " + v.detail);
    }
    std::vector<CknReport> out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        out[i].identity = "ckn";
        out[i].setting = geo.describe();
        out[i].function = f.label;
        out[i].params = params[i];
        out[i].dimension = d;
    }
    if (f.is_zero() || params.empty()) return out;

    const std::size_t m = params.size();
    std::vector<std::size_t> groups(4 * m);
    for (std::size_t i = 0; i < 4 * m; ++i) groups[i] = i;  // components differ in homogeneity
    FieldSample s;
    auto fn = [&](std::span<const double> x, std::span<double> vals) {
        if (!geo.sample(f, x, s)) {
            std::fill(vals.begin(), vals.end(), 0.0);
            return;
        }
        const double af = std::abs(s.f);
        const double lr = std::log(s.rho);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& w = params[i];
            const double p = w.p, a = w.alpha;
            const double sc = std::exp(-a / p * lr);
            const complex xi = s.Ef * sc;
            const complex eta = xi + ((d - a) / p) * s.f * sc;
            vals[4 * i] = std::exp(a * w.c * w.r / p * lr) * std::pow(af, w.r);
            vals[4 * i + 1] = std::pow(std::abs(xi), p);
            vals[4 * i + 2] = cp(p, {xi, eta});
            vals[4 * i + 3] = std::exp(a * w.b * w.q / p * lr) * std::pow(af, w.q);
        }
    };
    const auto res = geo.integrate(f, spec, 4 * m, fn, groups);
    for (std::size_t i = 0; i < m; ++i) {
        auto& rep = out[i];
        const auto& w = params[i];
        const double K = detail::root(std::abs((d - w.alpha) / w.p), w.delta);
        const double Ir = res[4 * i].value, Iq = res[4 * i + 3].value;
        rep.gradient_term = res[4 * i + 1].value;
        rep.cp_term = res[4 * i + 2].value;
        rep.bracket = rep.gradient_term - rep.cp_term;
        const double bracket_err = res[4 * i + 1].err_estimate + res[4 * i + 2].err_estimate;
        rep.bracket_nonneg = rep.bracket >= -bracket_err;
        if (rep.bracket < -10.0 * bracket_err - 1e-14 * rep.gradient_term)
            throw NonConvergence("CKN bracket is negative beyond its error bar for '" + f.label + "'");
        rep.norm_lhs = detail::root(Ir, 1.0 / w.r);
        rep.norm_rhs = detail::root(Iq, 1.0 / w.q);
        rep.lhs = K * rep.norm_lhs;
        rep.rhs = detail::root(rep.bracket, w.delta / w.p) * detail::root(rep.norm_rhs, 1.0 - w.delta);
        rep.rhs_with_remainder = rep.rhs;
        rep.slack = rep.rhs - rep.lhs;
        // First-order propagation of the integral error estimates.
        auto rel = [](double err, double v) { return v > 0.0 ? err / v : 0.0; };
        const double lhs_err = rep.lhs * rel(res[4 * i].err_estimate, Ir) / w.r;
        const double rhs_err = rep.rhs * (w.delta / w.p * rel(bracket_err, std::max(rep.bracket, 0.0)) +
                                          (1.0 - w.delta) / w.q * rel(res[4 * i + 3].err_estimate, Iq));
        rep.quadrature_err = lhs_err + rhs_err;
        rep.converged = res[4 * i].converged && res[4 * i + 1].converged && res[4 * i + 2].converged &&
                        res[4 * i + 3].converged;
        rep.nodes = res[4 * i].nodes;
    }
    return out;
}

inline CknReport evaluate_ckn_cylindrical(const CylindricalSpace& s, const WeightParams& w, const TestFunction& f,
                                          const QuadratureSpec& spec) {
    return evaluate_ckn(Geometry::cylindrical(s), std::span<const WeightParams>(&w, 1), f, spec).front();
}

enum class CknVariant { stratified, homogeneous };

inline CknReport evaluate_ckn_group(const GroupStructure& g, const WeightParams& w, const TestFunction& f,
                                    const QuadratureSpec& spec, CknVariant variant) {
    const Geometry geo = variant == CknVariant::stratified ? Geometry::stratified(g) : Geometry::homogeneous(g);
    return evaluate_ckn(geo, std::span<const WeightParams>(&w, 1), f, spec).front();
}

/// The (q, r, b, c, delta, alpha) choice turning CKN into the uncertainty
/// principle: c = 0, r = 2, b = 1, q = p/(p-1), delta = 1/2, alpha = p.
inline WeightParams hpw_params(double p) {
    WeightParams w;
    w.p = p;
    w.q = p / (p - 1.0);
    w.r = 2.0;
    w.b = 1.0;
    w.c = 0.0;
    w.delta = 0.5;
    w.alpha = p;
    return w;
}

/// Uncertainty principle on R^k x R^{n-k}. rhs drops the C_p remainder;
/// rhs_with_remainder keeps it. p = k gives lhs = 0.
inline CknReport evaluate_hpw(const CylindricalSpace& s, double p, const TestFunction& f, const QuadratureSpec& spec) {
    check_p(p);
    const Geometry geo = Geometry::cylindrical(s);
    const double k = static_cast<double>(s.k());
    const double pc = p / (p - 1.0);
    CknReport rep;
    rep.identity = "hpw";
    rep.setting = geo.describe();
    rep.function = f.label;
    rep.params = hpw_params(p);
    rep.dimension = k;
    if (f.is_zero()) return rep;
    FieldSample smp;
    auto fn = [&](std::span<const double> x, std::span<double> v) {
        if (!geo.sample(f, x, smp)) {
            std::fill(v.begin(), v.end(), 0.0);
            return;
        }
        const double af = std::abs(smp.f);
        const complex xi = smp.Ef / smp.rho;
        const complex eta = xi + ((k - p) / p) * smp.f / smp.rho;
        v[0] = af * af;
        v[1] = std::pow(std::abs(xi), p);
        v[2] = std::pow(smp.rho * af, pc);
        v[3] = cp(p, {xi, eta});
    };
    const std::array<std::size_t, 4> groups{0, 1, 2, 3};
    const auto res = geo.integrate(f, spec, 4, fn, groups);
    const double K = std::abs((k - p) / p);
    rep.norm_lhs = res[0].value;
    rep.gradient_term = res[1].value;
    rep.norm_rhs = detail::root(res[2].value, 1.0 / pc);
    rep.cp_term = res[3].value;
    rep.bracket = rep.gradient_term;
    rep.bracket_nonneg = rep.gradient_term - rep.cp_term >= -(res[1].err_estimate + res[3].err_estimate);
    rep.lhs = K * rep.norm_lhs;
    rep.rhs = detail::root(rep.gradient_term, 1.0 / p) * rep.norm_rhs;
    rep.rhs_with_remainder = detail::root(rep.gradient_term - rep.cp_term, 1.0 / p) * rep.norm_rhs;
    rep.slack = rep.rhs - rep.lhs;
    auto rel = [](double err, double v) { return v > 0.0 ? err / v : 0.0; };
    rep.quadrature_err = K * res[0].err_estimate +
                         rep.rhs * (rel(res[1].err_estimate, res[1].value) / p + rel(res[2].err_estimate, res[2].value) / pc);
    rep.converged = res[0].converged && res[1].converged && res[2].converged && res[3].converged;
    rep.nodes = res[0].nodes;
    return rep;
}

/// Admissible records built from p, q, delta, b and alpha lists: r and c are
/// solved from the two balance conditions, and records failing validation
/// for constant d are dropped.
inline std::vector<WeightParams> ckn_parameter_grid(std::span<const double> ps, std::span<const double> qs,
                                                    std::span<const double> deltas, std::span<const double> bs,
                                                    std::span<const double> alphas, double d) {
    std::vector<WeightParams> out;
    for (double p : ps)
        for (double q : qs)
            for (double dl : deltas)
                for (double b : bs)
                    for (double a : alphas) {
                        WeightParams w;
                        w.p = p;
                        w.q = q;
                        w.delta = dl;
                        w.b = b;
                        w.alpha = a;
                        w.r = 1.0 / (dl / p + (1.0 - dl) / q);
                        w.c = -dl + b * (1.0 - dl);
                        if (validate_ckn_params(w, d).admissible) out.push_back(w);
                    }
    return out;
}

}  // namespace hlab
