#pragma once

// One interface over the three settings. Each identity involves a singular
// radius rho and an Euler-type derivative E f:
//   cylindrical   rho = |x'|,   E f = x' . grad_k f,          constant k
//   stratified    rho = |x'|,   E f = x' . grad_H f,          constant N
//   homogeneous   rho = |x|,    E f = |x| R_{|x|} f,          constant Q
// so gradient terms read |E f / rho^{a}|^p in all three.

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hardylab/quadrature.hpp"
#include "hardylab/spaces.hpp"
#include "hardylab/test_function.hpp"

namespace hlab {

enum class SettingKind { cylindrical, stratified, homogeneous };

inline std::string to_string(SettingKind k) {
    switch (k) {
        case SettingKind::cylindrical: return "cylindrical";
        case SettingKind::stratified: return "stratified-h1";
        case SettingKind::homogeneous: return "homogeneous";
    }
    return "?";
}

struct FieldSample {
    complex f;
    complex Ef;
    double rho = 0.0;
};

class Geometry {
public:
    static Geometry cylindrical(CylindricalSpace s) { return Geometry(SettingKind::cylindrical, std::move(s)); }

    static Geometry stratified(GroupStructure g) {
        if (!g.stratified()) throw InvalidInput("stratified setting needs a group with first-stratum data");
        return Geometry(SettingKind::stratified, std::move(g));
    }

    static Geometry homogeneous(GroupStructure g) { return Geometry(SettingKind::homogeneous, std::move(g)); }

    [[nodiscard]] SettingKind kind() const { return kind_; }
    [[nodiscard]] std::size_t n() const {
        return kind_ == SettingKind::cylindrical ? space().n() : group().n();
    }

    /// k, N or Q.
    [[nodiscard]] double dimension() const {
        switch (kind_) {
            case SettingKind::cylindrical: return static_cast<double>(space().k());
            case SettingKind::stratified: return static_cast<double>(group().first_stratum_dim());
            case SettingKind::homogeneous: return group().Q();
        }
        return 0.0;
    }

    [[nodiscard]] const CylindricalSpace& space() const { return std::get<CylindricalSpace>(data_); }
    [[nodiscard]] const GroupStructure& group() const { return std::get<GroupStructure>(data_); }

    [[nodiscard]] std::string describe() const {
        if (kind_ == SettingKind::cylindrical)
            return "cylindrical(n=" + std::to_string(space().n()) + ",k=" + std::to_string(space().k()) + ")";
        std::string w;
        for (std::size_t i = 0; i < group().n(); ++i)
            w += (i ? "," : "") + std::to_string(group().weights()[i].num) +
                 (group().weights()[i].den == 1 ? "" : "/" + std::to_string(group().weights()[i].den));
        return to_string(kind_) + "(weights=" + w + ",norm=" + to_string(group().norm_kind()) + ")";
    }

    /// Singular radius at x.
    [[nodiscard]] double rho(std::span<const double> x) const {
        switch (kind_) {
            case SettingKind::cylindrical: return space().norm_prime(x);
            case SettingKind::stratified: {
                double s = 0.0;
                for (std::size_t i = 0; i < group().first_stratum_dim(); ++i) s += x[i] * x[i];
                return std::sqrt(s);
            }
            case SettingKind::homogeneous: return group().quasi_norm(x);
        }
        return 0.0;
    }

    /// f, E f and rho at x. Returns false where f vanishes identically
    /// (outside its support), so callers can skip singular weights there.
    bool sample(const TestFunction& f, std::span<const double> x, FieldSample& out) const {
        if (f.is_zero() || !f.support.contains(x)) return false;
        out.rho = rho(x);
        if (!(out.rho > 0.0)) throw InvalidInput("test function '" + f.label + "' is supported on the singular set");
        switch (kind_) {
            case SettingKind::cylindrical: {
                std::array<double, max_cylindrical_dim> v{};
                for (std::size_t j = 0; j < space().k(); ++j) v[j] = x[j];
                const auto [val, d] = f.directional(x, std::span<const double>(v.data(), x.size()));
                out.f = val;
                out.Ef = d;
                break;
            }
            case SettingKind::stratified: {
                const Point v = horizontal_euler_direction(group(), x);
                const auto [val, d] = f.directional(x, v);
                out.f = val;
                out.Ef = d;
                break;
            }
            case SettingKind::homogeneous: {
                const auto [val, d] = radial_derivative_with_value(group(), f, x);
                out.f = val;
                out.Ef = out.rho * d;
                break;
            }
        }
        return true;
    }

    /// Integrate a vector integrand over the support of f with the engine
    /// matching the setting (polar in x' for cylindrical, Cartesian otherwise).
    template <class F>
    std::vector<IntegralResult> integrate(const TestFunction& f, const QuadratureSpec& spec, std::size_t ncomp,
                                          F&& fn, std::span<const std::size_t> scale_group = {}) const {
        if (f.dim != n())
            throw InvalidInput("test function '" + f.label + "' has dimension " + std::to_string(f.dim) +
                               ", setting has n = " + std::to_string(n()));
        if (kind_ == SettingKind::cylindrical) {
            const CylindricalDomain dom = cylindrical_domain(space(), f);
            if (!f.is_zero() && !(dom.r_min > 0.0))
                throw InvalidInput("support of '" + f.label + "' meets the singular set x' = 0");
            return integrate_cylindrical(space(), dom, spec, ncomp, fn, scale_group);
        }
        if (!f.is_zero() && meets_singular_set(f))
            throw InvalidInput("support of '" + f.label + "' meets the singular set of " + describe());
        return integrate_group(group(), std::span<const Interval>(f.support.box), spec, ncomp, fn, scale_group);
    }

    /// Conservative test on the support box: true unless the box, or a
    /// declared annulus of the matching radius, stays away from rho = 0.
    [[nodiscard]] bool meets_singular_set(const TestFunction& f) const {
        if (kind_ == SettingKind::cylindrical) return !(cylindrical_domain(space(), f).r_min > 0.0);
        const std::size_t m = kind_ == SettingKind::stratified ? group().first_stratum_dim() : group().n();
        if (f.support.radial && f.support.r_min > 0.0) {
            // |x'| over the first m coordinates vanishes exactly where rho does;
            // any quasi-norm vanishes only at the origin.
            if (f.support.radial_name == "x'" && f.radial_dims == m) return false;
            if (kind_ == SettingKind::homogeneous && f.support.radial_name == "quasi-norm") return false;
        }
        for (std::size_t i = 0; i < m; ++i)
            if (f.support.box[i].lo > 0.0 || f.support.box[i].hi < 0.0) return false;
        return true;
    }

    /// Same as integrate() but restricted to a band a <= rho <= b of the
    /// cylindrical radius (used for plateau-only integrals).
    template <class F>
    std::vector<IntegralResult> integrate_band(const TestFunction& f, double a, double b, const QuadratureSpec& spec,
                                               std::size_t ncomp, F&& fn) const {
        if (kind_ != SettingKind::cylindrical) throw InvalidInput("band integrals need the cylindrical setting");
        CylindricalDomain d = cylindrical_domain(space(), f);
        d.r_min = std::max(d.r_min, a);
        d.r_max = std::min(d.r_max, b);
        return integrate_cylindrical(space(), d, spec, ncomp, fn);
    }

private:
    Geometry(SettingKind k, std::variant<CylindricalSpace, GroupStructure> d) : kind_(k), data_(std::move(d)) {}

    SettingKind kind_;
    std::variant<CylindricalSpace, GroupStructure> data_;
};

}  // namespace hlab
