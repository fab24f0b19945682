#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "hardylab/quadrature.hpp"
#include "hardylab/testfns.hpp"

using namespace hlab;

namespace {

// Frozen oracles (tests/oracles/radial_oracles.py).
constexpr double bump1d = 0.44399381616807943782;
constexpr double annular_R2 = 2.0922715666694032885;
constexpr double annular_R2_trapezoid = 2.092271566669406;  // 1001^2-node grid
constexpr double annular_R2xR = 0.92895563734551460521;

constexpr double pi = std::numbers::pi;

}  // namespace

TEST(Rules, GaussLegendreIntegratesPolynomialsExactly) {
    for (std::size_t n : {4u, 7u, 16u, 64u}) {
        const auto& r = gauss_legendre(n);
        for (std::size_t d = 0; d < 2 * n; d += 3) {
            double s = 0.0;
            for (const auto& nd : r) s += nd.w * std::pow(nd.x, static_cast<double>(d));
            const double expect = d % 2 ? 0.0 : 2.0 / (static_cast<double>(d) + 1.0);
            EXPECT_NEAR(s, expect, 1e-14) << n << " " << d;
        }
    }
}

TEST(Rules, TanhSinhIntegratesEndpointSingularity) {
    double s = 0.0;
    for (const auto& nd : tanh_sinh(80)) s += nd.w / std::sqrt(1.0 - nd.x * nd.x);
    // Truncation at t = 3.15 keeps 1 - x representable; the tail costs ~1e-8.
    EXPECT_NEAR(s, pi, 1e-7);
}

TEST(Spec, Validation) {
    QuadratureSpec s;
    s.radial_nodes = 3;
    EXPECT_THROW(s.validate(), InvalidInput);
    s = {};
    s.target_rel_err = 0.5;
    EXPECT_THROW(s.validate(), InvalidInput);
    s.target_rel_err = 0.0;
    EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(Cylindrical, GaussianOverThePlane) {
    const CylindricalSpace s(2, 2);
    CylindricalDomain d{0.0, 9.0, {}, true};
    QuadratureSpec q;
    q.radial_nodes = 96;
    q.target_rel_err = 1e-11;
    const auto res = integrate_cylindrical(s, d, q, [](std::span<const double> x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]));
    });
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.value, pi, 1e-10 * pi);
}

TEST(Cylindrical, InverseSquareOnShell) {
    const CylindricalSpace s(3, 3);
    CylindricalDomain d{1.0, 2.0, {}, true};
    const auto res = integrate_cylindrical(s, d, QuadratureSpec{}, [](std::span<const double> x) {
        return 1.0 / (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    });
    EXPECT_NEAR(res.value, 4.0 * pi, 1e-12);
    // Same integral with the full angular grid.
    d.radial_in_x_prime = false;
    const auto res2 = integrate_cylindrical(s, d, QuadratureSpec{}, [](std::span<const double> x) {
        return 1.0 / (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    });
    EXPECT_NEAR(res2.value, 4.0 * pi, 1e-12);
}

TEST(Cylindrical, AnnularBumpAgainstOracles) {
    const CylindricalSpace s(2, 2);
    const auto f = make_annular_bump(s, 1.0, 2.0);
    EXPECT_NEAR(annular_R2_trapezoid, annular_R2, 1e-12);
    QuadratureSpec q;
    q.radial_nodes = 64;
    const auto res = integrate_cylindrical(s, cylindrical_domain(s, f), q,
                                           [&](std::span<const double> x) { return f.value(x).real(); });
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.value, annular_R2, 1e-6 * annular_R2);
    EXPECT_NEAR(res.value, annular_R2, 1e-11 * annular_R2);
}

TEST(Cylindrical, ProductBumpOverR2xR) {
    const CylindricalSpace s(3, 2);
    const auto f = make_annular_bump(s, 1.0, 2.0, 1.0);
    QuadratureSpec q;
    q.radial_nodes = 64;
    q.box_nodes = 64;
    const auto dom = cylindrical_domain(s, f);
    const auto res = integrate_cylindrical(s, dom, q, [&](std::span<const double> x) { return f.value(x).real(); });
    EXPECT_NEAR(res.value, annular_R2xR, 1e-6 * annular_R2xR);
    EXPECT_NEAR(bump1d * annular_R2, annular_R2xR, 1e-15);
}

TEST(Cylindrical, LogarithmicRadialMapAgrees) {
    const CylindricalSpace s(2, 2);
    const auto f = make_annular_bump(s, 1.0, 2.0);
    QuadratureSpec q;
    q.radial_nodes = 64;
    q.radial_map = RadialMap::logarithmic;
    const auto res = integrate_cylindrical(s, cylindrical_domain(s, f), q,
                                           [&](std::span<const double> x) { return f.value(x).real(); });
    EXPECT_NEAR(res.value, annular_R2, 1e-10 * annular_R2);
}

TEST(Cylindrical, LogLogRadialMap) {
    const CylindricalSpace s(2, 2);
    QuadratureSpec q;
    q.radial_map = RadialMap::log_log;
    q.log_center = 2.0;
    // int over 1e-6 < |x| < 1.5 of |x|^{-2} (log(2/|x|))^{-2} = 2 pi [1/log(2/r)] between the radii.
    CylindricalDomain d{1e-6, 1.5, {}, true};
    const auto res = integrate_cylindrical(s, d, q, [](std::span<const double> x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        const double w = std::log(2.0 / std::sqrt(r2));
        return 1.0 / (r2 * w * w);
    });
    const double expect = 2.0 * pi * (1.0 / std::log(2.0 / 1.5) - 1.0 / std::log(2.0 / 1e-6));
    EXPECT_NEAR(res.value, expect, 1e-10 * expect);
    d.r_max = 2.5;
    EXPECT_THROW(integrate_cylindrical(s, d, q, [](std::span<const double>) { return 1.0; }), InvalidInput);
}

TEST(Cylindrical, K1UsesBothHalfLines) {
    const CylindricalSpace s(2, 1);
    const auto f = make_annular_bump(s, 1.0, 2.0, 1.0);
    QuadratureSpec q;
    q.radial_nodes = 64;
    q.box_nodes = 64;
    const auto res = integrate_cylindrical(s, cylindrical_domain(s, f), q,
                                           [&](std::span<const double> x) { return f.value(x).real(); });
    EXPECT_NEAR(res.value, bump1d * bump1d, 1e-10);
}

TEST(Cylindrical, K4NeedsRadialIntegrands) {
    const CylindricalSpace s(4, 4);
    CylindricalDomain d{1.0, 2.0, {}, false};
    EXPECT_THROW(integrate_cylindrical(s, d, QuadratureSpec{}, [](std::span<const double>) { return 1.0; }),
                 InvalidInput);
    d.radial_in_x_prime = true;
    const auto res = integrate_cylindrical(s, d, QuadratureSpec{}, [](std::span<const double>) { return 1.0; });
    EXPECT_NEAR(res.value, 2.0 * pi * pi * (16.0 - 1.0) / 4.0, 1e-11);
}

TEST(Cylindrical, NaNIsReported) {
    const CylindricalSpace s(2, 2);
    CylindricalDomain d{1.0, 2.0, {}, true};
    EXPECT_THROW(integrate_cylindrical(s, d, QuadratureSpec{}, [](std::span<const double>) { return std::nan(""); }),
                 NonConvergence);
}

TEST(Cylindrical, UnresolvedIntegrandIsFlagged) {
    const CylindricalSpace s(2, 2);
    CylindricalDomain d{1.0, 2.0, {}, true};
    QuadratureSpec q;
    q.radial_nodes = 8;
    q.max_refinements = 0;
    q.target_rel_err = 1e-12;
    const auto res = integrate_cylindrical(s, d, q, [](std::span<const double> x) { return std::sin(40.0 * x[0]); });
    EXPECT_FALSE(res.converged);
    EXPECT_GT(res.err_estimate, 0.0);
}

TEST(Group, ZeroIntegrand) {
    const auto g = GroupStructure::heisenberg();
    const std::vector<Interval> box{{-1, 1}, {-1, 1}, {-1, 1}};
    const auto res = integrate_group(g, box, QuadratureSpec{}, [](std::span<const double>) { return 0.0; });
    EXPECT_EQ(res.value, 0.0);
    EXPECT_TRUE(res.converged);
}

TEST(Group, HeisenbergBumpStableUnderDoubling) {
    const auto g = GroupStructure::heisenberg();
    const auto f = make_box_bump({{0.2, 0.8}, {-0.3, 0.3}, {-0.2, 0.2}});
    QuadratureSpec q;
    q.box_nodes = 32;
    auto fn = [&](std::span<const double> x) { return f.value(x).real(); };
    const auto a = integrate_group(g, f.support.box, q, fn);
    const auto b = integrate_group(g, f.support.box, q.scaled(2.0), fn);
    EXPECT_GT(a.value, 0.0);
    EXPECT_NEAR(a.value, b.value, 1e-6 * b.value);
    EXPECT_NEAR(b.value, std::pow(bump1d, 3) * 0.3 * 0.3 * 0.2, 1e-12);
}

TEST(Group, EuclideanMatchesCylindricalOnRadialIntegrand) {
    const auto g = GroupStructure::euclidean(2);
    const CylindricalSpace s(2, 2);
    const auto f = make_annular_bump(s, 1.0, 2.0);
    auto fn = [&](std::span<const double> x) { return f.value(x).real(); };
    QuadratureSpec q;
    q.box_nodes = 256;
    q.panels = 8;
    q.target_rel_err = 1e-8;
    const auto a = integrate_group(g, f.support.box, q, fn);
    QuadratureSpec qc;
    qc.radial_nodes = 64;
    const auto b = integrate_cylindrical(s, cylindrical_domain(s, f), qc, fn);
    EXPECT_NEAR(a.value, b.value, 1e-8 * b.value);
}

TEST(Invariants, DoublingStaysWithinReportedError) {
    const CylindricalSpace s(3, 2);
    const auto f = random_cylindrical(s, 99);
    auto fn = [&](std::span<const double> x) { return std::norm(f.value(x)); };
    const QuadratureSpec q;
    const auto a = integrate_cylindrical(s, cylindrical_domain(s, f), q, fn);
    const auto b = integrate_cylindrical(s, cylindrical_domain(s, f), q.scaled(2.0), fn);
    EXPECT_LE(std::abs(a.value - b.value), std::max(a.err_estimate, q.target_rel_err * std::abs(a.value)));
}

TEST(Invariants, Linearity) {
    const CylindricalSpace s(3, 3);
    const auto f = random_cylindrical(s, 5), h = random_cylindrical(s, 6);
    auto ff = [&](std::span<const double> x) { return f.value(x).real(); };
    auto hh = [&](std::span<const double> x) { return h.value(x).imag(); };
    const QuadratureSpec q;
    const auto dom = cylindrical_domain(s, f);
    auto dh = cylindrical_domain(s, h);
    CylindricalDomain u{std::min(dom.r_min, dh.r_min), std::max(dom.r_max, dh.r_max), {}, false};
    const double a = 1.7, b = -0.4;
    const auto i1 = integrate_cylindrical(s, u, q, ff).value;
    const auto i2 = integrate_cylindrical(s, u, q, hh).value;
    const auto i3 =
        integrate_cylindrical(s, u, q, [&](std::span<const double> x) { return a * ff(x) + b * hh(x); }).value;
    EXPECT_NEAR(i3, a * i1 + b * i2, 1e-12 * (std::abs(a * i1) + std::abs(b * i2)));
}

TEST(Invariants, BitReproducible) {
    const CylindricalSpace s(3, 2);
    const auto f = random_cylindrical(s, 31);
    auto fn = [&](std::span<const double> x) { return std::norm(f.value(x)); };
    const auto a = integrate_cylindrical(s, cylindrical_domain(s, f), QuadratureSpec{}, fn);
    const auto b = integrate_cylindrical(s, cylindrical_domain(s, f), QuadratureSpec{}, fn);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.err_estimate, b.err_estimate);
}
