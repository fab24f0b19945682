#include <gtest/gtest.h>

#include <random>

#include "hardylab/testfns.hpp"

using namespace hlab;

TEST(AnnularBump, SupportAndPositivity) {
    const CylindricalSpace s(3, 2);
    const auto f = make_annular_bump(s, 1.0, 2.0, 1.0);
    EXPECT_EQ(f.value(Point{1.0, 0.0, 0.0}), complex(0.0, 0.0));
    EXPECT_EQ(f.value(Point{0.0, 2.0, 0.0}), complex(0.0, 0.0));
    EXPECT_GT(f.value(Point{1.5, 0.0, 0.0}).real(), 0.0);
    EXPECT_THROW(make_annular_bump(s, 0.0, 1.0), InvalidInput);
    EXPECT_THROW(make_annular_bump(s, 1.0, 1.0), InvalidInput);
    EXPECT_THROW(make_annular_bump(s, 1.0, 0.5), InvalidInput);
}

TEST(Factories, ExactlyZeroOutsideSupport) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for (const auto& f : test_function_library()) {
        int tested = 0;
        for (int i = 0; tested < 1000 && i < 200000; ++i) {
            Point x(f.dim);
            for (auto& v : x) v = u(rng);
            if (f.support.contains(x)) continue;
            ++tested;
            ASSERT_EQ(f.value(x), complex(0.0, 0.0)) << f.label;
            for (const auto& g : f.gradient(x)) ASSERT_EQ(g, complex(0.0, 0.0)) << f.label;
        }
        EXPECT_EQ(tested, 1000) << f.label;
    }
}

TEST(Extremizer, H1PlateauProfile) {
    const CylindricalSpace s(3, 3);
    const auto f = make_extremizer(s, ExtremizerKind::h1, 2.0, 2.0, 0.0, 1.0, 0.1);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lr(std::log(0.1), std::log(10.0)), ang(0.0, 6.283185307179586);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double r = std::exp(lr(rng)), th = ang(rng);
        const Point x{r * std::cos(th) * 0.6, r * std::sin(th) * 0.6, r * 0.8};
        const double expect = std::pow(r, -0.5);
        worst = std::max(worst, std::abs(f.value(x) - expect) / expect);
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(Extremizer, H1HolderRatioIsOneOnPlateau) {
    const CylindricalSpace s(3, 3);
    const double p = 2.0, alpha = 2.0, k = 3.0;
    const auto f = make_extremizer(s, ExtremizerKind::h1, p, alpha, 0.0, 1.0, 0.1);
    for (double r : {0.2, 1.0, 7.0}) {
        const Point x{r, 0.0, 0.0};
        const auto [v, dv] = f.directional(x, x);
        const double ratio = std::pow(std::abs(p / (k - alpha)), p) * std::pow(std::abs(dv), p) / std::pow(std::abs(v), p);
        EXPECT_NEAR(ratio, 1.0, 1e-12);
    }
}

TEST(Extremizer, H2PlateauAndErrors) {
    const CylindricalSpace s(2, 2);
    const auto f = make_extremizer(s, ExtremizerKind::h2, 2.0, 0.0, -1.0, 1.0, 0.3);
    const double r = std::exp(-1.0);
    EXPECT_NEAR(f.value(Point{r, 0.0}).real(), 1.0, 1e-14);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ls(std::log(0.3), std::log(1.0 / 0.3));
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double sv = std::exp(ls(rng));
        const double rr = std::exp(-sv);
        const double expect = std::sqrt(sv);
        worst = std::max(worst, std::abs(f.value(Point{0.0, rr}) - expect) / expect);
    }
    EXPECT_LE(worst, 1e-12);
    EXPECT_THROW(make_extremizer(s, ExtremizerKind::h2, 2.0, 0.0, -2.0, 1.0, 0.3), InvalidInput);
    EXPECT_THROW(make_extremizer(s, ExtremizerKind::h1, 2.0, 2.0, 0.0, 1.0, 0.3), InvalidInput);
    EXPECT_THROW(make_extremizer(s, ExtremizerKind::h1, 2.0, 0.0, 0.0, 1.0, 0.0), InvalidInput);
    EXPECT_THROW(make_extremizer(s, ExtremizerKind::h2, 2.0, 0.0, -1.0, 1.0, 0.01), InvalidInput);
}

TEST(Extremizer, SupportGrowsAsEpsDecreases) {
    const CylindricalSpace s(2, 2);
    double lo = 1.0, hi = 1.0;
    for (double eps : {0.5, 0.2, 0.1, 0.05}) {
        const auto f = make_extremizer(s, ExtremizerKind::h1, 3.0, 0.0, 0.0, 1.0, eps);
        EXPECT_LT(f.support.r_min, lo);
        EXPECT_GT(f.support.r_max, hi);
        lo = f.support.r_min;
        hi = f.support.r_max;
    }
}

TEST(Extremizer, ZeroAmplitudeIsTheZeroFunction) {
    ExtremizerOptions o;
    o.amplitude = 0.0;
    const auto f = make_extremizer(CylindricalSpace(3, 3), ExtremizerKind::h1, 2.0, 2.0, 0.0, 1.0, 0.1, o);
    EXPECT_TRUE(f.is_zero());
    EXPECT_EQ(f.value(Point{1.0, 0.0, 0.0}), complex(0.0, 0.0));
}

TEST(PhaseModulated, Properties) {
    const CylindricalSpace s(3, 2);
    const auto base = random_cylindrical(s, 4);
    const auto same = make_phase_modulated(base, Expr(0.0), "0");
    const Expr theta = Expr::var(0) * Expr::var(2) + sin(Expr::var(1));
    const auto mod = make_phase_modulated(base, theta, "x1*x3+sin(x2)");
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.4, 2.4);
    int interior = 0;
    for (int i = 0; i < 2000; ++i) {
        const Point x{u(rng), u(rng), u(rng) * 0.5};
        EXPECT_EQ(same.value(x), base.value(x));
        EXPECT_NEAR(std::abs(mod.value(x)), std::abs(base.value(x)), 1e-14 * (1.0 + std::abs(base.value(x))));
        if (base.value(x) == complex(0.0, 0.0) || interior >= 20) continue;
        ++interior;
        // Product rule: grad(f e^{i theta}) = (grad f + i f grad theta) e^{i theta}.
        const double th = x[0] * x[2] + std::sin(x[1]);
        const std::array<double, 3> dth{x[2], std::cos(x[1]), x[0]};
        const complex ph = std::exp(complex(0.0, th));
        const auto gb = base.gradient(x);
        const auto gm = mod.gradient(x);
        const complex fv = base.value(x);
        for (std::size_t j = 0; j < 3; ++j) {
            const complex expect = (gb[j] + complex(0.0, 1.0) * fv * dth[j]) * ph;
            EXPECT_LE(std::abs(gm[j] - expect), 1e-10 * (1.0 + std::abs(expect)));
        }
    }
    EXPECT_EQ(interior, 20);
}

TEST(RandomFunctions, DeterministicAndNonvanishingInside) {
    const CylindricalSpace s(2, 1);
    const auto a = random_cylindrical(s, 17), b = random_cylindrical(s, 17), c = random_cylindrical(s, 18);
    const double mid = 0.5 * (a.support.r_min + a.support.r_max);
    const Point x{mid, 0.1};
    EXPECT_EQ(a.value(x), b.value(x));
    EXPECT_NE(a.value(x), c.value(x));
    EXPECT_GT(std::abs(a.value(x)), 0.0);
    EXPECT_GT(std::abs(a.value(Point{-mid, 0.1})), 0.0);
}

TEST(RandomFunctions, GroupBoxesStayInsideTheQuasiBall) {
    const std::vector<GroupStructure> groups = {GroupStructure::euclidean(2), GroupStructure::euclidean(3),
                                                GroupStructure::anisotropic({{1, 1}, {2, 1}}),
                                                GroupStructure::heisenberg()};
    for (const auto& g : groups)
        for (std::uint64_t seed = 0; seed < 50; ++seed)
            for (double R : {0.5, 1.0, 2.0}) {
                const auto f = random_group(g, seed, R);
                EXPECT_LT(max_quasi_norm_on_support(g, f), 0.95 * R);
                EXPECT_GT(f.support.box[0].lo, 0.0);
            }
}
