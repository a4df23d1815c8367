#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <dihedral/sector_spectra.hpp>

using namespace dihedral;

namespace {

constexpr double pi = std::numbers::pi;

// Nearest numeric eigenvalue to x.
double nearest(const std::vector<double>& v, double x)
{
    double best = v.front();
    for (double y : v)
        if (std::abs(y - x) < std::abs(best - x)) best = y;
    return best;
}

} // namespace

TEST(ClosedSpectrum, HalfPlaneSector)
{
    const auto r = p_spectrum_closed({pi, pi}, -2, 1);
    ASSERT_EQ(r.eigenvalues.size(), 4u);
    EXPECT_DOUBLE_EQ(r.eigenvalues[0], -2.5);
    EXPECT_DOUBLE_EQ(r.eigenvalues[1], -1.5);
    EXPECT_DOUBLE_EQ(r.eigenvalues[2], -0.5);
    EXPECT_DOUBLE_EQ(r.eigenvalues[3], 0.5);
    EXPECT_DOUBLE_EQ(r.min_abs, 0.5);
    EXPECT_TRUE(r.esa);
}

TEST(ClosedSpectrum, PluggedExamples)
{
    const auto a = p_spectrum_closed({pi / 2, pi}, -2, 2);
    for (int k = -2; k <= 2; ++k) EXPECT_NEAR(a.eigenvalues[static_cast<std::size_t>(k + 2)], -1.0 + 2.0 * k, 1e-15);
    EXPECT_DOUBLE_EQ(a.min_abs, 1.0);
    EXPECT_TRUE(a.esa);

    const auto b = p_spectrum_closed({pi, pi / 2}, -2, 2);
    for (int k = -2; k <= 2; ++k) EXPECT_NEAR(b.eigenvalues[static_cast<std::size_t>(k + 2)], -0.25 + k, 1e-15);
    EXPECT_DOUBLE_EQ(b.min_abs, 0.25);
    EXPECT_FALSE(b.esa);
}

TEST(ClosedSpectrum, EqualAnglesGiveMinusHalfPlusLattice)
{
    for (double a : {0.3, 1.0, pi / 3, 2.5, pi}) {
        const auto r = p_spectrum_closed({a, a}, -4, 4);
        for (int k = -4; k <= 4; ++k) EXPECT_DOUBLE_EQ(r.eigenvalues[static_cast<std::size_t>(k + 4)], (2.0 * k * pi - a) / (2.0 * a));
    }
}

TEST(ClosedSpectrum, MinAbsMatchesWideScan)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(0.05, 3 * pi);
    for (int t = 0; t < 500; ++t) {
        const double a = U(rng), b = U(rng);
        double scan = std::numeric_limits<double>::infinity();
        for (int k = -2000; k <= 2000; ++k) scan = std::min(scan, std::abs(-b / (2 * a) + k * pi / a));
        EXPECT_NEAR(p_spectrum_closed({a, b}).min_abs, scan, 1e-12);
    }
    EXPECT_THROW(p_spectrum_closed({0.0, 1.0}), InputError);
    EXPECT_THROW(p_spectrum_closed({1.0, -1.0}), InputError);
}

TEST(Esa, Examples)
{
    EXPECT_TRUE(esa_verdict({pi / 3, pi / 2}).esa);
    EXPECT_FALSE(esa_verdict({pi / 2, pi / 3}).esa);
    EXPECT_TRUE(esa_verdict_mixed(pi / 2).esa);
    EXPECT_FALSE(esa_verdict_mixed(0.6 * pi).esa);
    EXPECT_THROW(esa_verdict({1.1 * pi, 1.0}), InputError);
    EXPECT_THROW(esa_verdict({1.0, 3.5}), InputError);
    EXPECT_THROW(esa_verdict_mixed(4.0), InputError);
}

TEST(Esa, TruthTableAgreesOnGrid)
{
    int disagreements = 0;
    for (int i = 1; i <= 20; ++i)
        for (int j = 1; j <= 20; ++j) {
            const SectorPair s{i * pi / 20, j * pi / 20};
            const bool verdict = esa_verdict(s).esa;
            const bool order = s.alpha <= s.beta;
            const bool spectral = p_spectrum_closed(s).min_abs >= 0.5;
            disagreements += (verdict != order) + (verdict != spectral);
        }
    EXPECT_EQ(disagreements, 0);
}

TEST(Esa, MixedConditionFlipsAtQuarterTurn)
{
    const double edge = pi / 2;
    EXPECT_TRUE(esa_verdict_mixed(edge).esa);
    EXPECT_TRUE(p_spectrum_mixed_closed(edge).esa);
    const double above = std::nextafter(edge, 4.0), below = std::nextafter(edge, 0.0);
    EXPECT_FALSE(esa_verdict_mixed(above).esa);
    EXPECT_FALSE(p_spectrum_mixed_closed(above).esa);
    EXPECT_TRUE(p_spectrum_mixed_closed(below).esa);
    for (int i = 1; i <= 40; ++i) {
        const double a = i * pi / 40;
        EXPECT_EQ(esa_verdict_mixed(a).esa, p_spectrum_mixed_closed(a).esa) << a;
        EXPECT_EQ(esa_verdict_mixed(a).esa, i <= 20) << a;
    }
}

TEST(NumericSpectrum, RightAngleSector)
{
    const auto r = p_spectrum_numeric({pi / 2, pi / 2}, 4096, 5);
    ASSERT_EQ(r.eigenvalues.size(), 5u);
    for (double x : {-0.5, 1.5, -2.5, 3.5}) EXPECT_NEAR(nearest(r.eigenvalues, x), x, 1e-3) << x;
    EXPECT_NEAR(r.min_abs, 0.5, 1e-9);
    EXPECT_TRUE(r.esa);
}

TEST(NumericSpectrum, UnequalAngles)
{
    const auto r = p_spectrum_numeric({2 * pi / 3, pi}, 4096, 6);
    for (int k = -2; k <= 2; ++k) EXPECT_NEAR(nearest(r.eigenvalues, -0.75 + 1.5 * k), -0.75 + 1.5 * k, 1e-3) << k;
    EXPECT_TRUE(r.esa);
    const auto bad = p_spectrum_numeric({pi, pi / 2}, 1024, 3);
    EXPECT_NEAR(bad.min_abs, 0.25, 1e-4);
    EXPECT_FALSE(bad.esa);
}

TEST(NumericSpectrum, SecondOrderConvergence)
{
    for (const SectorPair s : {SectorPair{pi / 3, pi}, SectorPair{pi / 2, pi / 2}, SectorPair{pi, 2 * pi / 3}}) {
        const double coarse = p_spectrum_error(s, 1024), fine = p_spectrum_error(s, 2048);
        EXPECT_GT(coarse / fine, 3.5);
        EXPECT_LT(coarse / fine, 4.5);
    }
}

TEST(NumericSpectrum, MixedCondition)
{
    const double a = 0.7 * pi;
    const auto r = p_spectrum_mixed_numeric(a, 2048, 4);
    for (int k = -2; k <= 1; ++k) {
        const double x = -0.5 + (k + 0.5) * pi / a;
        EXPECT_NEAR(nearest(r.eigenvalues, x), x, 1e-4) << k;
    }
    EXPECT_FALSE(r.esa);
    EXPECT_THROW(p_spectrum_numeric({1.0, 1.0}, 32), InputError);
}

TEST(GallotMeyer, FormulaAndAuxiliaryIdentity)
{
    EXPECT_NEAR(gallot_meyer_bound(3).bound, 0.70710678118654752, 1e-15);
    EXPECT_NEAR(gallot_meyer_bound(4).bound, 1.2247448713915890, 1e-15);
    EXPECT_EQ(gallot_meyer_bound(5).auxiliary_min, 4.0);
    for (int n = 3; n <= 30; ++n) {
        const auto g = gallot_meyer_bound(n);
        EXPECT_EQ(g.bound, std::sqrt((n - 1.0) * (n - 2.0)) / 2.0) << n;
        EXPECT_EQ(g.auxiliary_min, (n - 1.0) * (n - 1.0) / 4.0) << n;
        EXPECT_GE(g.bound, 0.5);
    }
    EXPECT_THROW(gallot_meyer_bound(2), InputError);
}

TEST(Bessel, HalfIntegerClosedForms)
{
    for (double r : {1e-6, 0.01, 0.5, 1.0, 1.99, 2.0, 2.01, 4.0, 7.5, 10.0}) {
        const double s = std::sqrt(2.0 / (pi * r)), k = std::sqrt(pi / (2.0 * r)) * std::exp(-r);
        const double sh = std::sinh(r), ch = std::cosh(r);
        auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
        EXPECT_LT(rel(bessel_kr(0.5, r).I, s * sh), 1e-12) << r;
        EXPECT_LT(rel(bessel_kr(-0.5, r).I, s * ch), 1e-12) << r;
        EXPECT_LT(rel(bessel_kr(0.5, r).K, k), 1e-12) << r;
        EXPECT_LT(rel(bessel_kr(1.5, r).K, k * (1 + 1 / r)), 1e-12) << r;
        EXPECT_LT(rel(bessel_kr(2.5, r).K, k * (1 + 3 / r + 3 / (r * r))), 1e-12) << r;
        if (r > 0.01) {
            EXPECT_LT(rel(bessel_kr(1.5, r).I, s * (ch - sh / r)), 1e-10) << r;
            EXPECT_LT(rel(bessel_kr(2.5, r).I, s * ((1 + 3 / (r * r)) * sh - 3 / r * ch)), 1e-10) << r;
        }
    }
    EXPECT_NEAR(bessel_kr(0.5, 1.0).K, 0.461068504, 1e-9);
    EXPECT_NEAR(bessel_kr(0.5, 1.0).I, 0.937674888, 1e-9);
}

TEST(Bessel, IntegerOrderReferenceValues)
{
    EXPECT_NEAR(bessel_kr(0, 1.0).I, 1.2660658777520082, 1e-15);
    EXPECT_NEAR(bessel_kr(0, 1.0).K, 0.42102443824070834, 1e-15);
    EXPECT_NEAR(bessel_kr(1, 2.0).K, 0.13986588181652243, 1e-15);
}

TEST(Bessel, SymmetryWronskianAndRecurrence)
{
    EXPECT_LE(std::abs(bessel_kr(0.3, 0.7).K - bessel_kr(-0.3, 0.7).K), 1e-12);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> N(-5.0, 4.0), R(0.01, 10.0);
    for (int t = 0; t < 500; ++t) {
        const double nu = N(rng), r = R(rng);
        const auto a = bessel_kr(nu, r), b = bessel_kr(nu + 1, r);
        // I_ν K_{ν+1} + I_{ν+1} K_ν = 1/r; for ν < -1 the two products cancel, so the
        // rounding budget scales with their size.
        const double scale = (std::abs(a.I * b.K) + std::abs(b.I * a.K)) * r;
        EXPECT_NEAR((a.I * b.K + b.I * a.K) * r, 1.0, 1e-13 * std::max(scale, 10.0)) << nu << " " << r;
        if (nu - 1 >= -5.0) {
            const auto c = bessel_kr(nu - 1, r);
            EXPECT_NEAR((b.K - c.K) / (2 * nu / r * a.K), 1.0, 1e-11) << nu << " " << r;
        }
    }
}

TEST(Bessel, RangeChecks)
{
    EXPECT_THROW(bessel_kr(0.5, 0.0), InputError);
    EXPECT_THROW(bessel_kr(0.5, 10.5), InputError);
    EXPECT_THROW(bessel_kr(5.5, 1.0), InputError);
    EXPECT_NO_THROW(bessel_kr(-5.0, 10.0));
}

TEST(Deficiency, VerdictsMatchOpenInterval)
{
    for (double l : {0.0, 0.25, -0.25, 0.49, -0.49, 0.5, -0.5, 0.75, -0.75, 1.0, -1.0})
        EXPECT_EQ(deficiency_test(l).l2, std::abs(l) < 0.5) << l;
}

TEST(Deficiency, ZeroHasClosedFormIntegrand)
{
    // √r K_{±1/2}(r) = √(π/2) e^{-r}, so the integrand is π e^{-2r}.
    const auto d = deficiency_test(0.0);
    for (std::size_t k = 0; k < d.eps.size(); ++k)
        EXPECT_NEAR(d.integral[k], pi / 2 * (std::exp(-2 * d.eps[k]) - std::exp(-2.0)) + pi * d.eps[k], 1e-10);
    EXPECT_NEAR(d.integral.back(), pi / 2 * (1 - std::exp(-2.0)), 1e-10);
}

TEST(Deficiency, DivergenceRatesMatchSmallRAsymptotics)
{
    // λ = 1: r K_{3/2}² ~ (π/2) r^{-2}, so ε·I(ε) → π/2.
    const auto one = deficiency_test(1.0);
    EXPECT_NEAR(one.eps.back() * one.integral.back(), pi / 2, 1e-6);
    // λ = 1/2: r K_1² ~ 1/r, so each two-decade refinement adds ln 100.
    const auto half = deficiency_test(0.5);
    const std::size_t n = half.integral.size();
    EXPECT_NEAR(half.integral[n - 1] - half.integral[n - 2], std::log(100.0), 1e-6);
    EXPECT_THROW(deficiency_test(0.0, {2, 4}), InputError);
    EXPECT_THROW(deficiency_test(0.0, {2, 1, 3}), InputError);
}

TEST(Hardy, NumericNormRespectsBounds)
{
    for (double l : {0.6, 1.0, 2.0, -0.6, -1.0, -2.0}) {
        const auto h = hardy_norm(l);
        EXPECT_DOUBLE_EQ(h.bound, 1.0 / (std::abs(l) - 0.5));
        EXPECT_LE(h.numeric, 1.01 * h.bound) << l;
        // Mellin transform of the dilation-invariant kernel gives the exact norm.
        const double exact = l > 0 ? 1.0 / (l + 0.5) : 1.0 / (-l - 0.5);
        EXPECT_LE(h.numeric, exact * (1 + 1e-9)) << l;
        if (std::abs(l) >= 1.0) {
            EXPECT_NEAR(h.numeric, exact, 0.02 * exact) << l;
        }
    }
    EXPECT_NEAR(hardy_norm(1.0, 1.0).numeric, hardy_norm(1.0, 7.0).numeric, 1e-9);
    EXPECT_GT(hardy_norm(0.51).numeric, hardy_norm(0.6).numeric);
    EXPECT_THROW(hardy_norm(0.5), InputError);
    EXPECT_THROW(hardy_norm(-0.2), InputError);
}
