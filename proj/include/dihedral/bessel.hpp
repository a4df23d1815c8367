#pragma once

// Modified Bessel functions I_ν, K_ν of real order.
//
// K_μ, K_{μ+1} for |μ| ≤ 1/2 come from Temme's series when r < 2 and from Steed's
// continued fraction otherwise; K_ν follows by forward recurrence. I_ν is obtained from
// its power series for r ≤ 30 (all terms positive), and beyond that from the continued
// fraction for I'_ν/I_ν and the Wronskian I_ν K'_ν - I'_ν K_ν = -1/r.

#include <array>
#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "expr.hpp"

namespace dihedral {

struct BesselIK {
    double I = 0.0, K = 0.0;
};

namespace detail {

// Taylor coefficients of 1/Γ(1+x) at 0.
inline constexpr std::array<double, 26> kRecipGamma = {
    1.0, 0.57721566490153287, -0.6558780715202539, -0.042002635034095237, 0.16653861138229151,
    -0.042197734555544333, -0.009621971527876973, 0.007218943246663099, -0.001165167591859065,
    -0.00021524167411495098, 0.0001280502823881162, -2.0134854780788239e-5, -1.2504934821426708e-6,
    1.1330272319816959e-6, -2.0563384169776071e-7, 6.1160951044814161e-9, 5.0020076444692229e-9,
    -1.1812745704870203e-9, 1.0434267116911005e-10, 7.7822634399050708e-12, -3.696805618642206e-12,
    5.1003702874544768e-13, -2.0583260535665066e-14, -5.348122539423017e-15, 1.2267786282382608e-15,
    -1.1812593016974588e-16};

// Temme's Γ₁(μ) = (1/Γ(1-μ) - 1/Γ(1+μ)) / 2μ and Γ₂(μ) = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2 for |μ| ≤ 1/2.
inline void temme_gammas(double mu, double& g1, double& g2, double& gplus, double& gminus)
{
    g1 = 0.0;
    g2 = 0.0;
    double p = 1.0; // μ^k for even k, μ^(k-1) for odd k
    for (std::size_t k = 0; k < kRecipGamma.size(); ++k) {
        if (k % 2 == 0) {
            g2 += kRecipGamma[k] * p;
        } else {
            g1 -= kRecipGamma[k] * p;
            p *= mu * mu;
        }
    }
    gplus = g2 - mu * g1;
    gminus = g2 + mu * g1;
}

// I_ν, K_ν for ν ≥ 0.
inline BesselIK bessel_ik_nonnegative(double nu, double x)
{
    constexpr double eps = 1e-16, fpmin = 1e-300;
    constexpr int maxit = 100000;
    const int nl = static_cast<int>(nu + 0.5);
    const double mu = nu - nl, mu2 = mu * mu, xi = 1.0 / x, xi2 = 2.0 * xi;

    // Continued fraction for I'_ν/I_ν (modified Lentz).
    double h = std::max(nu * xi, fpmin), b = xi2 * nu, d = 0.0, c = h;
    int i = 1;
    for (; i <= maxit; ++i) {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    if (i > maxit) throw NumericalError("Bessel continued fraction did not converge");
    // Downward recurrence for I (unnormalised) from ν to μ.
    double ril = fpmin, ripl = h * ril;
    const double ril1 = ril;
    double fact = nu * xi;
    for (int l = nl; l >= 1; --l) {
        const double t = fact * ril + ripl;
        fact -= xi;
        ripl = fact * t + ril;
        ril = t;
    }
    const double f = ripl / ril;

    double kmu = 0.0, k1 = 0.0;
    if (x < 2.0) {
        const double x2 = 0.5 * x, pimu = std::numbers::pi * mu;
        const double fct = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
        double dd = -std::log(x2), e = mu * dd;
        const double fct2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
        double g1, g2, gp, gm;
        temme_gammas(mu, g1, g2, gp, gm);
        double ff = fct * (g1 * std::cosh(e) + g2 * fct2 * dd);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / gp, q = 0.5 / (e * gm), cc = 1.0;
        dd = x2 * x2;
        double sum1 = p;
        for (i = 1; i <= maxit; ++i) {
            ff = (i * ff + p + q) / (i * i - mu2);
            cc *= dd / i;
            p /= i - mu;
            q /= i + mu;
            const double del = cc * ff;
            sum += del;
            sum1 += cc * (p - i * ff);
            if (std::abs(del) < std::abs(sum) * eps) break;
        }
        if (i > maxit) throw NumericalError("Bessel series did not converge");
        kmu = sum;
        k1 = sum1 * xi2;
    } else {
        double bb = 2.0 * (1.0 + x), dd = 1.0 / bb, hh = dd, delh = dd, q1 = 0.0, q2 = 1.0;
        const double a1 = 0.25 - mu2;
        double q = a1, cc = a1, a = -a1, s = 1.0 + q * delh;
        for (i = 2; i <= maxit; ++i) {
            a -= 2 * (i - 1);
            cc = -a * cc / i;
            const double qnew = (q1 - bb * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += cc * qnew;
            bb += 2.0;
            dd = 1.0 / (bb + a * dd);
            delh = (bb * dd - 1.0) * delh;
            hh += delh;
            const double dels = q * delh;
            s += dels;
            if (std::abs(dels / s) < eps) break;
        }
        if (i > maxit) throw NumericalError("Bessel continued fraction did not converge");
        hh *= a1;
        kmu = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
        k1 = kmu * (mu + x + 0.5 - hh) * xi;
    }
    const double kmup = mu * xi * kmu - k1;
    const double imu = xi / (f * kmu - kmup);
    BesselIK out;
    if (x <= 30.0) {
        const double q = 0.25 * x * x;
        double term = std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0), sum = term;
        for (i = 1; i <= maxit && term > eps * sum; ++i) {
            term *= q / (i * (i + nu));
            sum += term;
        }
        out.I = sum;
    } else {
        out.I = imu * ril1 / ril;
    }
    for (i = 1; i <= nl; ++i) {
        const double t = (mu + i) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = t;
    }
    out.K = kmu;
    return out;
}

} // namespace detail

/// I_ν(r) and K_ν(r) without range checks (r > 0, any real ν with |ν| up to a few dozen).
inline BesselIK bessel_ik_unchecked(double nu, double r)
{
    if (!(r > 0.0)) throw InputError("Bessel functions need r > 0, got " + format_double(r));
    const double a = std::abs(nu);
    BesselIK v = detail::bessel_ik_nonnegative(a, r);
    // I_{-a} = I_a + (2/π) sin(aπ) K_a; K is even in the order.
    if (nu < 0.0) v.I += 2.0 / std::numbers::pi * std::sin(a * std::numbers::pi) * v.K;
    return v;
}

/// I_ν(r), K_ν(r) for 0 < r ≤ 10 and |ν| ≤ 5.
inline BesselIK bessel_kr(double nu, double r)
{
    if (!(r > 0.0 && r <= 10.0)) throw InputError("bessel_kr: r must lie in (0, 10], got " + format_double(r));
    if (!(std::abs(nu) <= 5.0)) throw InputError("bessel_kr: |nu| must be at most 5, got " + format_double(nu));
    return bessel_ik_unchecked(nu, r);
}

} // namespace dihedral
