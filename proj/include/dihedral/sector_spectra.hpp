#pragma once

// Spectra of the link operator P = [[-1/2, -∂θ], [∂θ, -1/2]] on an arc of length α with
// φ₁(0) = 0 and -φ₀(α) sin(δ/2) + φ₁(α) cos(δ/2) = 0, δ = β - α, together with the
// self-adjointness tests built on them.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bessel.hpp"
#include "errors.hpp"
#include "expr.hpp"
#include "quadrature.hpp"

namespace dihedral {

struct SectorPair {
    double alpha = std::numbers::pi; ///< source sector angle
    double beta = std::numbers::pi;  ///< target sector angle

    double delta() const noexcept { return beta - alpha; }

    void validate() const
    {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("sector angle alpha must be positive, got " + format_double(alpha));
        if (!(beta > 0.0) || !std::isfinite(beta)) throw InputError("sector angle beta must be positive, got " + format_double(beta));
    }
};

struct SpectrumReport {
    std::vector<double> eigenvalues; ///< ascending
    double min_abs = 0.0;
    bool esa = false;
};

namespace detail {

// min over k ∈ Z of |(2kπ - c) / (2α)|.
inline double lattice_min_abs(double c, double alpha)
{
    const double kstar = std::round(c / (2.0 * std::numbers::pi));
    double best = std::numeric_limits<double>::infinity();
    for (double k = kstar - 1; k <= kstar + 1; ++k) best = std::min(best, std::abs((2.0 * k * std::numbers::pi - c) / (2.0 * alpha)));
    return best;
}

inline std::vector<double> nearest_to_zero(std::vector<double> v, std::size_t count)
{
    std::sort(v.begin(), v.end(), [](double a, double b) { return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b; });
    v.resize(std::min(count, v.size()));
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace detail

/// {-β/2α + kπ/α : kmin ≤ k ≤ kmax}; min_abs is taken over all of Z.
inline SpectrumReport p_spectrum_closed(const SectorPair& s, int kmin = -3, int kmax = 3)
{
    s.validate();
    SpectrumReport r;
    for (int k = kmin; k <= kmax; ++k) r.eigenvalues.push_back((2.0 * k * std::numbers::pi - s.beta) / (2.0 * s.alpha));
    r.min_abs = detail::lattice_min_abs(s.beta, s.alpha);
    r.esa = r.min_abs >= 0.5;
    return r;
}

/// The `count` closed-form eigenvalues nearest 0 (ties resolved toward the negative one), ascending.
inline std::vector<double> p_spectrum_closed_nearest(const SectorPair& s, std::size_t count)
{
    const int span = static_cast<int>(count) + 2 + static_cast<int>(std::ceil(s.beta / (2.0 * std::numbers::pi)));
    return detail::nearest_to_zero(p_spectrum_closed(s, -span, span).eigenvalues, count);
}

/// Condition B on the edge θ = 0 and its orthogonal complement B⊥ on θ = α: spectrum
/// {-1/2 + (k + 1/2)π/α}.
inline SpectrumReport p_spectrum_mixed_closed(double alpha, int kmin = -3, int kmax = 3)
{
    SectorPair{alpha, alpha}.validate();
    SpectrumReport r;
    for (int k = kmin; k <= kmax; ++k) r.eigenvalues.push_back(((2.0 * k + 1.0) * std::numbers::pi - alpha) / (2.0 * alpha));
    double best = std::numeric_limits<double>::infinity();
    const double kstar = std::round(alpha / (2.0 * std::numbers::pi) - 0.5);
    for (double k = kstar - 1; k <= kstar + 1; ++k) best = std::min(best, std::abs(((2.0 * k + 1.0) * std::numbers::pi - alpha) / (2.0 * alpha)));
    r.min_abs = best;
    r.esa = r.min_abs >= 0.5;
    return r;
}

struct EsaVerdict {
    bool esa = false;
    std::string reason;
};

/// Essential self-adjointness of the sector Dirac operator: holds iff α ≤ β (α, β ∈ (0, π]).
inline EsaVerdict esa_verdict(const SectorPair& s)
{
    s.validate();
    if (s.alpha > std::numbers::pi || s.beta > std::numbers::pi)
        throw InputError("esa_verdict needs alpha, beta in (0, pi], got alpha = " + format_double(s.alpha) + ", beta = " + format_double(s.beta));
    if (s.alpha <= s.beta) return {true, "alpha <= beta"};
    return {false, "alpha > beta: the eigenvalue -beta/(2 alpha) lies in (-1/2, 0)"};
}

/// Mixed B / B⊥ condition: essentially self-adjoint iff α ≤ π/2.
inline EsaVerdict esa_verdict_mixed(double alpha)
{
    SectorPair{alpha, alpha}.validate();
    if (alpha > std::numbers::pi) throw InputError("esa_verdict_mixed needs alpha in (0, pi], got " + format_double(alpha));
    if (alpha <= std::numbers::pi / 2) return {true, "alpha <= pi/2"};
    return {false, "alpha > pi/2: the eigenvalue -1/2 + pi/(2 alpha) lies in (0, 1/2)"};
}

namespace detail {

// Number of eigenvalues below x of the symmetric tridiagonal matrix (d, e), from the signs
// of the LDLᵀ pivots of T - x (Sturm count).
inline std::size_t sturm_count(const Vec& d, const Vec& e, double x)
{
    double scale = 1.0;
    for (Eigen::Index k = 0; k < e.size(); ++k) scale = std::max(scale, e[k] * e[k]);
    const double pivmin = std::numeric_limits<double>::min() * scale;
    std::size_t negative = 0;
    double q = 1.0;
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        q = d[k] - x - (k > 0 ? e[k - 1] * e[k - 1] / q : 0.0);
        if (std::abs(q) < pivmin) q = -pivmin;
        if (q < 0.0) ++negative;
    }
    return negative;
}

// k-th smallest eigenvalue (0-based) by bisection on the Sturm count, to full precision.
inline double tridiagonal_eigenvalue(const Vec& d, const Vec& e, Eigen::Index k)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (static_cast<Eigen::Index>(sturm_count(d, e, mid)) > k) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Staggered grid on [0, α] with h = α/N: φ₀ at midpoints (j + 1/2)h, φ₁ at nodes jh, j ≥ 1
// (φ₁(0) = 0 is built in). The condition at θ = α closes the last node with a half cell:
// -φ₀(α) s + φ₁(α) c = 0. With unknowns interleaved φ₀,½ φ₁,1 φ₀,3/2 … the weighted operator
// is a symmetric tridiagonal matrix.
inline std::vector<double> link_spectrum(double alpha, double s, double c, int N, std::size_t wanted)
{
    const double h = alpha / N;
    const bool dirichlet = std::abs(s) < 1e-14;
    std::vector<double> diag, weight;
    for (int j = 0; j < N; ++j) {
        diag.push_back(0.0);
        weight.push_back(h);
        if (j + 1 < N) {
            diag.push_back(0.0);
            weight.push_back(h);
        } else if (!dirichlet) {
            diag.push_back(c / s);
            weight.push_back(0.5 * h);
        }
    }
    const auto n = static_cast<Eigen::Index>(diag.size());
    Vec d(n), e(n - 1);
    for (Eigen::Index k = 0; k < n; ++k) d[k] = diag[static_cast<std::size_t>(k)] / weight[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 0; k + 1 < n; ++k)
        e[k] = (k % 2 == 0 ? -1.0 : 1.0) / std::sqrt(weight[static_cast<std::size_t>(k)] * weight[static_cast<std::size_t>(k + 1)]);
    // The `wanted` eigenvalues on either side of 1/2, i.e. either side of 0 after the shift.
    const auto below = static_cast<Eigen::Index>(sturm_count(d, e, 0.5));
    const Eigen::Index first = std::max<Eigen::Index>(0, below - static_cast<Eigen::Index>(wanted));
    const Eigen::Index last = std::min<Eigen::Index>(n, below + static_cast<Eigen::Index>(wanted));
    std::vector<double> out;
    for (Eigen::Index k = first; k < last; ++k) out.push_back(tridiagonal_eigenvalue(d, e, k) - 0.5);
    return out;
}

inline SpectrumReport finish(std::vector<double> all, std::size_t count)
{
    SpectrumReport r;
    r.eigenvalues = nearest_to_zero(std::move(all), count);
    r.min_abs = std::numeric_limits<double>::infinity();
    for (double v : r.eigenvalues) r.min_abs = std::min(r.min_abs, std::abs(v));
    // The constant mode at α = β lands on -1/2 only up to rounding.
    r.esa = r.min_abs >= 0.5 - 1e-9;
    return r;
}

} // namespace detail

/// The `count` eigenvalues nearest 0 of the discretised P_B on N cells.
inline SpectrumReport p_spectrum_numeric(const SectorPair& s, int N, std::size_t count = 5)
{
    s.validate();
    if (N < 64) throw InputError("p_spectrum_numeric needs N >= 64, got " + std::to_string(N));
    const double half = 0.5 * s.delta();
    return detail::finish(detail::link_spectrum(s.alpha, std::sin(half), std::cos(half), N, count), count);
}

/// Numeric spectrum for the mixed B / B⊥ condition (φ₀(α) = 0).
inline SpectrumReport p_spectrum_mixed_numeric(double alpha, int N, std::size_t count = 5)
{
    SectorPair{alpha, alpha}.validate();
    if (N < 64) throw InputError("p_spectrum_mixed_numeric needs N >= 64, got " + std::to_string(N));
    return detail::finish(detail::link_spectrum(alpha, 1.0, 0.0, N, count), count);
}

/// Largest distance from one of the `count` closed-form eigenvalues nearest 0 to the numeric spectrum.
inline double p_spectrum_error(const SectorPair& s, int N, std::size_t count = 5)
{
    const auto exact = p_spectrum_closed_nearest(s, count);
    const auto numeric = p_spectrum_numeric(s, N, count + 4).eigenvalues;
    double err = 0.0;
    for (double x : exact) {
        double best = std::numeric_limits<double>::infinity();
        for (double y : numeric) best = std::min(best, std::abs(x - y));
        err = std::max(err, best);
    }
    return err;
}

struct GallotMeyer {
    int n = 0;
    double bound = 0.0;         ///< √((n-1)(n-2))/2
    double auxiliary_min = 0.0; ///< min_p p(n-1-p) + (p - (n-1)/2)²
};

/// Lower bound for |P_B| on a spherical link of dimension n - 1, obtained by completing the
/// square in λ² ≥ x² - √(n-1) x + min_p[p(n-1-p) + (p - (n-1)/2)²].
inline GallotMeyer gallot_meyer_bound(int n)
{
    if (n < 3) throw InputError("gallot_meyer_bound needs n >= 3, got " + std::to_string(n));
    GallotMeyer g;
    g.n = n;
    g.auxiliary_min = std::numeric_limits<double>::infinity();
    const double m = n - 1;
    for (int p = 0; p <= n - 1; ++p) g.auxiliary_min = std::min(g.auxiliary_min, p * (m - p) + (p - m / 2) * (p - m / 2));
    g.bound = std::sqrt(g.auxiliary_min - m / 4);
    return g;
}

struct DeficiencyReport {
    double lambda = 0.0;
    bool l2 = false;
    std::vector<double> eps;      ///< ε_k = 10^(-e_k)
    std::vector<double> integral; ///< ∫_ε^1 (r K²_{λ-1/2} + r K²_{λ+1/2}) dr plus the small-r tail
    std::vector<double> tail;     ///< closed-form ∫_0^ε of the leading small-r behaviour (0 where divergent)
};

namespace detail {

// ∫_0^ε r K_ν(r)² dr from the leading term of K_ν at 0; +∞ when |ν| ≥ 1.
inline double bessel_tail(double nu, double eps)
{
    const double a = std::abs(nu);
    if (a >= 1.0) return std::numeric_limits<double>::infinity();
    if (a == 0.0) {
        constexpr double euler_gamma = 0.57721566490153287;
        const double u = std::log(2.0) - euler_gamma - std::log(eps);
        return 0.5 * eps * eps * (u * u + u + 0.5);
    }
    const double c = std::tgamma(a) * std::tgamma(a) / 4.0 * std::pow(2.0, 2.0 * a);
    return c * std::pow(eps, 2.0 - 2.0 * a) / (2.0 - 2.0 * a);
}

} // namespace detail

/// L² test for the solution pair (√r K_{λ-1/2}, √r K_{λ+1/2}) near r = 0. `exponents` are
/// increasing e_k > 0 with ε_k = 10^(-e_k). The pair is reported L² when the last two
/// refinements change the integral by less than 1e-6 relative.
inline DeficiencyReport deficiency_test(double lambda, const std::vector<double>& exponents = {2, 4, 6, 8, 10, 12})
{
    if (!std::isfinite(lambda)) throw InputError("deficiency_test: lambda must be finite");
    if (exponents.size() < 3) throw InputError("deficiency_test: need at least three epsilon refinements");
    for (std::size_t k = 0; k < exponents.size(); ++k)
        if (!(exponents[k] > 0.0) || (k && !(exponents[k] > exponents[k - 1])) || exponents[k] > 300)
            throw InputError("deficiency_test: epsilon exponents must increase within (0, 300]");

    const double nu0 = lambda - 0.5, nu1 = lambda + 0.5;
    const auto rule = gauss_legendre(20, 0.0, 1.0);
    // ∫ over r ∈ [10^-b, 10^-a] in s = ln r, one panel per decade or less.
    auto piece = [&](double a, double b) {
        const int panels = std::max(1, static_cast<int>(std::ceil(b - a)));
        const double s0 = -b * std::log(10.0), s1 = -a * std::log(10.0), w = (s1 - s0) / panels;
        double sum = 0.0;
        for (int p = 0; p < panels; ++p)
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double r = std::exp(s0 + w * (p + rule.nodes[q]));
                const double k0 = bessel_ik_unchecked(nu0, r).K, k1 = bessel_ik_unchecked(nu1, r).K;
                const double v = std::sqrt(r) * k0, u = std::sqrt(r) * k1;
                sum += w * rule.weights[q] * r * (v * v + u * u);
            }
        return sum;
    };

    DeficiencyReport rep;
    rep.lambda = lambda;
    double numeric = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < exponents.size(); ++k) {
        numeric += piece(prev, exponents[k]);
        prev = exponents[k];
        const double eps = std::pow(10.0, -exponents[k]);
        double tail = 0.0;
        for (double nu : {nu0, nu1}) {
            const double t = detail::bessel_tail(nu, eps);
            if (std::isfinite(t)) tail += t;
        }
        rep.eps.push_back(eps);
        rep.tail.push_back(tail);
        rep.integral.push_back(std::isfinite(numeric) ? numeric + tail : std::numeric_limits<double>::infinity());
    }
    auto stable = [&](std::size_t k) {
        const double a = rep.integral[k - 1], b = rep.integral[k];
        return std::isfinite(a) && std::isfinite(b) && std::abs(b - a) / a < 1e-6;
    };
    const std::size_t last = rep.integral.size() - 1;
    rep.l2 = stable(last) && stable(last - 1);
    return rep;
}

struct HardyReport {
    double lambda = 0.0;
    double numeric = 0.0; ///< largest singular value of the Galerkin matrix
    double bound = 0.0;   ///< 1/(|λ| - 1/2)
};

/// Operator norm on L²(0, δ) of ξ ↦ (1/r)∫_0^r (t/r)^λ ξ(t) dt (λ ≥ 1/2) or
/// ξ ↦ (1/r)∫_r^δ (t/r)^λ ξ(t) dt (λ ≤ -1/2). The operator is dilation invariant, so the
/// estimate uses `cells` geometric cells δ q^k spanning 60 e-folds plus [0, δ q^cells]. The
/// Galerkin matrix is a compression, so its norm never exceeds the true one.
inline HardyReport hardy_norm(double lambda, double delta = 1.0, int cells = 600)
{
    if (!(std::abs(lambda) > 0.5) || !std::isfinite(lambda))
        throw InputError("hardy_norm needs |lambda| > 1/2, got " + format_double(lambda));
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InputError("hardy_norm needs delta > 0");
    if (cells < 8) throw InputError("hardy_norm needs at least 8 cells");
    const double q = std::exp(-60.0 / cells);
    // Cell k = [edges[k+1], edges[k]], the last one reaching 0.
    std::vector<double> edges(static_cast<std::size_t>(cells) + 2);
    for (int k = 0; k <= cells; ++k) edges[static_cast<std::size_t>(k)] = delta * std::pow(q, k);
    edges.back() = 0.0;
    const int n = cells + 1;

    auto power_integral = [](double p, double a, double b) {
        if (std::abs(p + 1.0) < 1e-13) return std::log(b / a);
        return (std::pow(b, p + 1.0) - (a == 0.0 ? 0.0 : std::pow(a, p + 1.0))) / (p + 1.0);
    };
    const double L = lambda;
    // Diagonal cell [a, b]: ∫_a^b r^{-1-λ} ∫ t^λ dt dr over t < r (λ > 0) or t > r (λ < 0).
    auto diagonal = [&](double a, double b) {
        if (L > 0) {
            const double apow = a == 0.0 ? 0.0 : std::pow(a, L + 1.0);
            return ((b - a) - apow * power_integral(-1.0 - L, a, b)) / (L + 1.0);
        }
        if (std::abs(L + 1.0) < 1e-13) return (b - a) - (a == 0.0 ? 0.0 : a * std::log(b / a));
        return (std::pow(b, L + 1.0) * power_integral(-1.0 - L, a, b) - (b - a)) / (L + 1.0);
    };
    Mat M = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double ri0 = edges[static_cast<std::size_t>(i) + 1], ri1 = edges[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const double tj0 = edges[static_cast<std::size_t>(j) + 1], tj1 = edges[static_cast<std::size_t>(j)];
            double v = 0.0;
            if (i == j) {
                v = diagonal(ri0, ri1);
            } else if ((L > 0 && j > i) || (L < 0 && j < i)) {
                v = power_integral(-1.0 - L, ri0, ri1) * power_integral(L, tj0, tj1);
            }
            M(i, j) = v / std::sqrt((ri1 - ri0) * (tj1 - tj0));
        }
    }
    const Mat G = M.transpose() * M;
    const double top = Eigen::SelfAdjointEigenSolver<Mat>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    return {lambda, std::sqrt(std::max(0.0, top)), 1.0 / (std::abs(lambda) - 0.5)};
}

} // namespace dihedral
