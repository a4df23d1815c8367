#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace dihedral {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with `n` points on [a, b].
inline QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0)
{
    if (n < 1) throw InputError("quadrature needs at least one point");
    QuadratureRule r{std::vector<double>(n), std::vector<double>(n)};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r.nodes[i] = mid - half * z;
        r.nodes[n - 1 - i] = mid + half * z;
        r.weights[i] = r.weights[n - 1 - i] = half * w;
    }
    return r;
}

/// Composite Simpson rule with `intervals` subintervals (rounded up to even).
template <class F>
double simpson(F&& f, double a, double b, int intervals)
{
    if (intervals < 2) throw InputError("Simpson needs at least 2 intervals");
    const int m = intervals + intervals % 2;
    const double h = (b - a) / m;
    double s = f(a) + f(b);
    for (int i = 1; i < m; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Composite Simpson rule over equally spaced samples (odd count, at least 3).
inline double simpson_samples(const std::vector<double>& v, double h)
{
    if (v.size() < 3 || v.size() % 2 == 0) throw InputError("Simpson needs an odd number of samples, at least 3");
    double s = v.front() + v.back();
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * v[i];
    return s * h / 3.0;
}

} // namespace dihedral
