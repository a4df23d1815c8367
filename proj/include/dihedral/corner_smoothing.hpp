#pragma once

// Circular fillets of a planar corner and the integrals of their signed curvature.
//
// The vertex sits at the origin, one edge runs along +x and the other along the direction
// at angle θ̄, so the domain is the sector {0 ≤ arg ≤ θ̄}. The boundary is traversed with
// the domain on the left: in along the θ̄ edge, out along the +x edge. The fillet of radius
// r is tangent to both edges at distance r·tan(|π − θ̄|/2) from the vertex; it lies inside
// the domain for θ̄ < π and outside for θ̄ > π.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace dihedral {

struct CurveSample {
    double s = 0.0;
    std::array<double, 2> position{}, tangent{};
    double curvature = 0.0;
};

struct SmoothedCorner {
    double theta = 0.0, radius = 0.0;
    double tangent_distance = 0.0; ///< distance from the vertex to either tangency point
    double length = 0.0;
    std::vector<CurveSample> curve; ///< equally spaced in arclength, odd count
};

inline constexpr int kFilletIntervals = 2048;

inline SmoothedCorner smoothing_arc(double theta, double r, double edge_length = 1.0, int intervals = kFilletIntervals)
{
    constexpr double pi = std::numbers::pi;
    if (!(theta > 0.0 && theta < 2.0 * pi))
        throw InputError("corner angle must lie in (0, 2pi), got " + format_double(theta));
    if (std::abs(theta - pi) < 1e-12) throw GeometryError("corner angle pi is a straight edge; nothing to smooth");
    if (!(r > 0.0 && std::isfinite(r))) throw InputError("smoothing radius must be positive, got " + format_double(r));
    if (intervals < 2 || intervals % 2 != 0) throw InputError("fillet needs an even number of intervals >= 2");

    SmoothedCorner c;
    c.theta = theta;
    c.radius = r;
    const double turn = pi - theta;
    c.tangent_distance = r * std::tan(0.5 * std::abs(turn));
    if (!(c.tangent_distance < edge_length))
        throw InputError("smoothing radius " + format_double(r) + " too large for edges of length "
                         + format_double(edge_length));
    c.length = r * std::abs(turn);

    const double k = turn > 0.0 ? 1.0 / r : -1.0 / r;
    const double phi0 = theta + pi;
    const std::array<double, 2> start{c.tangent_distance * std::cos(theta), c.tangent_distance * std::sin(theta)};
    const std::array<double, 2> centre{start[0] - std::sin(phi0) / k, start[1] + std::cos(phi0) / k};
    c.curve.resize(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) {
        auto& p = c.curve[static_cast<std::size_t>(i)];
        p.s = c.length * i / intervals;
        const double phi = phi0 + k * p.s;
        p.tangent = {std::cos(phi), std::sin(phi)};
        p.position = {centre[0] + std::sin(phi) / k, centre[1] - std::cos(phi) / k};
        p.curvature = k;
    }
    return c;
}

/// ∫ k ds over the fillet (Simpson).
inline double turning_integral(const SmoothedCorner& c)
{
    std::vector<double> k(c.curve.size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = c.curve[i].curvature;
    return simpson_samples(k, c.length / static_cast<double>(k.size() - 1));
}

/// ∫ k φ² ds over the fillet (Simpson). φ is a function of (x1, x2).
inline double weighted_turning_integral(const SmoothedCorner& c, const Expr& phi)
{
    if (phi.arity() > 2) throw InputError("test function may only use x1 and x2");
    std::vector<double> v(c.curve.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = c.curve[i];
        const double f = phi(std::span<const double>(p.position.data(), 2));
        v[i] = p.curvature * f * f;
    }
    return simpson_samples(v, c.length / static_cast<double>(v.size() - 1));
}

struct LimitTerm {
    double radius = 0.0, integral = 0.0, error = 0.0;
};

struct LimitReport {
    double theta = 0.0;
    double limit = 0.0; ///< (π − θ̄) φ(0)²
    std::vector<LimitTerm> terms;
};

inline LimitReport mean_curvature_limit(double theta, const Expr& phi, const std::vector<double>& radii,
                                        double edge_length = 1.0)
{
    if (radii.empty()) throw InputError("need at least one smoothing radius");
    if (phi.arity() > 2) throw InputError("test function may only use x1 and x2");
    LimitReport out;
    out.theta = theta;
    const double v = phi({0.0, 0.0});
    out.limit = (std::numbers::pi - theta) * v * v;
    out.terms.resize(radii.size());
    parallel_for(radii.size(), [&](std::size_t i) {
        const auto c = smoothing_arc(theta, radii[i], edge_length);
        const double I = weighted_turning_integral(c, phi);
        out.terms[i] = {radii[i], I, I - out.limit};
    });
    return out;
}

} // namespace dihedral
