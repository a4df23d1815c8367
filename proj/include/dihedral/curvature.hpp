#pragma once

// Riemannian curvature of chart metrics, second fundamental forms of faces
// and dihedral angles of polyhedral domains.
//
// Conventions: R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z and
// R_ijkl = <R(∂_i,∂_j)∂_k, ∂_l>, so R_ijji is the sectional curvature times
// the squared area of ∂_i ∧ ∂_j. Second fundamental forms are taken with
// respect to the inner unit normal N: A(X,Y) = g(∇_X Y, N), H = tr A, which
// makes the boundary of a Euclidean ball mean-convex.

#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "domain.hpp"
#include "errors.hpp"
#include "expr.hpp"
#include "metric.hpp"
#include "quadrature.hpp"

namespace dihedral {

/// Dense 4-index array R(i,j,k,l).
class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(int n) : n_(n), v_(static_cast<std::size_t>(n * n * n * n), 0.0) {}
    int dim() const noexcept { return n_; }
    double& operator()(int i, int j, int k, int l) { return v_[idx(i, j, k, l)]; }
    double operator()(int i, int j, int k, int l) const { return v_[idx(i, j, k, l)]; }

private:
    std::size_t idx(int i, int j, int k, int l) const
    {
        return static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l);
    }
    int n_ = 0;
    std::vector<double> v_;
};

struct CurvaturePack {
    Mat g;
    std::vector<Mat> christoffel; ///< christoffel[k](i,j) = Γ^k_ij
    Tensor4 riemann;              ///< all indices lowered
    Mat ricci;
    double scalar = 0.0;
};

namespace detail {

// Lowered Christoffel symbols Γ_kij and their first derivatives.
struct ChristoffelData {
    std::vector<Mat> lower;                // lower[k](i,j) = Γ_kij
    std::vector<std::vector<Mat>> dlower;  // dlower[m][k](i,j) = ∂_m Γ_kij
};

inline ChristoffelData christoffel_lower(const MetricJets& J)
{
    const int n = static_cast<int>(J.g.rows());
    ChristoffelData c{std::vector<Mat>(n, Mat(n, n)), std::vector<std::vector<Mat>>(n, std::vector<Mat>(n, Mat(n, n)))};
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                c.lower[k](i, j) = 0.5 * (J.dg[i](j, k) + J.dg[j](i, k) - J.dg[k](i, j));
                for (int m = 0; m < n; ++m)
                    c.dlower[m][k](i, j) = 0.5 * (J.d2g[m][i](j, k) + J.d2g[m][j](i, k) - J.d2g[m][k](i, j));
            }
    return c;
}

} // namespace detail

/// Christoffel symbols, Riemann, Ricci and scalar curvature of g at an interior chart point.
inline CurvaturePack curvature_tensors(const MetricField& g, const Vec& x)
{
    const MetricJets J = metric_jets(g, x);
    const int n = g.dim();
    const Mat ginv = J.g.inverse();
    const auto C = detail::christoffel_lower(J);

    CurvaturePack p;
    p.g = J.g;
    p.christoffel.assign(n, Mat::Zero(n, n));
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) p.christoffel[l] += ginv(l, m) * C.lower[m];

    // ∂_i Γ^l_jk = (∂_i g^lm) Γ_mjk + g^lm ∂_i Γ_mjk, with ∂_i g^-1 = -g^-1 (∂_i g) g^-1
    std::vector<std::vector<Mat>> dG(n, std::vector<Mat>(n, Mat::Zero(n, n))); // dG[i][l](j,k)
    for (int i = 0; i < n; ++i) {
        const Mat dginv = -ginv * J.dg[i] * ginv;
        for (int l = 0; l < n; ++l)
            for (int m = 0; m < n; ++m) dG[i][l] += dginv(l, m) * C.lower[m] + ginv(l, m) * C.dlower[i][m];
    }

    // R^l_ijk = ∂_i Γ^l_jk - ∂_j Γ^l_ik + Γ^l_ip Γ^p_jk - Γ^l_jp Γ^p_ik
    Tensor4 up(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = dG[i][l](j, k) - dG[j][l](i, k);
                    for (int q = 0; q < n; ++q)
                        v += p.christoffel[l](i, q) * p.christoffel[q](j, k) - p.christoffel[l](j, q) * p.christoffel[q](i, k);
                    up(i, j, k, l) = v;
                }
    p.riemann = Tensor4(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = 0.0;
                    for (int m = 0; m < n; ++m) v += J.g(l, m) * up(i, j, k, m);
                    p.riemann(i, j, k, l) = v;
                }
    p.ricci = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) p.ricci(j, k) += up(i, j, k, i);
    p.ricci = 0.5 * (p.ricci + p.ricci.transpose()).eval();
    p.scalar = (ginv.cwiseProduct(p.ricci)).sum();
    return p;
}

/// Gram-Schmidt orthonormalisation of the coordinate frame: columns are e_1..e_n in coordinates.
inline Mat orthonormal_frame(const Mat& g)
{
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) throw GeometryError("metric is not positive definite");
    const Mat L = llt.matrixL();
    return L.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(g.rows(), g.cols()));
}

/// Index pairs (a,b), a<b, in lexicographic order: the basis e_a ∧ e_b of Λ².
inline std::vector<std::pair<int, int>> bivector_basis(int n)
{
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) out.emplace_back(a, b);
    return out;
}

/// Riemann tensor expressed in an orthonormal frame (columns of E).
inline Tensor4 frame_riemann(const Tensor4& R, const Mat& E)
{
    const int n = R.dim();
    Tensor4 out(n);
    // contract one index at a time
    Tensor4 t1(n), t2(n), t3(n);
    for (int a = 0; a < n; ++a)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = 0;
                    for (int i = 0; i < n; ++i) v += E(i, a) * R(i, j, k, l);
                    t1(a, j, k, l) = v;
                }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = 0;
                    for (int j = 0; j < n; ++j) v += E(j, b) * t1(a, j, k, l);
                    t2(a, b, k, l) = v;
                }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int l = 0; l < n; ++l) {
                    double v = 0;
                    for (int k = 0; k < n; ++k) v += E(k, c) * t2(a, b, k, l);
                    t3(a, b, c, l) = v;
                }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double v = 0;
                    for (int l = 0; l < n; ++l) v += E(l, d) * t3(a, b, c, l);
                    out(a, b, c, d) = v;
                }
    return out;
}

/// Curvature operator on Λ² in the Gram-Schmidt frame: <ℛ(e_a∧e_b), e_c∧e_d> = -R_abcd.
inline Mat curvature_operator(const CurvaturePack& p)
{
    const Tensor4 Rf = frame_riemann(p.riemann, orthonormal_frame(p.g));
    const auto basis = bivector_basis(p.riemann.dim());
    const auto N = static_cast<Eigen::Index>(basis.size());
    Mat op(N, N);
    for (Eigen::Index r = 0; r < N; ++r)
        for (Eigen::Index c = 0; c < N; ++c)
            op(r, c) = -Rf(basis[r].first, basis[r].second, basis[c].first, basis[c].second);
    return op;
}

inline Mat curvature_operator(const MetricField& g, const Vec& x) { return curvature_operator(curvature_tensors(g, x)); }

/// Largest |R_ijkl + R_jikl|, |R_ijkl + R_ijlk|, |R_ijkl - R_klij| and first-Bianchi residual,
/// relative to max |R| (absolute when R vanishes).
inline double riemann_symmetry_residual(const Tensor4& R)
{
    const int n = R.dim();
    double scale = 0.0, res = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double v = R(i, j, k, l);
                    scale = std::max(scale, std::abs(v));
                    res = std::max({res, std::abs(v + R(j, i, k, l)), std::abs(v + R(i, j, l, k)), std::abs(v - R(k, l, i, j)),
                                    std::abs(v + R(j, k, i, l) + R(k, i, j, l))});
                }
    return scale > 1.0 ? res / scale : res;
}

struct FaceGeometry {
    Mat basis; ///< g-orthonormal tangent frame of the face (columns, coordinates)
    Vec normal; ///< inner unit normal N
    Mat A;     ///< second fundamental form in `basis`
    double H = 0.0;
};

namespace detail {

// g(Γ(X,Y), N) = Γ_kij X^i Y^j N^k.
inline double christoffel_pair(const std::vector<Mat>& lower, const Vec& X, const Vec& Y, const Vec& N)
{
    double v = 0.0;
    for (std::size_t k = 0; k < lower.size(); ++k) v += N[static_cast<Eigen::Index>(k)] * X.dot(lower[k] * Y);
    return v;
}

// g-orthonormalise the columns of B (Gram-Schmidt in column order).
inline Mat g_orthonormalise(const Mat& g, Mat B)
{
    for (Eigen::Index c = 0; c < B.cols(); ++c) {
        for (Eigen::Index p = 0; p < c; ++p) B.col(c) -= B.col(p).dot(g * B.col(c)) * B.col(p);
        const double len = std::sqrt(B.col(c).dot(g * B.col(c)));
        if (!(len > 0.0)) throw GeometryError("degenerate tangent frame");
        B.col(c) /= len;
    }
    return B;
}

} // namespace detail

/// Inner unit normal of face i of D under the metric with matrix g.
inline Vec inner_normal(const Mat& g, const PolyDomain& D, int i)
{
    const Vec a = D.face(i).a;
    Vec N = g.ldlt().solve(a);
    N /= std::sqrt(a.dot(N));
    return D.complement() ? Vec(-N) : N;
}

/// Second fundamental form and mean curvature of face i at x (flat coordinate face).
inline FaceGeometry face_geometry(const MetricField& g, const PolyDomain& D, int i, const Vec& x)
{
    if (g.dim() != D.dim()) throw InputError("metric and domain dimensions differ");
    D.require_on_face(i, x);
    const MetricJets J = metric_jets(g, x);
    const auto C = detail::christoffel_lower(J);
    FaceGeometry f;
    f.normal = inner_normal(J.g, D, i);
    f.basis = detail::g_orthonormalise(J.g, D.tangent_basis({i}));
    const auto k = f.basis.cols();
    f.A.resize(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) f.A(a, b) = detail::christoffel_pair(C.lower, f.basis.col(a), f.basis.col(b), f.normal);
    f.A = 0.5 * (f.A + f.A.transpose()).eval();
    f.H = f.A.trace();
    return f;
}

/// Second fundamental form of a parametrised hypersurface Y(s) (components as expressions in
/// s = (x1..x_{n-1})). The inner side is the one facing `inside`.
inline FaceGeometry face_geometry_parametrized(const MetricField& g, const std::vector<Expr>& Y, const Vec& s, const Vec& inside)
{
    const int n = g.dim();
    if (static_cast<int>(Y.size()) != n || s.size() != n - 1 || inside.size() != n)
        throw InputError("parametrisation dimensions do not match the metric");
    const std::span<const double> ss(s.data(), s.size());
    Vec y(n);
    Mat T(n, n - 1);
    std::vector<Mat> d2(n, Mat(n - 1, n - 1));
    for (int a = 0; a < n; ++a) {
        const Jet j = eval_jet(Y[a], ss);
        y[a] = j.value();
        for (int p = 0; p < n - 1; ++p) {
            T(a, p) = j.grad()[p];
            for (int q = 0; q < n - 1; ++q) d2[a](p, q) = j.hess()(p, q);
        }
    }
    const MetricJets J = metric_jets(g, y);
    const auto C = detail::christoffel_lower(J);

    Eigen::FullPivLU<Mat> lu(T.transpose() * J.g);
    if (lu.rank() != n - 1) throw GeometryError("parametrisation is singular");
    Vec N = lu.kernel().col(0);
    N /= std::sqrt(N.dot(J.g * N));
    if (N.dot(J.g * (inside - y)) < 0.0) N = -N;

    Mat a(n - 1, n - 1);
    for (int p = 0; p < n - 1; ++p)
        for (int q = 0; q < n - 1; ++q) {
            Vec acc(n);
            for (int c = 0; c < n; ++c) acc[c] = d2[c](p, q);
            a(p, q) = acc.dot(J.g * N) + detail::christoffel_pair(C.lower, T.col(p), T.col(q), N);
        }
    FaceGeometry f;
    f.normal = N;
    f.basis = detail::g_orthonormalise(J.g, T);
    // change of basis from the coordinate tangents T to the orthonormal frame
    const Mat P = (T.transpose() * J.g * T).ldlt().solve(T.transpose() * J.g * f.basis);
    f.A = P.transpose() * a * P;
    f.A = 0.5 * (f.A + f.A.transpose()).eval();
    f.H = f.A.trace();
    return f;
}

/// Unit inner normals of F_ij inside F_i (u) and inside F_j (v) under the metric matrix g.
inline std::pair<Vec, Vec> corner_normals(const Mat& g, const PolyDomain& D, int i, int j)
{
    const Mat B = D.tangent_basis({i, j});
    if (B.cols() != D.dim() - 2) throw GeometryError("faces " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " are parallel");
    auto inward = [&](int f, int other) {
        const Vec& af = D.face(f).a;
        const Vec& ao = D.face(other).a;
        Vec w = ao - ao.dot(af) * af;
        if (B.cols() > 0) {
            const Mat gB = g * B;
            w -= B * (B.transpose() * gB).ldlt().solve(gB.transpose() * w);
        }
        const double len = std::sqrt(w.dot(g * w));
        if (!(len > 0.0)) throw GeometryError("degenerate corner");
        return Vec(w / len);
    };
    return {inward(i, j), inward(j, i)};
}

/// Dihedral angle along F_ij at x. Angles in (π, 2π) arise for reflex corners.
inline double dihedral_angle(const MetricField& g, const PolyDomain& D, int i, int j, const Vec& x)
{
    if (g.dim() != D.dim()) throw InputError("metric and domain dimensions differ");
    if (D.dim() < 2) throw InputError("dihedral angles need dimension at least 2");
    if (i == j) throw InputError("dihedral angle needs two distinct faces");
    D.require_on_face(i, x);
    D.require_on_face(j, x);
    const Mat G = metric_at(g, x);
    const auto [u, v] = corner_normals(G, D, i, j);
    const double c = u.dot(G * v);
    if (std::abs(c) > 1.0 - 1e-12) throw GeometryError("degenerate corner: inner normals are parallel");
    const double angle = std::acos(std::clamp(c, -1.0, 1.0));
    const double eps = 1e-6 * D.diameter();
    const Vec probe = x + eps * 0.5 * (u + v);
    return D.contains(probe) ? angle : std::numbers::pi + angle;
}

/// Vertices of a bounded convex polygon in counter-clockwise order, each paired with the
/// face index of the edge that leaves it.
inline std::vector<std::pair<Vec, int>> polygon_boundary(const PolyDomain& D)
{
    if (D.dim() != 2 || D.complement() || !D.bounded()) throw InputError("expected a bounded convex polygon");
    std::vector<Vec> V = D.vertices();
    Vec c = Vec::Zero(2);
    for (const auto& v : V) c += v;
    c /= static_cast<double>(V.size());
    std::sort(V.begin(), V.end(), [&](const Vec& p, const Vec& q) {
        return std::atan2(p[1] - c[1], p[0] - c[0]) < std::atan2(q[1] - c[1], q[0] - c[0]);
    });
    std::vector<std::pair<Vec, int>> out;
    const double tol = 1e-9 * std::max(1.0, D.diameter());
    for (std::size_t k = 0; k < V.size(); ++k) {
        const Vec& p = V[k];
        const Vec& q = V[(k + 1) % V.size()];
        int face = -1;
        for (int f = 0; f < D.face_count() && face < 0; ++f)
            if (std::abs(D.slack(f, p)) < tol && std::abs(D.slack(f, q)) < tol) face = f;
        if (face < 0) throw GeometryError("polygon edge without a supporting face");
        out.emplace_back(p, face);
    }
    return out;
}

struct GaussBonnetTerms {
    double curvature = 0.0; ///< ∫ K dA
    double geodesic = 0.0;  ///< ∫ k_g ds
    double turning = 0.0;   ///< Σ (π - θ_v)
    double euler = 1.0;
    double defect = 0.0;
};

/// ∫K dA + ∫k_g ds + Σ(π - θ_v) - 2πχ for a convex polygon with `order`-point Gauss rules.
inline GaussBonnetTerms gauss_bonnet(const MetricField& g, const PolyDomain& D, int order = 24)
{
    if (g.dim() != 2) throw InputError("Gauss-Bonnet needs a 2-dimensional metric");
    const auto bd = polygon_boundary(D);
    const auto gl = gauss_legendre(order, 0.0, 1.0);
    GaussBonnetTerms t;

    Vec c = Vec::Zero(2);
    for (const auto& [v, f] : bd) c += v;
    c /= static_cast<double>(bd.size());

    const std::size_t nv = bd.size();
    for (std::size_t k = 0; k < nv; ++k) {
        const Vec& p = bd[k].first;
        const Vec& q = bd[(k + 1) % nv].first;
        const int face = bd[k].second;

        // Triangle (c, p, q) via the collapsed square x = c + s (p - c) + s t (q - p).
        const Vec e1 = p - c, e2 = q - p;
        const double jac = std::abs(e1[0] * e2[1] - e1[1] * e2[0]);
        for (int a = 0; a < order; ++a)
            for (int b = 0; b < order; ++b) {
                const double s = gl.nodes[a], tt = gl.nodes[b];
                const Vec x = c + s * e1 + s * tt * e2;
                const auto P = curvature_tensors(g, x);
                const double K = 0.5 * P.scalar;
                t.curvature += gl.weights[a] * gl.weights[b] * K * std::sqrt(P.g.determinant()) * s * jac;
            }

        // Edge p -> q: k_g ds = g(Γ(γ', γ'), N) / |γ'| dt for a straight coordinate segment.
        for (int a = 0; a < order; ++a) {
            const Vec x = p + gl.nodes[a] * e2;
            const MetricJets J = metric_jets(g, x);
            const auto C = detail::christoffel_lower(J);
            const Vec N = inner_normal(J.g, D, face);
            t.geodesic += gl.weights[a] * detail::christoffel_pair(C.lower, e2, e2, N) / std::sqrt(e2.dot(J.g * e2));
        }

        const int prev_face = bd[(k + nv - 1) % nv].second;
        t.turning += std::numbers::pi - dihedral_angle(g, D, prev_face, face, p);
    }
    t.defect = t.curvature + t.geodesic + t.turning - 2.0 * std::numbers::pi * t.euler;
    return t;
}

inline double gauss_bonnet_defect(const MetricField& g, const PolyDomain& D, int order = 24)
{
    return gauss_bonnet(g, D, order).defect;
}

} // namespace dihedral
