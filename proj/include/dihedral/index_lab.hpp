#pragma once

// Harmonic forms with tangential (absolute) boundary conditions on flat grid polygons, via a
// simplicial cochain complex, and the index experiment index = b0 - b1 + b2 = deg(f)·χ(M).
//
// Each polygon is triangulated on an n×n grid, every cell split along its anti-diagonal,
// so a right triangle's hypotenuse is made of grid edges. The complex contains every
// simplex of the closed polygon: cochains are not constrained on the boundary, which is
// the absolute condition. A relative condition would drop boundary vertices and edges.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "errors.hpp"

namespace dihedral {

using SpMat = Eigen::SparseMatrix<double>;

/// Axis-aligned square [x, x+s]×[y, y+s], or the right triangle with legs along +x and +y
/// from the origin corner.
struct GridPolygon {
    enum class Shape { square, triangle };
    Shape shape = Shape::square;
    double x = 0.0, y = 0.0, size = 1.0;

    std::vector<std::array<double, 2>> corners() const
    {
        if (shape == Shape::square) return {{x, y}, {x + size, y}, {x + size, y + size}, {x, y + size}};
        return {{x, y}, {x + size, y}, {x, y + size}};
    }
};

struct DecComplex {
    int vertices = 0, edges = 0, faces = 0;
    SpMat d0; ///< edges × vertices
    SpMat d1; ///< faces × edges
};

namespace detail {

inline void append_polygon(const GridPolygon& p, int n, std::vector<Eigen::Triplet<double>>& t0,
                           std::vector<Eigen::Triplet<double>>& t1, DecComplex& c)
{
    const bool tri = p.shape == GridPolygon::Shape::triangle;
    auto inside = [&](int i, int j) { return i >= 0 && j >= 0 && i <= n && j <= n && (!tri || i + j <= n); };
    std::map<std::pair<int, int>, int> vid;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            if (inside(i, j)) vid[{i, j}] = c.vertices++;
    // Edges oriented from the first listed endpoint to the second.
    std::map<std::pair<int, int>, int> eid;
    auto add_edge = [&](int a, int b) {
        eid[{a, b}] = c.edges;
        t0.emplace_back(c.edges, a, -1.0);
        t0.emplace_back(c.edges, b, 1.0);
        ++c.edges;
    };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            if (!inside(i, j)) continue;
            const int v = vid[{i, j}];
            if (inside(i + 1, j)) add_edge(v, vid[{i + 1, j}]);
            if (inside(i, j + 1)) add_edge(v, vid[{i, j + 1}]);
            if (inside(i + 1, j) && inside(i, j + 1)) add_edge(vid[{i + 1, j}], vid[{i, j + 1}]);
        }
    auto add_face = [&](int a, int b, int cc) { // counterclockwise a → b → c
        for (auto [u, v] : {std::pair{a, b}, std::pair{b, cc}, std::pair{cc, a}}) {
            if (auto it = eid.find({u, v}); it != eid.end()) t1.emplace_back(c.faces, it->second, 1.0);
            else t1.emplace_back(c.faces, eid.at({v, u}), -1.0);
        }
        ++c.faces;
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (inside(i + 1, j) && inside(i, j + 1))
                add_face(vid[{i, j}], vid[{i + 1, j}], vid[{i, j + 1}]);
            if (inside(i + 1, j + 1))
                add_face(vid[{i + 1, j}], vid[{i + 1, j + 1}], vid[{i, j + 1}]);
        }
}

/// dim ker L for a positive semidefinite L by Sylvester inertia: L - τI has exactly
/// dim ker L negative eigenvalues when 0 < τ is below the smallest nonzero eigenvalue, and
/// LDLᵀ (any symmetric permutation) preserves the count. The grid Laplacians here have
/// spectral gap of order (π/resolution)², far above τ for every allowed resolution.
inline int kernel_dimension(const SpMat& L, double tau = 1e-7)
{
    if (L.rows() == 0) return 0;
    SpMat shifted = L;
    for (int i = 0; i < L.rows(); ++i) shifted.coeffRef(i, i) -= tau;
    Eigen::SimplicialLDLT<SpMat> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) throw NumericalError("LDLT of the Hodge Laplacian failed");
    const Eigen::VectorXd d = ldlt.vectorD();
    int negative = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d[i]) || d[i] == 0.0) throw NumericalError("singular pivot in the Hodge Laplacian");
        if (d[i] < 0.0) ++negative;
    }
    return negative;
}

} // namespace detail

/// Cochain complex of the disjoint union of `polygons` at `resolution` cells per side.
inline DecComplex dec_complex(const std::vector<GridPolygon>& polygons, int resolution)
{
    if (resolution < 1) throw InputError("resolution must be at least 1, got " + std::to_string(resolution));
    if (polygons.empty()) throw InputError("need at least one polygon");
    DecComplex c;
    std::vector<Eigen::Triplet<double>> t0, t1;
    for (const auto& p : polygons) {
        if (!(p.size > 0.0 && std::isfinite(p.size))) throw InputError("polygon size must be positive");
        detail::append_polygon(p, resolution, t0, t1, c);
    }
    c.d0.resize(c.edges, c.vertices);
    c.d0.setFromTriplets(t0.begin(), t0.end());
    c.d1.resize(c.faces, c.edges);
    c.d1.setFromTriplets(t1.begin(), t1.end());
    return c;
}

inline DecComplex dec_complex(const GridPolygon& p, int resolution)
{
    return dec_complex(std::vector<GridPolygon>{p}, resolution);
}

struct HarmonicDims {
    int b0 = 0, b1 = 0, b2 = 0;
    int euler() const { return b0 - b1 + b2; }
    bool operator==(const HarmonicDims&) const = default;
};

/// Kernel dimensions of the Hodge Laplacians Δ_p = d*d + dd* (unit inner products on
/// cochains).
inline HarmonicDims harmonic_dims(const DecComplex& c)
{
    const SpMat d0t = c.d0.transpose(), d1t = c.d1.transpose();
    HarmonicDims h;
    h.b0 = detail::kernel_dimension(d0t * c.d0);
    h.b1 = detail::kernel_dimension(SpMat(c.d0 * d0t) + SpMat(d1t * c.d1));
    h.b2 = detail::kernel_dimension(c.d1 * d1t);
    return h;
}

/// x ↦ A x + b on one source component.
struct AffineMap {
    Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
};

struct IndexScene {
    std::vector<GridPolygon> N;
    GridPolygon M;
    std::vector<AffineMap> f; ///< one per N component
    int resolution = 8;
};

struct IndexReport {
    HarmonicDims dims;
    int index = 0, chi = 0, deg = 0;
    bool match = false;
};

namespace detail {

inline bool polygons_separated(const GridPolygon& a, const GridPolygon& b)
{
    return a.x + a.size < b.x || b.x + b.size < a.x || a.y + a.size < b.y || b.y + b.size < a.y;
}

/// +1 or -1 when f maps the corners of p bijectively onto those of m, else 0.
inline int affine_cover_sign(const AffineMap& f, const GridPolygon& p, const GridPolygon& m)
{
    const double det = f.A.determinant();
    if (!(std::abs(det) > 1e-12)) return 0;
    const auto src = p.corners(), dst = m.corners();
    if (src.size() != dst.size()) return 0;
    const double tol = 1e-9 * std::max(1.0, m.size);
    std::vector<bool> used(dst.size(), false);
    for (const auto& s : src) {
        const Eigen::Vector2d y = f.A * Eigen::Vector2d(s[0], s[1]) + f.b;
        bool hit = false;
        for (std::size_t k = 0; k < dst.size() && !hit; ++k)
            if (!used[k] && std::abs(y[0] - dst[k][0]) <= tol && std::abs(y[1] - dst[k][1]) <= tol) used[k] = hit = true;
        if (!hit) return 0;
    }
    return det > 0 ? 1 : -1;
}

} // namespace detail

/// Mapping degree: sum of orientation signs over the components, each of which must be an
/// affine bijection onto M.
inline int mapping_degree(const IndexScene& s)
{
    if (s.f.size() != s.N.size())
        throw InputError("index scene: need one affine map per N component (" + std::to_string(s.N.size()) + ")");
    int deg = 0;
    for (std::size_t i = 0; i < s.N.size(); ++i) {
        const int sign = detail::affine_cover_sign(s.f[i], s.N[i], s.M);
        if (sign == 0)
            throw InputError("index scene: f on N component " + std::to_string(i + 1)
                             + " is not an affine bijection onto M; only such maps are supported");
        deg += sign;
    }
    return deg;
}

inline IndexReport index_experiment(const IndexScene& s)
{
    for (std::size_t i = 0; i < s.N.size(); ++i)
        for (std::size_t j = i + 1; j < s.N.size(); ++j)
            if (!detail::polygons_separated(s.N[i], s.N[j]))
                throw InputError("index scene: N components " + std::to_string(i + 1) + " and " + std::to_string(j + 1)
                                 + " are not disjoint");
    IndexReport r;
    r.deg = mapping_degree(s);
    r.dims = harmonic_dims(dec_complex(s.N, s.resolution));
    r.index = r.dims.euler();
    const DecComplex m = dec_complex(s.M, s.resolution);
    r.chi = m.vertices - m.edges + m.faces;
    r.match = r.index == r.deg * r.chi;
    return r;
}

namespace detail {

inline GridPolygon parse_polygon(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_object()) throw InputError(where + ": expected an object");
    for (const auto& [key, v] : j.items())
        if (key != "shape" && key != "origin" && key != "size") throw InputError(where + ": unknown key \"" + key + "\"");
    GridPolygon p;
    if (!j.contains("shape") || !j["shape"].is_string()) throw InputError(where + ".shape: expected \"square\" or \"triangle\"");
    const auto shape = j["shape"].get<std::string>();
    if (shape == "square") p.shape = GridPolygon::Shape::square;
    else if (shape == "triangle") p.shape = GridPolygon::Shape::triangle;
    else throw InputError(where + ".shape: unsupported polygon \"" + shape + "\" (square or triangle)");
    if (j.contains("origin")) {
        const auto& o = j["origin"];
        if (!o.is_array() || o.size() != 2 || !o[0].is_number() || !o[1].is_number())
            throw InputError(where + ".origin: expected [x, y]");
        p.x = o[0].get<double>();
        p.y = o[1].get<double>();
    }
    if (j.contains("size")) {
        if (!j["size"].is_number() || !(j["size"].get<double>() > 0.0)) throw InputError(where + ".size: must be a positive number");
        p.size = j["size"].get<double>();
    }
    return p;
}

inline AffineMap parse_affine(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_object()) throw InputError(where + ": expected {\"A\": [[a, b], [c, d]], \"b\": [x, y]}");
    for (const auto& [key, v] : j.items())
        if (key != "A" && key != "b") throw InputError(where + ": unknown key \"" + key + "\"");
    AffineMap f;
    if (j.contains("A")) {
        const auto& a = j["A"];
        if (!a.is_array() || a.size() != 2) throw InputError(where + ".A: expected a 2×2 array");
        for (int r = 0; r < 2; ++r) {
            if (!a[r].is_array() || a[r].size() != 2) throw InputError(where + ".A: expected a 2×2 array");
            for (int c = 0; c < 2; ++c) {
                if (!a[r][c].is_number()) throw InputError(where + ".A: entries must be numbers");
                f.A(r, c) = a[r][c].get<double>();
            }
        }
    }
    if (j.contains("b")) {
        const auto& b = j["b"];
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) throw InputError(where + ".b: expected [x, y]");
        f.b = {b[0].get<double>(), b[1].get<double>()};
    }
    return f;
}

} // namespace detail

/// {"N": polygon or [polygons], "M": polygon, "f": affine or [affine per N component],
///  "resolution"?: int}
inline IndexScene parse_index_scene(const nlohmann::json& j)
{
    if (!j.is_object()) throw InputError("scene: expected an object");
    for (const auto& [key, v] : j.items())
        if (key != "N" && key != "M" && key != "f" && key != "resolution") throw InputError("scene: unknown key \"" + key + "\"");
    for (const char* k : {"N", "M", "f"})
        if (!j.contains(k)) throw InputError(std::string("scene: missing \"") + k + "\"");
    IndexScene s;
    if (j["N"].is_array()) {
        for (std::size_t i = 0; i < j["N"].size(); ++i)
            s.N.push_back(detail::parse_polygon(j["N"][i], "scene.N[" + std::to_string(i) + "]"));
        if (s.N.empty()) throw InputError("scene.N: needs at least one polygon");
    } else {
        s.N.push_back(detail::parse_polygon(j["N"], "scene.N"));
    }
    s.M = detail::parse_polygon(j["M"], "scene.M");
    if (j["f"].is_array()) {
        for (std::size_t i = 0; i < j["f"].size(); ++i)
            s.f.push_back(detail::parse_affine(j["f"][i], "scene.f[" + std::to_string(i) + "]"));
    } else {
        s.f.assign(s.N.size(), detail::parse_affine(j["f"], "scene.f"));
    }
    if (s.f.size() != s.N.size())
        throw InputError("scene.f: expected " + std::to_string(s.N.size()) + " maps, one per N component");
    if (j.contains("resolution")) {
        if (!j["resolution"].is_number_integer() || j["resolution"].get<int>() < 1 || j["resolution"].get<int>() > 256)
            throw InputError("scene.resolution: must be an integer in [1, 256]");
        s.resolution = j["resolution"].get<int>();
    }
    return s;
}

} // namespace dihedral
