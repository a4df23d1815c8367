#pragma once

// Polyhedral chart domains {x : <a_i, x> >= b_i} and their strata.
//
// Face indices are 0-based in the C++ API. The JSON forms ("face:i",
// "edge:i,j", scene face maps) are 1-based.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"
#include "jet.hpp"

namespace dihedral {

struct HalfSpace {
    Vec a; // unit normal, pointing into the domain
    double b = 0.0;
};

class PolyDomain {
public:
    PolyDomain() = default;

    /// Half-space normals are rescaled to unit length. With `complement` set the domain is
    /// the closure of the complement of the convex region (used for reflex corners).
    PolyDomain(int dim, std::vector<HalfSpace> hs, bool complement = false)
        : dim_(dim), hs_(std::move(hs)), complement_(complement)
    {
        if (dim < 1 || dim > kMaxDim) throw InputError("domain dimension must be in 1.." + std::to_string(kMaxDim));
        if (hs_.empty()) throw InputError("domain needs at least one half-space");
        for (std::size_t i = 0; i < hs_.size(); ++i) {
            auto& h = hs_[i];
            if (h.a.size() != dim) throw InputError("halfspaces[" + std::to_string(i) + "].a has the wrong length");
            const double len = h.a.norm();
            if (!(len > 0.0) || !std::isfinite(len))
                throw InputError("halfspaces[" + std::to_string(i) + "].a must be a nonzero finite vector");
            h.a /= len;
            h.b /= len;
        }
        analyse();
    }

    int dim() const noexcept { return dim_; }
    int face_count() const noexcept { return static_cast<int>(hs_.size()); }
    const HalfSpace& face(int i) const { return hs_.at(static_cast<std::size_t>(i)); }
    bool complement() const noexcept { return complement_; }

    /// Diameter of the finite vertex set (1 if the domain has fewer than two finite vertices).
    double diameter() const noexcept { return diameter_; }
    bool bounded() const noexcept { return bounded_; }

    /// Finite vertices of the underlying convex region.
    const std::vector<Vec>& vertices() const noexcept { return vertices_; }

    /// Pairs (i, j), i < j, whose intersection F_ij has codimension two.
    const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }

    /// Signed slack <a_i, x> - b_i.
    double slack(int i, const Vec& x) const { return face(i).a.dot(x) - face(i).b; }

    /// Membership of the closed domain, with tolerance `tol` on each constraint.
    bool contains(const Vec& x, double tol = 0.0) const
    {
        if (!complement_) return in_convex(x, tol);
        for (int i = 0; i < face_count(); ++i)
            if (slack(i, x) <= tol) return true;
        return false;
    }

    /// Membership of the underlying convex region.
    bool in_convex(const Vec& x, double tol = 0.0) const
    {
        for (int i = 0; i < face_count(); ++i)
            if (slack(i, x) < -tol) return false;
        return true;
    }

    double tolerance() const noexcept { return 1e-9 * std::max(1.0, diameter_); }

    /// Throws GeometryError unless x lies on face i (and in the closed domain).
    void require_on_face(int i, const Vec& x) const
    {
        check_index(i);
        if (x.size() != dim_) throw InputError("point has the wrong dimension");
        if (std::abs(slack(i, x)) > tolerance() || !in_convex(x, tolerance()))
            throw GeometryError("point is not on face " + std::to_string(i + 1));
    }

    void check_index(int i) const
    {
        if (i < 0 || i >= face_count())
            throw InputError("face index " + std::to_string(i + 1) + " out of range 1.." + std::to_string(face_count()));
    }

    /// Orthonormal (Euclidean) basis of the linear space tangent to the intersection of the listed faces.
    Mat tangent_basis(const std::vector<int>& faces) const
    {
        if (faces.empty()) return Mat::Identity(dim_, dim_);
        Mat A(faces.size(), dim_);
        for (std::size_t r = 0; r < faces.size(); ++r) A.row(static_cast<Eigen::Index>(r)) = face(faces[r]).a.transpose();
        Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
        const Eigen::Index rank = svd.rank();
        return svd.matrixV().rightCols(dim_ - rank);
    }

private:
    static constexpr double kBox = 1e4;

    // Vertices of the convex region intersected with a large box; box-touching ones are dropped
    // from the finite vertex set but still feed the interior check.
    void analyse()
    {
        const int m = face_count();
        std::vector<HalfSpace> all = hs_;
        for (int k = 0; k < dim_; ++k)
            for (double s : {1.0, -1.0}) {
                Vec a = Vec::Zero(dim_);
                a[k] = s;
                all.push_back({a, -kBox});
            }
        const int total = static_cast<int>(all.size());
        double combos = 1.0;
        for (int k = 0; k < dim_; ++k) combos = combos * (total - k) / (k + 1);
        if (combos > 2e6) throw InputError("domain has too many half-spaces to analyse");

        std::vector<Vec> verts;
        std::vector<bool> finite;
        std::vector<bool> supported(static_cast<std::size_t>(m), false);
        std::vector<int> idx(static_cast<std::size_t>(dim_));
        for (int k = 0; k < dim_; ++k) idx[k] = k;
        Mat A(dim_, dim_);
        Vec b(dim_);
        for (;;) {
            for (int r = 0; r < dim_; ++r) {
                A.row(r) = all[idx[r]].a.transpose();
                b[r] = all[idx[r]].b;
            }
            Eigen::FullPivLU<Mat> lu(A);
            if (lu.isInvertible()) {
                const Vec v = lu.solve(b);
                bool ok = true;
                for (const auto& h : all)
                    if (h.a.dot(v) - h.b < -1e-9 * std::max(1.0, v.norm())) {
                        ok = false;
                        break;
                    }
                if (ok) {
                    bool fin = true;
                    for (int r = 0; r < dim_; ++r) fin = fin && idx[r] < m;
                    // a vertex is finite if no box constraint is tight there
                    for (int j = m; j < total && fin; ++j)
                        if (std::abs(all[j].a.dot(v) - all[j].b) < 1e-6) fin = false;
                    verts.push_back(v);
                    finite.push_back(fin);
                }
            }
            int k = dim_ - 1;
            while (k >= 0 && idx[k] == total - dim_ + k) --k;
            if (k < 0) break;
            ++idx[k];
            for (int r = k + 1; r < dim_; ++r) idx[r] = idx[r - 1] + 1;
        }
        if (verts.empty()) throw InputError("domain is empty");

        Vec centroid = Vec::Zero(dim_);
        for (const auto& v : verts) centroid += v;
        centroid /= static_cast<double>(verts.size());
        for (int i = 0; i < m; ++i)
            if (slack(i, centroid) <= 1e-9) throw InputError("domain has empty interior");

        bounded_ = true;
        for (std::size_t k = 0; k < verts.size(); ++k) {
            if (!finite[k]) {
                bounded_ = false;
                continue;
            }
            const Vec& v = verts[k];
            if (std::none_of(vertices_.begin(), vertices_.end(), [&](const Vec& w) { return (w - v).norm() < 1e-9; }))
                vertices_.push_back(v);
        }
        for (const auto& v : verts)
            for (int i = 0; i < m; ++i)
                if (std::abs(slack(i, v)) < 1e-9 * std::max(1.0, v.norm())) supported[i] = true;
        for (int i = 0; i < m; ++i)
            if (!supported[i]) throw InputError("halfspaces[" + std::to_string(i) + "] does not touch the domain");

        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                std::vector<const Vec*> on;
                for (const auto& v : verts) {
                    const double t = 1e-9 * std::max(1.0, v.norm());
                    if (std::abs(slack(i, v)) < t && std::abs(slack(j, v)) < t) on.push_back(&v);
                }
                if (on.empty()) continue;
                Mat diff(dim_, static_cast<Eigen::Index>(on.size()));
                for (std::size_t k = 0; k < on.size(); ++k) diff.col(static_cast<Eigen::Index>(k)) = *on[k] - *on[0];
                Eigen::FullPivLU<Mat> lu(diff);
                lu.setThreshold(1e-9);
                if (lu.rank() == dim_ - 2) edges_.emplace_back(i, j);
            }

        diameter_ = 0.0;
        for (const auto& v : vertices_)
            for (const auto& w : vertices_) diameter_ = std::max(diameter_, (v - w).norm());
        if (vertices_.size() < 2) diameter_ = 1.0;
    }

    int dim_ = 0;
    std::vector<HalfSpace> hs_;
    bool complement_ = false;
    bool bounded_ = false;
    double diameter_ = 1.0;
    std::vector<Vec> vertices_;
    std::vector<std::pair<int, int>> edges_;
};

/// Parses {"dim": n, "halfspaces": [{"a": [...], "b": t}, ...], "complement": false}.
inline PolyDomain parse_domain(const nlohmann::json& j, const std::vector<std::string>& extra_keys = {})
{
    if (!j.is_object()) throw InputError("domain: expected an object");
    for (const auto& [key, v] : j.items()) {
        if (key == "dim" || key == "halfspaces" || key == "complement") continue;
        if (std::find(extra_keys.begin(), extra_keys.end(), key) == extra_keys.end())
            throw InputError("domain: unknown key \"" + key + "\"");
    }
    if (!j.contains("dim") || !j["dim"].is_number_integer()) throw InputError("domain: \"dim\" must be an integer");
    if (!j.contains("halfspaces") || !j["halfspaces"].is_array())
        throw InputError("domain: \"halfspaces\" must be an array");
    const int n = j["dim"].get<int>();
    std::vector<HalfSpace> hs;
    int k = 0;
    for (const auto& h : j["halfspaces"]) {
        const std::string where = "halfspaces[" + std::to_string(k++) + "]";
        if (!h.is_object()) throw InputError(where + ": expected an object");
        for (const auto& [key, v] : h.items())
            if (key != "a" && key != "b") throw InputError(where + ": unknown key \"" + key + "\"");
        if (!h.contains("a") || !h["a"].is_array() || !h.contains("b") || !h["b"].is_number())
            throw InputError(where + ": needs numeric \"a\" array and \"b\"");
        HalfSpace s;
        s.a.resize(static_cast<Eigen::Index>(h["a"].size()));
        for (std::size_t c = 0; c < h["a"].size(); ++c) {
            if (!h["a"][c].is_number()) throw InputError(where + ".a: entries must be numbers");
            s.a[static_cast<Eigen::Index>(c)] = h["a"][c].get<double>();
        }
        s.b = h["b"].get<double>();
        hs.push_back(s);
    }
    bool comp = false;
    if (j.contains("complement")) {
        if (!j["complement"].is_boolean()) throw InputError("domain: \"complement\" must be a boolean");
        comp = j["complement"].get<bool>();
    }
    return PolyDomain(n, std::move(hs), comp);
}

/// Where to draw sample points: the interior, face i, or edge F_ij (0-based).
struct SampleSpec {
    enum class Stratum { interior, face, edge };
    Stratum stratum = Stratum::interior;
    int i = -1, j = -1;
    int count = 1;
    std::uint64_t seed = 0;
};

/// Parses {"stratum": "interior"|"face:i"|"edge:i,j", "count": k, "seed": s} (1-based faces).
inline SampleSpec parse_sample_spec(const nlohmann::json& j)
{
    if (!j.is_object()) throw InputError("samples: expected an object");
    for (const auto& [key, v] : j.items())
        if (key != "stratum" && key != "count" && key != "seed") throw InputError("samples: unknown key \"" + key + "\"");
    SampleSpec s;
    const std::string st = j.value("stratum", std::string("interior"));
    auto to_int = [&](const std::string& t) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size() || v < 1) throw InputError("samples.stratum: bad face index in \"" + st + "\"");
        return v - 1;
    };
    if (st == "interior") {
        s.stratum = SampleSpec::Stratum::interior;
    } else if (st.rfind("face:", 0) == 0) {
        s.stratum = SampleSpec::Stratum::face;
        s.i = to_int(st.substr(5));
    } else if (st.rfind("edge:", 0) == 0) {
        s.stratum = SampleSpec::Stratum::edge;
        const auto comma = st.find(',', 5);
        if (comma == std::string::npos) throw InputError("samples.stratum: edge needs two indices");
        s.i = to_int(st.substr(5, comma - 5));
        s.j = to_int(st.substr(comma + 1));
    } else {
        throw InputError("samples.stratum: unknown stratum \"" + st + "\"");
    }
    if (j.contains("count")) {
        if (!j["count"].is_number_integer() || j["count"].get<int>() < 1)
            throw InputError("samples.count: must be a positive integer");
        s.count = j["count"].get<int>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) throw InputError("samples.seed: must be an integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    return s;
}

/// Uniform double in [0, 1) from the top 53 bits, independent of the standard library.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Deterministic sample points on the requested stratum. Points on faces and edges lie
/// in their relative interiors; interior points keep a small margin from every face.
inline std::vector<Vec> sample_domain(const PolyDomain& d, const SampleSpec& spec)
{
    const int n = d.dim();
    std::vector<int> fixed;
    if (spec.stratum != SampleSpec::Stratum::interior) {
        d.check_index(spec.i);
        fixed.push_back(spec.i);
    }
    if (spec.stratum == SampleSpec::Stratum::edge) {
        d.check_index(spec.j);
        if (spec.j == spec.i) throw InputError("edge needs two distinct faces");
        fixed.push_back(spec.j);
    }

    // Sampling box: the finite vertices padded by the diameter.
    Vec lo = Vec::Constant(n, -1.0), hi = Vec::Constant(n, 1.0);
    if (!d.vertices().empty()) {
        lo = d.vertices().front();
        hi = lo;
        for (const auto& v : d.vertices()) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        if (!d.bounded()) {
            lo.array() -= d.diameter();
            hi.array() += d.diameter();
        }
    }

    // Affine projector onto the intersection of the fixed hyperplanes.
    Mat A(fixed.size(), n);
    Vec b(fixed.size());
    for (std::size_t r = 0; r < fixed.size(); ++r) {
        A.row(static_cast<Eigen::Index>(r)) = d.face(fixed[r]).a.transpose();
        b[static_cast<Eigen::Index>(r)] = d.face(fixed[r]).b;
    }
    const Mat T = d.tangent_basis(fixed);
    if (T.cols() != n - static_cast<Eigen::Index>(fixed.size()))
        throw GeometryError("faces " + std::to_string(spec.i + 1) + " and " + std::to_string(spec.j + 1) + " are parallel");

    const double margin = 1e-6 * d.diameter();
    std::mt19937_64 rng(spec.seed);
    std::vector<Vec> out;
    long tries = 0;
    while (static_cast<int>(out.size()) < spec.count) {
        if (++tries > 2'000'000L) throw GeometryError("could not place sample points on the requested stratum");
        Vec x(n);
        for (int k = 0; k < n; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * unit_uniform(rng);
        if (!fixed.empty()) {
            const Vec p0 = A.transpose() * (A * A.transpose()).ldlt().solve(b);
            x = p0 + T * (T.transpose() * (x - p0));
        }
        bool ok = true;
        for (int i = 0; i < d.face_count() && ok; ++i) {
            if (std::find(fixed.begin(), fixed.end(), i) != fixed.end()) continue;
            const double s = d.slack(i, x);
            if (spec.stratum == SampleSpec::Stratum::interior && d.complement()) continue;
            ok = s > margin;
        }
        if (ok && spec.stratum == SampleSpec::Stratum::interior && d.complement()) {
            ok = false;
            for (int i = 0; i < d.face_count(); ++i)
                if (d.slack(i, x) < -margin) ok = true;
        }
        if (ok) out.push_back(x);
    }
    return out;
}

} // namespace dihedral
