#pragma once

// Map-dependent comparison quantities between (N, ḡ) and (M, g) along f: N → M.
//
// Jacobians are stored with rows indexing the target and columns the source:
// J is m×n for f: R^n → R^m, expressed in orthonormal frames unless noted.

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "clifford.hpp"
#include "curvature.hpp"
#include "domain.hpp"
#include "errors.hpp"
#include "expr.hpp"
#include "metric.hpp"
#include "parallel.hpp"

namespace dihedral {

struct DfNorms {
    double norm = 0.0;   ///< ‖df‖ = μ₁
    double wedge2 = 0.0; ///< ‖∧²df‖ = μ₁μ₂
    Vec singular_values; ///< μ₁ ≥ μ₂ ≥ …
};

inline DfNorms df_norms(const Mat& J)
{
    DfNorms d;
    if (J.size() == 0) return d;
    d.singular_values = Eigen::JacobiSVD<Mat>(J).singularValues();
    d.norm = d.singular_values[0];
    d.wedge2 = d.singular_values.size() >= 2 ? d.singular_values[0] * d.singular_values[1] : 0.0;
    return d;
}

/// Matrix of ∧²J in the bases {e_a ∧ e_b}_{a<b} (lexicographic).
inline Mat wedge2(const Mat& J)
{
    const auto rows = bivector_basis(static_cast<int>(J.rows()));
    const auto cols = bivector_basis(static_cast<int>(J.cols()));
    Mat W(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const auto [p, q] = rows[r];
            const auto [a, b] = cols[c];
            W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = J(p, a) * J(q, b) - J(q, a) * J(p, b);
        }
    return W;
}

namespace detail {

inline double min_eigenvalue(const CMat& H)
{
    const CMat S = 0.5 * (H + H.adjoint());
    return Eigen::SelfAdjointEigenSolver<CMat>(S, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline void require_psd(const Mat& A, const char* what)
{
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, A.cwiseAbs().maxCoeff()))
        throw InputError(std::string(what) + " is not symmetric");
    if (A.size() && Eigen::SelfAdjointEigenSolver<Mat>(A, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < -1e-10)
        throw InputError(std::string(what) + " is not positive semidefinite");
}

} // namespace detail

/// E = -½ Σ ⟨ℛ f_* w̄_j, w_i⟩ c̄(w̄_j) ⊗ c(w_i) on S̄ ⊗ S.
inline CMat curvature_endomorphism(const Mat& R, const Mat& J, const CliffordModule& Sbar, const CliffordModule& S)
{
    const int m = static_cast<int>(J.rows()), n = static_cast<int>(J.cols());
    if (Sbar.n != n || S.n != m) throw InputError("Clifford modules do not match the Jacobian");
    const auto bm = bivector_basis(m), bn = bivector_basis(n);
    if (R.rows() != static_cast<Eigen::Index>(bm.size()) || R.cols() != R.rows())
        throw InputError("curvature operator has the wrong size");
    const Mat C = R * wedge2(J); // C(i, j) = ⟨ℛ f_* w̄_j, w_i⟩
    CMat E = CMat::Zero(Sbar.fiber_dim() * S.fiber_dim(), Sbar.fiber_dim() * S.fiber_dim());
    for (std::size_t j = 0; j < bn.size(); ++j) {
        const CMat cb = Sbar.generators[bn[j].first] * Sbar.generators[bn[j].second];
        CMat right = CMat::Zero(S.fiber_dim(), S.fiber_dim());
        for (std::size_t i = 0; i < bm.size(); ++i)
            right += C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * (S.generators[bm[i].first] * S.generators[bm[i].second]);
        E += kron(cb, right);
    }
    return -0.5 * E;
}

/// Smallest eigenvalue of E + ‖∧²df‖ Sc(ℛ)/4, Sc(ℛ) = 2 tr ℛ. Nonnegative when the curvature lemma holds.
inline double curvature_certificate(const Mat& R, const Mat& J, const CliffordModule& Sbar, const CliffordModule& S)
{
    detail::require_psd(R, "curvature operator");
    const CMat E = curvature_endomorphism(R, J, Sbar, S);
    const double sc = 2.0 * R.trace();
    return detail::min_eigenvalue(E + CMat::Identity(E.rows(), E.cols()) * (df_norms(J).wedge2 * sc / 4.0));
}

/// E∂ = -½ Σ A(f_* ē_λ, e_μ) c̄∂(ē_λ) ⊗ c∂(e_μ), with ē_n, e_n the last basis vectors.
inline CMat boundary_endomorphism(const Mat& A, const Mat& Jd, const CliffordModule& Sbar, const CliffordModule& S)
{
    const int m = S.n, n = Sbar.n;
    if (Jd.rows() != m - 1 || Jd.cols() != n - 1) throw InputError("boundary Jacobian has the wrong size");
    if (A.rows() != m - 1 || A.cols() != m - 1) throw InputError("second fundamental form has the wrong size");
    const Mat C = Jd.transpose() * A; // C(λ, μ) = A(f_* ē_λ, e_μ)
    CMat E = CMat::Zero(Sbar.fiber_dim() * S.fiber_dim(), Sbar.fiber_dim() * S.fiber_dim());
    for (int l = 0; l < n - 1; ++l) {
        const CMat cb = Sbar.generators[n - 1] * Sbar.generators[l];
        CMat right = CMat::Zero(S.fiber_dim(), S.fiber_dim());
        for (int mu = 0; mu < m - 1; ++mu) right += C(l, mu) * (S.generators[m - 1] * S.generators[mu]);
        E += kron(cb, right);
    }
    return -0.5 * E;
}

/// Smallest eigenvalue of E∂ + ‖J∂‖ tr(A)/2. Nonnegative when the boundary lemma holds.
inline double boundary_certificate(const Mat& A, const Mat& Jd, const CliffordModule& Sbar, const CliffordModule& S)
{
    detail::require_psd(A, "second fundamental form");
    const CMat E = boundary_endomorphism(A, Jd, Sbar, S);
    return detail::min_eigenvalue(E + CMat::Identity(E.rows(), E.cols()) * (df_norms(Jd).norm * A.trace() / 2.0));
}

/// Random positive semidefinite curvature operator ℛ = Σ_k ω_k ω_kᵀ on Λ²R^m with decomposable
/// ω_k = u_k ∧ v_k, so ℛ also satisfies the first Bianchi identity.
inline Mat random_curvature_operator(std::mt19937_64& rng, int m)
{
    std::normal_distribution<double> N;
    const auto basis = bivector_basis(m);
    const auto d = static_cast<Eigen::Index>(basis.size());
    Mat L(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        Vec u(m), v(m);
        for (int a = 0; a < m; ++a) {
            u[a] = N(rng);
            v[a] = N(rng);
        }
        for (Eigen::Index r = 0; r < d; ++r) {
            const auto [a, b] = basis[static_cast<std::size_t>(r)];
            L(k, r) = u[a] * v[b] - u[b] * v[a];
        }
    }
    return L.transpose() * L;
}

inline Mat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> N;
    Mat J(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) J(i, j) = N(rng);
    return J;
}

struct CertificateTrials {
    std::vector<double> curvature; ///< min eigenvalue per trial
    std::vector<double> boundary;
};

/// Randomised certificate suites; trial t draws from a generator seeded with seed + t.
inline CertificateTrials certificate_trials(int n, int m, int trials, std::uint64_t seed)
{
    const auto Sbar = clifford_module(n);
    const auto S = clifford_module(m);
    CertificateTrials out{std::vector<double>(static_cast<std::size_t>(trials)), std::vector<double>(static_cast<std::size_t>(trials))};
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        std::mt19937_64 rng(seed + t);
        const Mat R = random_curvature_operator(rng, m);
        const Mat J = random_matrix(rng, m, n);
        const Mat La = random_matrix(rng, m - 1, m - 1);
        const Mat A = La.transpose() * La;
        const Mat Jd = random_matrix(rng, m - 1, n - 1);
        out.curvature[t] = curvature_certificate(R, J, Sbar, S);
        out.boundary[t] = boundary_certificate(A, Jd, Sbar, S);
    });
    return out;
}

/// Polyhedral domain with a metric: {"dim", "halfspaces", "complement"?, "g"}.
struct MetricDomain {
    PolyDomain domain;
    MetricField metric;
};

inline MetricDomain parse_metric_domain(const nlohmann::json& j, const std::string& where)
{
    try {
        MetricDomain md{parse_domain(j, {"g"}), parse_metric(nlohmann::json{{"dim", j.at("dim")}, {"g", j.at("g")}})};
        return md;
    } catch (const nlohmann::json::exception&) {
        throw InputError(where + ": needs \"dim\", \"halfspaces\" and \"g\"");
    } catch (const Error& e) {
        throw InputError(where + ": " + e.what());
    }
}

/// Comparison scene: source N, target M, map components f_a(x1..xn), face table N-face → M-face.
struct Scene {
    MetricDomain N, M;
    std::vector<Expr> f;
    std::vector<int> faces; ///< faces[i] = M face receiving N face i (0-based)
    int samples = 8;
    std::uint64_t seed = 1;
};

inline Scene parse_scene(const nlohmann::json& j)
{
    if (!j.is_object()) throw InputError("scene: expected an object");
    for (const auto& [key, v] : j.items())
        if (key != "N" && key != "M" && key != "f" && key != "faces" && key != "samples")
            throw InputError("scene: unknown key \"" + key + "\"");
    for (const char* k : {"N", "M", "f", "faces"})
        if (!j.contains(k)) throw InputError(std::string("scene: missing \"") + k + "\"");
    Scene s{parse_metric_domain(j["N"], "scene.N"), parse_metric_domain(j["M"], "scene.M"), {}, {}};
    const int n = s.N.domain.dim(), m = s.M.domain.dim();
    if (!j["f"].is_array() || static_cast<int>(j["f"].size()) != m)
        throw InputError("scene.f: expected an array of " + std::to_string(m) + " expressions");
    for (std::size_t a = 0; a < j["f"].size(); ++a) {
        const auto& e = j["f"][a];
        if (!e.is_string()) throw InputError("scene.f[" + std::to_string(a) + "]: expected a string");
        try {
            s.f.push_back(parse_expression(e.get<std::string>()));
        } catch (const ParseError& err) {
            throw InputError("scene.f[" + std::to_string(a) + "]: " + err.what());
        }
        if (s.f.back().arity() > n) throw InputError("scene.f[" + std::to_string(a) + "]: uses coordinates beyond x" + std::to_string(n));
    }
    if (!j["faces"].is_object()) throw InputError("scene.faces: expected an object");
    s.faces.assign(static_cast<std::size_t>(s.N.domain.face_count()), -1);
    for (const auto& [key, v] : j["faces"].items()) {
        int src = 0, dst = 0;
        try {
            std::size_t used = 0;
            src = std::stoi(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
            if (v.is_number_integer()) {
                dst = v.get<int>();
            } else if (v.is_string()) {
                const std::string t = v.get<std::string>();
                dst = std::stoi(t, &used);
                if (used != t.size()) throw std::invalid_argument(t);
            } else {
                throw std::invalid_argument("type");
            }
        } catch (const std::exception&) {
            throw InputError("scene.faces.\"" + key + "\": expected 1-based face indices");
        }
        if (src < 1 || src > s.N.domain.face_count()) throw InputError("scene.faces: N face " + key + " does not exist");
        if (dst < 1 || dst > s.M.domain.face_count()) throw InputError("scene.faces." + key + ": M face " + std::to_string(dst) + " does not exist");
        s.faces[static_cast<std::size_t>(src - 1)] = dst - 1;
    }
    for (std::size_t i = 0; i < s.faces.size(); ++i)
        if (s.faces[i] < 0) throw InputError("scene.faces: N face " + std::to_string(i + 1) + " has no target face");
    if (j.contains("samples")) {
        const auto& sj = j["samples"];
        if (!sj.is_object()) throw InputError("scene.samples: expected an object");
        for (const auto& [key, v] : sj.items())
            if (key != "count" && key != "seed") throw InputError("scene.samples: unknown key \"" + key + "\"");
        if (sj.contains("count")) {
            if (!sj["count"].is_number_integer() || sj["count"].get<int>() < 1) throw InputError("scene.samples.count: must be a positive integer");
            s.samples = sj["count"].get<int>();
        }
        if (sj.contains("seed")) {
            if (!sj["seed"].is_number_integer()) throw InputError("scene.samples.seed: must be an integer");
            s.seed = sj["seed"].get<std::uint64_t>();
        }
    }
    return s;
}

/// f(x) and its coordinate Jacobian (m×n).
inline std::pair<Vec, Mat> evaluate_map(const std::vector<Expr>& f, const Vec& x)
{
    const std::span<const double> xs(x.data(), x.size());
    Vec y(static_cast<Eigen::Index>(f.size()));
    Mat J(static_cast<Eigen::Index>(f.size()), x.size());
    for (std::size_t a = 0; a < f.size(); ++a) {
        const Jet j = eval_jet(f[a], xs);
        y[static_cast<Eigen::Index>(a)] = j.value();
        J.row(static_cast<Eigen::Index>(a)) = j.grad().transpose();
    }
    return {y, J};
}

/// J in orthonormal frames: ḡ at the source point, g at the image point.
inline Mat orthonormal_jacobian(const Mat& J, const Mat& gbar, const Mat& g)
{
    const Mat Lg = Eigen::LLT<Mat>(g).matrixL();
    return Lg.transpose() * J * orthonormal_frame(gbar);
}

struct Margin {
    std::string name;
    double min = std::numeric_limits<double>::infinity(); ///< smallest signed margin
    double max_abs = 0.0;                                 ///< largest |margin|
    std::string min_stratum, abs_stratum;
    Vec min_witness, abs_witness;
    std::map<std::string, double> stratum_min; ///< worst margin per stratum ("face:2", "edge:1,3", ...)
    int count = 0;

    void add(double v, const std::string& stratum, const Vec& x)
    {
        if (count++ == 0 || v < min) {
            min = v;
            min_stratum = stratum;
            min_witness = x;
        }
        if (abs_witness.size() == 0 || std::abs(v) > max_abs) {
            max_abs = std::abs(v);
            abs_stratum = stratum;
            abs_witness = x;
        }
        auto [it, fresh] = stratum_min.emplace(stratum, v);
        if (!fresh) it->second = std::min(it->second, v);
    }
};

struct SampleRecord {
    std::string quantity, stratum;
    Vec point;
    double margin = 0.0;
};

struct ComparisonReport {
    std::vector<Margin> margins; ///< scalar, mean, angle, angle_cap, curvature_operator, convexity
    std::vector<SampleRecord> records;
    double tolerance = 1e-6;
    bool verdict = false;

    const Margin& margin(const std::string& name) const
    {
        for (const auto& m : margins)
            if (m.name == name) return m;
        throw InputError("no margin named " + name);
    }
};

namespace detail {

inline std::string point_text(const Vec& x)
{
    std::string s = "(";
    for (Eigen::Index k = 0; k < x.size(); ++k) s += (k ? ", " : "") + format_double(x[k]);
    return s + ")";
}

// Corner-map nondegeneracy at x on the listed N faces: J restricted to the span of their
// ḡ-normals is injective and meets the tangent space of the matching M faces only in 0.
inline void check_corner_map(const Scene& s, const std::vector<int>& nf, const Mat& gbar, const Mat& J, const std::string& where)
{
    std::vector<int> mf;
    for (int i : nf) mf.push_back(s.faces[static_cast<std::size_t>(i)]);
    for (std::size_t a = 0; a < mf.size(); ++a)
        for (std::size_t b = a + 1; b < mf.size(); ++b)
            if (mf[a] == mf[b]) throw InputError("scene: faces of N meeting at " + where + " map into the same face of M");
    const Mat T = s.M.domain.tangent_basis(mf);
    Mat K(T.rows(), T.cols() + static_cast<Eigen::Index>(nf.size()));
    K.leftCols(T.cols()) = T;
    for (std::size_t a = 0; a < nf.size(); ++a) {
        const Vec nrm = gbar.ldlt().solve(s.N.domain.face(nf[a]).a);
        K.col(T.cols() + static_cast<Eigen::Index>(a)) = (J * nrm).normalized();
    }
    Eigen::FullPivLU<Mat> lu(K);
    lu.setThreshold(1e-8);
    if (!std::isfinite(K.sum()) || lu.rank() != K.cols())
        throw InputError("scene: f is not a corner map at " + where + " (normal directions collapse)");
}

inline void check_on_face(const Scene& s, int mface, const Vec& y, const std::string& where)
{
    const auto& M = s.M.domain;
    if (std::abs(M.slack(mface, y)) > 1e-7 * std::max(1.0, M.diameter()) || !M.in_convex(y, 1e-7 * std::max(1.0, M.diameter())))
        throw InputError("scene: f does not map " + where + " into face " + std::to_string(mface + 1) + " of M (image "
                         + point_text(y) + ")");
}

} // namespace detail

/// Evaluates every comparison margin at deterministic sample points of each stratum of N.
inline ComparisonReport compare_scene(const Scene& s, double tolerance = 1e-6)
{
    const auto& N = s.N.domain;
    const auto& M = s.M.domain;
    struct Task {
        int kind; // 0 interior, 1 face, 2 edge
        int i, j;
        Vec x;
    };
    std::vector<Task> tasks;
    std::uint64_t stream = 0;
    auto add = [&](SampleSpec spec, int kind) {
        spec.count = s.samples;
        spec.seed = s.seed + 7919 * stream++;
        for (auto& x : sample_domain(N, spec)) tasks.push_back({kind, spec.i, spec.j, std::move(x)});
    };
    add({SampleSpec::Stratum::interior, -1, -1, 1, 0}, 0);
    for (int i = 0; i < N.face_count(); ++i) add({SampleSpec::Stratum::face, i, -1, 1, 0}, 1);
    for (const auto& [i, j] : N.edges()) add({SampleSpec::Stratum::edge, i, j, 1, 0}, 2);

    struct Out {
        std::vector<std::pair<int, double>> values; // margin index → value
        std::string stratum;
    };
    std::vector<Out> results(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t t) {
        const Task& task = tasks[t];
        Out& o = results[t];
        o.stratum = task.kind == 0 ? "interior"
            : task.kind == 1       ? "face:" + std::to_string(task.i + 1)
                                   : "edge:" + std::to_string(task.i + 1) + "," + std::to_string(task.j + 1);
        const std::string where = o.stratum + " " + detail::point_text(task.x);
        const auto [y, Jc] = evaluate_map(s.f, task.x);
        if (!M.contains(y, 1e-7 * std::max(1.0, M.diameter())))
            throw InputError("scene: f maps " + where + " outside M (image " + detail::point_text(y) + ")");
        const Mat gbar = metric_at(s.N.metric, task.x);
        const Mat g = metric_at(s.M.metric, y);
        const DfNorms d = df_norms(orthonormal_jacobian(Jc, gbar, g));
        if (task.kind == 0) {
            const auto Pbar = curvature_tensors(s.N.metric, task.x);
            const auto P = curvature_tensors(s.M.metric, y);
            o.values.emplace_back(0, Pbar.scalar - d.wedge2 * P.scalar);
            const Mat op = curvature_operator(P);
            o.values.emplace_back(4, op.size() ? Eigen::SelfAdjointEigenSolver<Mat>(op).eigenvalues().minCoeff() : 0.0);
        } else if (task.kind == 1) {
            const int mf = s.faces[static_cast<std::size_t>(task.i)];
            detail::check_on_face(s, mf, y, where);
            detail::check_corner_map(s, {task.i}, gbar, Jc, where);
            const auto Fbar = face_geometry(s.N.metric, N, task.i, task.x);
            const auto F = face_geometry(s.M.metric, M, mf, y);
            o.values.emplace_back(1, Fbar.H - d.norm * F.H);
            o.values.emplace_back(5, F.A.size() ? Eigen::SelfAdjointEigenSolver<Mat>(F.A).eigenvalues().minCoeff() : 0.0);
        } else {
            const int mi = s.faces[static_cast<std::size_t>(task.i)], mj = s.faces[static_cast<std::size_t>(task.j)];
            detail::check_on_face(s, mi, y, where);
            detail::check_on_face(s, mj, y, where);
            detail::check_corner_map(s, {task.i, task.j}, gbar, Jc, where);
            const double tbar = dihedral_angle(s.N.metric, N, task.i, task.j, task.x);
            const double t = dihedral_angle(s.M.metric, M, mi, mj, y);
            o.values.emplace_back(2, t - tbar);
            o.values.emplace_back(3, std::numbers::pi - t);
        }
    });

    ComparisonReport r;
    r.tolerance = tolerance;
    for (const char* name : {"scalar", "mean", "angle", "angle_cap", "curvature_operator", "convexity"}) {
        Margin m;
        m.name = name;
        r.margins.push_back(std::move(m));
    }
    for (std::size_t t = 0; t < tasks.size(); ++t)
        for (const auto& [k, v] : results[t].values) {
            r.margins[static_cast<std::size_t>(k)].add(v, results[t].stratum, tasks[t].x);
            r.records.push_back({r.margins[static_cast<std::size_t>(k)].name, results[t].stratum, tasks[t].x, v});
        }
    return r;
}

/// Hypotheses (1)-(3) and (a)-(c): every margin ≥ -tolerance.
inline ComparisonReport check_hypotheses(const Scene& s, double tolerance = 1e-6)
{
    ComparisonReport r = compare_scene(s, tolerance);
    r.verdict = true;
    for (const auto& m : r.margins)
        if (m.count > 0 && m.min < -tolerance) r.verdict = false;
    return r;
}

/// Conclusions (i)-(iii): scalar, mean and angle margins vanish to within the tolerance.
inline ComparisonReport check_conclusions(const Scene& s, double tolerance = 1e-6)
{
    ComparisonReport r = compare_scene(s, tolerance);
    r.verdict = true;
    for (const auto& m : r.margins)
        if ((m.name == "scalar" || m.name == "mean" || m.name == "angle") && m.max_abs > tolerance) r.verdict = false;
    return r;
}

struct ConformalResidual {
    double lhs = 0.0, rhs = 0.0;
    double residual() const { return lhs - rhs; }
};

namespace detail {

// Δh = ḡ^ij (∂_i∂_j h - Γ^k_ij ∂_k h) (trace of the Hessian) and |dh|² at x.
inline std::pair<double, double> laplacian_and_gradient(const MetricField& gbar, const Expr& h, const Vec& x)
{
    const auto P = curvature_tensors(gbar, x);
    const Jet j = eval_jet(h, std::span<const double>(x.data(), x.size()));
    const Mat ginv = P.g.inverse();
    const int n = gbar.dim();
    double lap = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double v = j.hess()(a, b);
            for (int k = 0; k < n; ++k) v -= P.christoffel[k](a, b) * j.grad()[k];
            lap += ginv(a, b) * v;
        }
    const Vec grad = j.grad();
    return {lap, grad.dot(ginv * grad)};
}

inline double positive_h(const Expr& h, const Vec& x)
{
    const double v = h.evaluate<double>(std::span<const double>(x.data(), x.size()));
    if (!(v > 0.0)) throw DomainError("conformal factor h must be positive, got " + format_double(v));
    return v;
}

} // namespace detail

/// Sc(h²ḡ) against Sc̄/h² - 2(n-1)/h³ Δh - (n-1)(n-4)/h⁴ |dh|² with Δ the trace of the Hessian.
inline ConformalResidual conformal_scalar_identity(const MetricField& gbar, const Expr& h, const Vec& x)
{
    const double hv = detail::positive_h(h, x);
    const int n = gbar.dim();
    ConformalResidual r;
    r.lhs = curvature_tensors(gbar.scaled(h * h), x).scalar;
    const auto [lap, grad2] = detail::laplacian_and_gradient(gbar, h, x);
    r.rhs = curvature_tensors(gbar, x).scalar / (hv * hv) - 2.0 * (n - 1) * lap / (hv * hv * hv)
        - (n - 1.0) * (n - 4.0) * grad2 / (hv * hv * hv * hv);
    return r;
}

/// H(h²ḡ) against H̄/h - (n-1)/h² ∂h/∂ē_n on face i of D (ē_n the inner ḡ-unit normal).
inline ConformalResidual conformal_mean_identity(const MetricField& gbar, const Expr& h, const PolyDomain& D, int i, const Vec& x)
{
    const double hv = detail::positive_h(h, x);
    const int n = gbar.dim();
    ConformalResidual r;
    r.lhs = face_geometry(gbar.scaled(h * h), D, i, x).H;
    const auto Fbar = face_geometry(gbar, D, i, x);
    const Jet j = eval_jet(h, std::span<const double>(x.data(), x.size()));
    const double dn = Vec(j.grad()).dot(Fbar.normal);
    r.rhs = Fbar.H / hv - (n - 1.0) * dn / (hv * hv);
    return r;
}

} // namespace dihedral
