#pragma once

// Command-line front end. Every subcommand prints a JSON report (smooth prints CSV) and
// returns 0 when its check passes, 1 when it fails and 2 on bad input.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "comparison.hpp"
#include "corner_smoothing.hpp"
#include "curvature.hpp"
#include "index_lab.hpp"
#include "json_io.hpp"
#include "sector_spectra.hpp"

namespace dihedral {

enum ExitCode : int { kPass = 0, kFail = 1, kInputError = 2 };

namespace cli {

struct Globals {
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::string csv, out;
};

struct Outcome {
    Report report;
    bool pass = true;
    std::string csv;      ///< written to --csv when set
    std::string text;     ///< replaces the JSON report on stdout when nonempty
};

inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline Report margin_json(const Margin& m)
{
    Report j;
    j["name"] = m.name;
    j["count"] = m.count;
    j["min"] = m.count ? Report(m.min) : Report(nullptr);
    j["max_abs"] = m.max_abs;
    if (m.count) {
        j["min_stratum"] = m.min_stratum;
        j["min_witness"] = to_json(m.min_witness);
        j["abs_stratum"] = m.abs_stratum;
        j["abs_witness"] = to_json(m.abs_witness);
    }
    Report per = Report::object();
    for (const auto& [k, v] : m.stratum_min) per[k] = v;
    j["stratum_min"] = per;
    return j;
}

inline Outcome cmd_curvature(const std::string& scene, const std::vector<double>& at)
{
    const auto g = parse_metric(read_json_file(scene), {"halfspaces", "complement"});
    if (static_cast<int>(at.size()) != g.dim())
        throw InputError("--at needs " + std::to_string(g.dim()) + " coordinates, got " + std::to_string(at.size()));
    const Vec x = to_vec(at);
    const auto p = curvature_tensors(g, x);
    const int n = g.dim();
    Outcome o;
    auto& r = o.report;
    r["command"] = "curvature";
    r["point"] = to_json(x);
    r["metric"] = to_json(p.g);
    Report gamma = Report::array();
    for (int k = 0; k < n; ++k) gamma.push_back(to_json(p.christoffel[static_cast<std::size_t>(k)]));
    r["christoffel"] = gamma; // christoffel[k][i][j] = Γ^k_ij
    Report riem = Report::array();
    for (int i = 0; i < n; ++i) {
        Report a = Report::array();
        for (int j = 0; j < n; ++j) {
            Report b = Report::array();
            for (int k = 0; k < n; ++k) {
                Report c = Report::array();
                for (int l = 0; l < n; ++l) c.push_back(p.riemann(i, j, k, l));
                b.push_back(c);
            }
            a.push_back(b);
        }
        riem.push_back(a);
    }
    r["riemann"] = riem;
    r["ricci"] = to_json(p.ricci);
    r["scalar"] = p.scalar;
    if (n >= 2) {
        const Mat op = curvature_operator(p);
        r["curvature_operator"] = to_json(op);
        r["curvature_operator_min_eigenvalue"] = Eigen::SelfAdjointEigenSolver<Mat>(op).eigenvalues().minCoeff();
    }
    r["symmetry_residual"] = riemann_symmetry_residual(p.riemann);
    return o;
}

inline Outcome cmd_angles(const std::string& scene, int count, std::uint64_t seed)
{
    const auto md = parse_metric_domain(read_json_file(scene), scene);
    const auto& D = md.domain;
    Outcome o;
    auto& r = o.report;
    r["command"] = "angles";
    Report faces = Report::array();
    CsvWriter csv({"kind", "faces", "x", "value"});
    auto point_text = [](const Vec& x) {
        std::string s;
        for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? " " : "") + format_number17(x[i]);
        return s;
    };
    for (int i = 0; i < D.face_count(); ++i) {
        SampleSpec spec{SampleSpec::Stratum::face, i, -1, count, seed};
        for (const auto& x : sample_domain(D, spec)) {
            const auto fg = face_geometry(md.metric, D, i, x);
            Report e;
            e["face"] = i + 1;
            e["point"] = to_json(x);
            e["mean_curvature"] = fg.H;
            faces.push_back(e);
            csv.row("mean_curvature", std::to_string(i + 1), point_text(x), fg.H);
        }
    }
    Report edges = Report::array();
    for (const auto& [i, j] : D.edges()) {
        SampleSpec spec{SampleSpec::Stratum::edge, i, j, count, seed};
        for (const auto& x : sample_domain(D, spec)) {
            const double a = dihedral_angle(md.metric, D, i, j, x);
            Report e;
            e["faces"] = {i + 1, j + 1};
            e["point"] = to_json(x);
            e["angle"] = a;
            edges.push_back(e);
            csv.row("angle", std::to_string(i + 1) + " " + std::to_string(j + 1), point_text(x), a);
        }
    }
    r["faces"] = faces;
    r["edges"] = edges;
    o.csv = csv.str();
    return o;
}

inline Outcome cmd_gaussbonnet(const std::string& scene, int order, double tol)
{
    const auto md = parse_metric_domain(read_json_file(scene), scene);
    const auto t = gauss_bonnet(md.metric, md.domain, order);
    Outcome o;
    auto& r = o.report;
    r["command"] = "gaussbonnet";
    r["curvature_integral"] = t.curvature;
    r["geodesic_integral"] = t.geodesic;
    r["turning"] = t.turning;
    r["euler"] = t.euler;
    r["defect"] = t.defect;
    r["tolerance"] = tol;
    o.pass = std::abs(t.defect) <= tol;
    r["pass"] = o.pass;
    return o;
}

inline Outcome cmd_compare(const std::string& scene, double tol, const std::string& check, std::optional<std::uint64_t> seed)
{
    Scene s = parse_scene(read_json_file(scene));
    if (seed) s.seed = *seed;
    const auto rep = compare_scene(s, tol);
    bool hyp = true, concl = true;
    for (const auto& m : rep.margins) {
        if (m.count > 0 && m.min < -tol) hyp = false;
        if ((m.name == "scalar" || m.name == "mean" || m.name == "angle") && m.max_abs > tol) concl = false;
    }
    Outcome o;
    auto& r = o.report;
    r["command"] = "compare";
    r["tolerance"] = tol;
    r["samples"] = s.samples;
    r["seed"] = s.seed;
    Report ms = Report::array();
    for (const auto& m : rep.margins) ms.push_back(margin_json(m));
    r["margins"] = ms;
    r["hypotheses"] = hyp;
    r["conclusions"] = concl;
    r["check"] = check;
    o.pass = check == "hypotheses" ? hyp : check == "conclusions" ? concl : hyp && concl;
    r["pass"] = o.pass;
    CsvWriter csv({"quantity", "stratum", "point", "margin"});
    for (const auto& rec : rep.records) {
        std::string p;
        for (Eigen::Index i = 0; i < rec.point.size(); ++i) p += (i ? " " : "") + format_number17(rec.point[i]);
        csv.row(rec.quantity, rec.stratum, p, rec.margin);
    }
    o.csv = csv.str();
    return o;
}

inline Outcome cmd_certify(int n, int m, int trials, std::uint64_t seed, double tol)
{
    if (n < 2 || m < 2 || n > 8 || m > 8 || n % 2 || m % 2)
        throw InputError("certify needs even dimensions n, m in 2..8");
    if (trials < 1) throw InputError("certify needs at least one trial");
    const auto t = certificate_trials(n, m, trials, seed);
    const double cmin = *std::min_element(t.curvature.begin(), t.curvature.end());
    const double bmin = *std::min_element(t.boundary.begin(), t.boundary.end());
    Outcome o;
    auto& r = o.report;
    r["command"] = "certify";
    r["n"] = n;
    r["m"] = m;
    r["trials"] = trials;
    r["seed"] = seed;
    r["tolerance"] = tol;
    r["curvature_min_eigenvalue"] = cmin;
    r["boundary_min_eigenvalue"] = bmin;
    o.pass = cmin >= -tol && bmin >= -tol;
    r["pass"] = o.pass;
    CsvWriter csv({"trial", "curvature_min", "boundary_min"});
    for (std::size_t i = 0; i < t.curvature.size(); ++i) csv.row(i, t.curvature[i], t.boundary[i]);
    o.csv = csv.str();
    return o;
}

inline Outcome cmd_spectrum(bool mixed, double alpha, double beta, int numeric, int count, double tol)
{
    if (count < 1 || count > 64) throw InputError("--count must lie in 1..64");
    const auto n = static_cast<std::size_t>(count);
    Outcome o;
    auto& r = o.report;
    r["command"] = mixed ? "spectrum mixed" : "spectrum sector";
    r["alpha"] = alpha;
    SpectrumReport closed;
    EsaVerdict v;
    std::vector<double> nearest;
    if (mixed) {
        v = esa_verdict_mixed(alpha);
        closed = p_spectrum_mixed_closed(alpha, -count - 2, count + 2);
        nearest = detail::nearest_to_zero(closed.eigenvalues, n);
    } else {
        const SectorPair s{alpha, beta};
        v = esa_verdict(s);
        r["beta"] = beta;
        closed = p_spectrum_closed(s);
        nearest = p_spectrum_closed_nearest(s, n);
    }
    r["eigenvalues"] = to_json(nearest);
    r["min_abs"] = closed.min_abs;
    r["esa"] = v.esa;
    r["reason"] = v.reason;
    o.pass = closed.esa == v.esa;
    CsvWriter csv({"k", "closed", "numeric"});
    if (numeric > 0) {
        const auto num = mixed ? p_spectrum_mixed_numeric(alpha, numeric, n) : p_spectrum_numeric({alpha, beta}, numeric, n);
        double err = 0.0;
        for (double e : nearest) {
            double best = std::numeric_limits<double>::infinity();
            for (double x : num.eigenvalues) best = std::min(best, std::abs(x - e));
            err = std::max(err, best);
        }
        Report nj;
        nj["N"] = numeric;
        nj["eigenvalues"] = to_json(num.eigenvalues);
        nj["min_abs"] = num.min_abs;
        nj["esa"] = num.esa;
        nj["max_error"] = err;
        nj["tolerance"] = tol;
        r["numeric"] = nj;
        o.pass = o.pass && err <= tol;
        for (std::size_t k = 0; k < nearest.size(); ++k)
            csv.row(k, nearest[k], k < num.eigenvalues.size() ? num.eigenvalues[k] : std::nan(""));
    } else {
        for (std::size_t k = 0; k < nearest.size(); ++k) csv.row(k, nearest[k], std::nan(""));
    }
    r["pass"] = o.pass;
    o.csv = csv.str();
    return o;
}

inline Outcome cmd_deficiency(double lambda, const std::vector<double>& exponents)
{
    const auto d = exponents.empty() ? deficiency_test(lambda) : deficiency_test(lambda, exponents);
    const bool expected = std::abs(lambda) < 0.5;
    Outcome o;
    auto& r = o.report;
    r["command"] = "deficiency";
    r["lambda"] = lambda;
    r["l2"] = d.l2;
    r["expected_l2"] = expected;
    r["eps"] = to_json(d.eps);
    r["integral"] = to_json(d.integral);
    r["tail"] = to_json(d.tail);
    o.pass = d.l2 == expected;
    r["pass"] = o.pass;
    CsvWriter csv({"eps", "integral", "tail"});
    for (std::size_t i = 0; i < d.eps.size(); ++i) csv.row(d.eps[i], d.integral[i], d.tail[i]);
    o.csv = csv.str();
    return o;
}

inline Outcome cmd_hardy(double lambda, double delta, int cells, double tol)
{
    const auto h = hardy_norm(lambda, delta, cells);
    Outcome o;
    auto& r = o.report;
    r["command"] = "hardy";
    r["lambda"] = lambda;
    r["delta"] = delta;
    r["cells"] = cells;
    r["numeric"] = h.numeric;
    r["bound"] = h.bound;
    r["tolerance"] = tol;
    o.pass = h.numeric <= (1.0 + tol) * h.bound;
    r["pass"] = o.pass;
    return o;
}

inline Outcome cmd_smooth(double angle, const std::vector<double>& radii, const std::string& phi_text, double tol, bool json)
{
    const Expr phi = parse_expression(phi_text);
    const auto lim = mean_curvature_limit(angle, phi, radii);
    const double jump = std::numbers::pi - angle;
    Outcome o;
    CsvWriter csv({"r", "integral", "error"});
    Report terms = Report::array();
    for (const auto& t : lim.terms) {
        const double turning = turning_integral(smoothing_arc(angle, t.radius));
        o.pass = o.pass && std::abs(turning - jump) <= tol;
        csv.row(t.radius, t.integral, t.error);
        Report e;
        e["r"] = t.radius;
        e["integral"] = t.integral;
        e["error"] = t.error;
        e["turning"] = turning;
        terms.push_back(e);
    }
    auto& r = o.report;
    r["command"] = "smooth";
    r["angle"] = angle;
    r["phi"] = phi.to_string();
    r["limit"] = lim.limit;
    r["terms"] = terms;
    r["tolerance"] = tol;
    r["pass"] = o.pass;
    if (!json) o.text = csv.str();
    o.csv = csv.str();
    return o;
}

inline Outcome cmd_index(const std::string& scene, std::optional<int> resolution)
{
    auto s = parse_index_scene(read_json_file(scene));
    if (resolution) {
        if (*resolution < 1 || *resolution > 256) throw InputError("--resolution must lie in 1..256");
        s.resolution = *resolution;
    }
    const auto rep = index_experiment(s);
    Outcome o;
    auto& r = o.report;
    r["command"] = "index";
    r["resolution"] = s.resolution;
    r["b0"] = rep.dims.b0;
    r["b1"] = rep.dims.b1;
    r["b2"] = rep.dims.b2;
    r["index"] = rep.index;
    r["chi"] = rep.chi;
    r["deg"] = rep.deg;
    r["match"] = rep.match;
    o.pass = rep.match;
    return o;
}

} // namespace cli

/// Runs the tool on `args` (without the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Numerical experiments for dihedral rigidity of manifolds with corners", "dihedral_lab"};
    app.require_subcommand(1);
    app.fallthrough();
    cli::Globals g;
    app.add_option("--tol", g.tol, "tolerance override for the subcommand's check");
    app.add_option("--seed", g.seed, "random seed (compare, certify, angles)");
    app.add_option("--csv", g.csv, "also write plot-ready CSV to this file");
    app.add_option("--out", g.out, "write the report to this file instead of stdout");

    std::string scene;
    std::vector<double> at;
    auto* curv = app.add_subcommand("curvature", "Christoffel symbols, curvature tensors and curvature operator at a point");
    curv->add_option("--scene", scene, "metric JSON")->required();
    curv->add_option("--at", at, "chart point x1,x2,...")->required()->delimiter(',');

    int count = 1;
    auto* ang = app.add_subcommand("angles", "dihedral angles on every edge and mean curvature on every face");
    ang->add_option("--scene", scene, "domain + metric JSON")->required();
    ang->add_option("--count", count, "sample points per face and per edge")->check(CLI::Range(1, 1000));

    int order = 24;
    auto* gb = app.add_subcommand("gaussbonnet", "Gauss-Bonnet defect of a 2-D convex polygon");
    gb->add_option("--scene", scene, "domain + metric JSON")->required();
    gb->add_option("--order", order, "Gauss points per direction")->check(CLI::Range(1, 200));

    std::string check = "both";
    auto* cmp = app.add_subcommand("compare", "sample comparison margins of a map between polyhedral domains");
    cmp->add_option("--scene", scene, "comparison scene JSON")->required();
    cmp->add_option("--check", check, "which verdict sets the exit code")->check(CLI::IsMember({"both", "hypotheses", "conclusions"}));

    int n = 2, m = 0, trials = 1000;
    auto* cert = app.add_subcommand("certify", "randomised curvature and boundary certificates");
    cert->add_option("--n", n, "source dimension")->required();
    cert->add_option("--m", m, "target dimension (default n)");
    cert->add_option("--trials", trials, "number of random trials");

    double alpha = 0.0, beta = 0.0;
    int numeric = 0, spec_count = 5;
    auto* spec = app.add_subcommand("spectrum", "cone-link spectra");
    spec->require_subcommand(1);
    auto* sector = spec->add_subcommand("sector", "sector with boundary angles alpha, beta");
    sector->add_option("--alpha", alpha)->required();
    sector->add_option("--beta", beta)->required();
    sector->add_option("--numeric", numeric, "also solve the discretised problem with N cells");
    sector->add_option("--count", spec_count, "eigenvalues nearest 0 to report");
    auto* mixed = spec->add_subcommand("mixed", "mixed B / complement boundary condition");
    mixed->add_option("--alpha", alpha)->required();
    mixed->add_option("--numeric", numeric, "also solve the discretised problem with N cells");
    mixed->add_option("--count", spec_count, "eigenvalues nearest 0 to report");

    double lambda = 0.0;
    std::vector<double> exponents;
    auto* def = app.add_subcommand("deficiency", "square-integrability of the Bessel solutions near the tip");
    def->add_option("--lambda", lambda)->required();
    def->add_option("--exponents", exponents, "eps_k = 10^-e_k, comma separated")->delimiter(',');

    double delta = 1.0;
    int cells = 600;
    auto* hardy = app.add_subcommand("hardy", "norm of the weighted Hardy operator");
    hardy->add_option("--lambda", lambda)->required();
    hardy->add_option("--delta", delta, "interval length");
    hardy->add_option("--cells", cells, "geometric cells in the discretisation")->check(CLI::Range(10, 5000));

    double angle = 0.0;
    std::vector<double> radii;
    std::string phi = "1";
    bool as_json = false;
    auto* smooth = app.add_subcommand("smooth", "fillet a planar corner and integrate its curvature");
    smooth->add_option("--angle", angle, "interior angle of the corner")->required();
    smooth->add_option("--radii", radii, "fillet radii, comma separated")->required()->delimiter(',');
    smooth->add_option("--phi", phi, "test function of x1, x2");
    smooth->add_flag("--json", as_json, "print a JSON report instead of CSV");

    std::optional<int> resolution;
    auto* idx = app.add_subcommand("index", "harmonic forms and index on flat polygons");
    idx->add_option("--scene", scene, "index scene JSON")->required();
    idx->add_option("--resolution", resolution, "grid cells per side");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kPass : kInputError;
    }

    try {
        cli::Outcome o;
        if (*curv) o = cli::cmd_curvature(scene, at);
        else if (*ang) o = cli::cmd_angles(scene, count, g.seed.value_or(1));
        else if (*gb) o = cli::cmd_gaussbonnet(scene, order, g.tol.value_or(1e-3));
        else if (*cmp) o = cli::cmd_compare(scene, g.tol.value_or(1e-6), check, g.seed);
        else if (*cert) o = cli::cmd_certify(n, m ? m : n, trials, g.seed.value_or(1), g.tol.value_or(1e-9));
        else if (*sector) o = cli::cmd_spectrum(false, alpha, beta, numeric, spec_count, g.tol.value_or(1e-3));
        else if (*mixed) o = cli::cmd_spectrum(true, alpha, 0.0, numeric, spec_count, g.tol.value_or(1e-3));
        else if (*def) o = cli::cmd_deficiency(lambda, exponents);
        else if (*hardy) o = cli::cmd_hardy(lambda, delta, cells, g.tol.value_or(0.01));
        else if (*smooth) o = cli::cmd_smooth(angle, radii, phi, g.tol.value_or(1e-8), as_json);
        else o = cli::cmd_index(scene, resolution);

        const std::string text = o.text.empty() ? report_string(o.report) : o.text;
        if (!g.csv.empty()) {
            if (o.csv.empty()) throw InputError("this subcommand has no CSV output");
            write_file(g.csv, o.csv);
        }
        if (g.out.empty()) out << text;
        else write_file(g.out, text);
        return o.pass ? kPass : kFail;
    } catch (const ParseError& e) {
        err << "dihedral_lab: error: " << e.what() << "\n";
    } catch (const NumericalError& e) {
        err << "dihedral_lab: numerical failure: " << e.what() << "\n";
    } catch (const Error& e) {
        err << "dihedral_lab: error: " << e.what() << "\n";
    }
    return kInputError;
}

} // namespace dihedral
