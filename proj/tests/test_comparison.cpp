#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <dihedral/comparison.hpp>

using namespace dihedral;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

json cube_json(double r, const std::string& conformal = "")
{
    json hs = json::array();
    for (int k = 0; k < 3; ++k)
        for (double s : {1.0, -1.0}) {
            json a = {0.0, 0.0, 0.0};
            a[k] = s;
            hs.push_back({{"a", a}, {"b", -r}});
        }
    json g = json::object();
    for (const char* d : {"11", "22", "33"}) g[d] = conformal.empty() ? "1" : conformal;
    return {{"dim", 3}, {"halfspaces", hs}, {"g", g}};
}

json identity_faces(int count)
{
    json f = json::object();
    for (int i = 1; i <= count; ++i) f[std::to_string(i)] = std::to_string(i);
    return f;
}

json cube_scene(const std::string& gbar = "", double a = 1.0)
{
    const std::string s = format_double(a);
    return {{"N", cube_json(1.0, gbar)},
            {"M", cube_json(a)},
            {"f", {s + "*x1", s + "*x2", s + "*x3"}},
            {"faces", identity_faces(6)},
            {"samples", {{"count", 4}, {"seed", 11}}}};
}

// N: triangle with corner angle 2π/3 at the origin, M: right isosceles triangle.
json wedge_scene()
{
    const double r3 = std::sqrt(3.0);
    json N = {{"dim", 2},
              {"halfspaces", {{{"a", {0, 1}}, {"b", 0}}, {{"a", {r3 / 2, 0.5}}, {"b", 0}}, {{"a", {-0.5, -r3 / 2}}, {"b", -0.5}}}},
              {"g", {{"11", "1"}, {"22", "1"}}}};
    json M = {{"dim", 2},
              {"halfspaces", {{{"a", {0, 1}}, {"b", 0}}, {{"a", {1, 0}}, {"b", 0}}, {{"a", {-1, -1}}, {"b", -1}}}},
              {"g", {{"11", "1"}, {"22", "1"}}}};
    return {{"N", N},
            {"M", M},
            {"f", {"x1 + " + format_double(1 / r3) + "*x2", format_double(2 / r3) + "*x2"}},
            {"faces", {{"1", 1}, {"2", 2}, {"3", 3}}},
            {"samples", {{"count", 3}}}};
}

// Independent 3×3 second-compound matrix (all 2×2 minors).
Mat minors3(const Mat& J)
{
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    Mat W(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            Eigen::Matrix2d sub;
            sub << J(pairs[r][0], pairs[c][0]), J(pairs[r][0], pairs[c][1]), J(pairs[r][1], pairs[c][0]), J(pairs[r][1], pairs[c][1]);
            W(r, c) = sub.determinant();
        }
    return W;
}

} // namespace

TEST(DfNorms, Homothety)
{
    const auto d = df_norms(2.5 * Mat::Identity(4, 4));
    EXPECT_DOUBLE_EQ(d.norm, 2.5);
    EXPECT_DOUBLE_EQ(d.wedge2, 6.25);
    for (Eigen::Index k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(d.singular_values[k], 2.5);
}

TEST(DfNorms, Diagonal)
{
    Mat J = Mat::Zero(2, 2);
    J.diagonal() << 2.0, 0.5;
    const auto d = df_norms(J);
    EXPECT_DOUBLE_EQ(d.norm, 2.0);
    EXPECT_DOUBLE_EQ(d.wedge2, 1.0);
    EXPECT_DOUBLE_EQ(d.singular_values[1], 0.5);
    EXPECT_DOUBLE_EQ(df_norms(Mat::Ones(1, 3)).wedge2, 0.0);
}

TEST(DfNorms, MinorsOracleAndNormInequality)
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const Mat J = random_matrix(rng, 3, 3);
        const auto d = df_norms(J);
        const double oracle = Eigen::JacobiSVD<Mat>(minors3(J)).singularValues()[0];
        EXPECT_NEAR(d.wedge2, oracle, 1e-12 * std::max(1.0, oracle));
        EXPECT_LE(d.wedge2, d.norm * d.norm * (1 + 1e-14));
        EXPECT_NEAR((wedge2(J) - minors3(J)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    }
}

TEST(Certificates, FlatCurvatureGivesZero)
{
    const auto S = clifford_module(4);
    std::mt19937_64 rng(3);
    const Mat J = random_matrix(rng, 4, 4);
    EXPECT_NEAR(curvature_endomorphism(Mat::Zero(6, 6), J, S, S).cwiseAbs().maxCoeff(), 0.0, 0.0);
    EXPECT_NEAR(curvature_certificate(Mat::Zero(6, 6), J, S, S), 0.0, 1e-15);
    EXPECT_NEAR(boundary_certificate(Mat::Zero(3, 3), J.topLeftCorner(3, 3), S, S), 0.0, 1e-15);
}

TEST(Certificates, TwoDimensionalClosedForm)
{
    // c1 c2 = (iσ1)(iσ2) = -iσ3, so E = -½(-iσ3)⊗(-iσ3) = ½ σ3⊗σ3 with spectrum ±½.
    const auto S = clifford_module(2);
    CMat s3 = CMat::Zero(2, 2);
    s3(0, 0) = 1;
    s3(1, 1) = -1;
    const CMat expected = 0.5 * kron(s3, s3);
    EXPECT_NEAR((curvature_endomorphism(Mat::Identity(1, 1), Mat::Identity(2, 2), S, S) - expected).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(curvature_certificate(Mat::Identity(1, 1), Mat::Identity(2, 2), S, S), 0.0, 1e-12);
    // c2 c1 = iσ3, so E∂ = -½ (iσ3)⊗(iσ3) = ½ σ3⊗σ3 as well.
    EXPECT_NEAR((boundary_endomorphism(Mat::Identity(1, 1), Mat::Identity(1, 1), S, S) - expected).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(boundary_certificate(Mat::Identity(1, 1), Mat::Identity(1, 1), S, S), 0.0, 1e-12);
}

TEST(Certificates, UnitSphereBoundaryIsSharp)
{
    for (int m : {2, 4, 6}) {
        const auto S = clifford_module(m);
        const double v = boundary_certificate(Mat::Identity(m - 1, m - 1), Mat::Identity(m - 1, m - 1), S, S);
        EXPECT_GE(v, -1e-10) << m;
        EXPECT_NEAR(v, 0.0, 1e-10) << m;
    }
}

TEST(Certificates, RandomisedSuites)
{
    for (int m : {2, 4}) {
        const auto r = certificate_trials(m, m, 300, 1000 + static_cast<std::uint64_t>(m));
        for (std::size_t t = 0; t < r.curvature.size(); ++t) {
            ASSERT_GE(r.curvature[t], -1e-9) << "m=" << m << " trial " << t;
            ASSERT_GE(r.boundary[t], -1e-9) << "m=" << m << " trial " << t;
        }
    }
}

TEST(Certificates, MixedDimensions)
{
    const auto r = certificate_trials(2, 4, 100, 77);
    for (double v : r.curvature) EXPECT_GE(v, -1e-9);
    for (double v : r.boundary) EXPECT_GE(v, -1e-9);
}

TEST(Certificates, GeneratedOperatorsAreCurvatureOperators)
{
    std::mt19937_64 rng(9);
    const auto basis = bivector_basis(4);
    for (int t = 0; t < 20; ++t) {
        const Mat R = random_curvature_operator(rng, 4);
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat>(R).eigenvalues().minCoeff(), -1e-10);
        // R_{0123} + R_{0231} + R_{0312} with R_abcd = -⟨ℛ e_a∧e_b, e_c∧e_d⟩.
        auto at = [&](int a, int b) {
            for (std::size_t k = 0; k < basis.size(); ++k)
                if (basis[k] == std::pair{a, b}) return static_cast<Eigen::Index>(k);
            return Eigen::Index{-1};
        };
        const double bianchi = R(at(0, 1), at(2, 3)) - R(at(0, 2), at(1, 3)) + R(at(0, 3), at(1, 2));
        EXPECT_NEAR(bianchi, 0.0, 1e-10 * R.norm());
    }
}

TEST(Certificates, PsdFormsViolatingBianchiCanBreakTheBound)
{
    // ℛ = ωωᵀ with ω = e1∧e2 + e3∧e4 (ω∧ω ≠ 0) is PSD but not a curvature operator.
    const auto S = clifford_module(4);
    Vec w = Vec::Zero(6);
    w[0] = 1.0;
    w[5] = 1.0;
    EXPECT_NEAR(curvature_certificate(w * w.transpose(), Mat::Identity(4, 4), S, S), -1.0, 1e-12);
}

TEST(Certificates, Errors)
{
    const auto S2 = clifford_module(2), S4 = clifford_module(4);
    EXPECT_THROW(curvature_certificate(-Mat::Identity(1, 1), Mat::Identity(2, 2), S2, S2), InputError);
    EXPECT_THROW(curvature_certificate(Mat::Identity(6, 6), Mat::Identity(2, 2), S2, S2), InputError);
    EXPECT_THROW(curvature_certificate(Mat::Identity(1, 1), Mat::Identity(2, 2), S4, S2), InputError);
    Mat asym = Mat::Identity(3, 3);
    asym(0, 1) = 0.5;
    EXPECT_THROW(boundary_certificate(asym, Mat::Identity(3, 3), S4, S4), InputError);
    EXPECT_THROW(boundary_certificate(-Mat::Identity(3, 3), Mat::Identity(3, 3), S4, S4), InputError);
    EXPECT_THROW(boundary_certificate(Mat::Identity(3, 3), Mat::Identity(2, 2), S4, S4), InputError);
}

TEST(Scene, CubeIdentityIsExtremal)
{
    const Scene s = parse_scene(cube_scene());
    const auto h = check_hypotheses(s);
    EXPECT_TRUE(h.verdict);
    for (const char* name : {"scalar", "mean", "angle"}) {
        EXPECT_GT(h.margin(name).count, 0) << name;
        EXPECT_NEAR(h.margin(name).max_abs, 0.0, 1e-10) << name;
    }
    EXPECT_NEAR(h.margin("angle_cap").min, pi / 2, 1e-10);
    EXPECT_EQ(h.margin("angle").stratum_min.size(), 12u);
    EXPECT_EQ(h.margin("mean").stratum_min.size(), 6u);
    EXPECT_TRUE(check_conclusions(s).verdict);
}

TEST(Scene, WitnessesLieInTheirStrata)
{
    const Scene s = parse_scene(cube_scene("1 + 0.2*sin(x1)"));
    const auto r = check_hypotheses(s);
    const auto& D = s.N.domain;
    for (const auto& rec : r.records) {
        const double tol = 1e-9;
        ASSERT_TRUE(D.contains(rec.point, tol));
        if (rec.stratum == "interior") {
            for (int i = 0; i < D.face_count(); ++i) EXPECT_GT(D.slack(i, rec.point), tol);
        } else if (rec.stratum.rfind("face:", 0) == 0) {
            EXPECT_NEAR(D.slack(std::stoi(rec.stratum.substr(5)) - 1, rec.point), 0.0, tol);
        } else {
            const auto comma = rec.stratum.find(',');
            EXPECT_NEAR(D.slack(std::stoi(rec.stratum.substr(5, comma - 5)) - 1, rec.point), 0.0, tol);
            EXPECT_NEAR(D.slack(std::stoi(rec.stratum.substr(comma + 1)) - 1, rec.point), 0.0, tol);
        }
        EXPECT_TRUE(std::isfinite(rec.margin));
    }
    for (const auto& m : r.margins) EXPECT_TRUE(std::isfinite(m.min)) << m.name;
}

TEST(Scene, PerturbedCubeFailsScalarComparison)
{
    // ḡ = e^{2u}δ on R³: Sc = -e^{-2u}(4Δu + 2|∇u|²), u = ½ log(1 + 0.2 sin x1).
    auto oracle = [](const Vec& x) {
        const double phi = 1 + 0.2 * std::sin(x[0]), dphi = 0.2 * std::cos(x[0]), d2phi = -0.2 * std::sin(x[0]);
        const double du = 0.5 * dphi / phi, d2u = 0.5 * (d2phi / phi - dphi * dphi / (phi * phi));
        return -(4 * d2u + 2 * du * du) / phi;
    };
    const Scene s = parse_scene(cube_scene("1 + 0.2*sin(x1)"));
    const auto h = check_hypotheses(s);
    EXPECT_FALSE(h.verdict);
    const auto& sc = h.margin("scalar");
    EXPECT_LT(sc.min, -1e-6);
    EXPECT_NEAR(sc.min, oracle(sc.min_witness), 1e-6);
    bool negative = false;
    for (const auto& rec : h.records)
        if (rec.quantity == "scalar") {
            EXPECT_NEAR(rec.margin, oracle(rec.point), 1e-6);
            negative |= rec.margin < 0;
        }
    EXPECT_TRUE(negative);
    EXPECT_FALSE(check_conclusions(s).verdict);
}

TEST(Scene, WedgePairFailsAngleComparison)
{
    const Scene s = parse_scene(wedge_scene());
    const auto h = check_hypotheses(s);
    EXPECT_FALSE(h.verdict);
    const auto& a = h.margin("angle");
    EXPECT_NEAR(a.min, pi / 2 - 2 * pi / 3, 1e-9);
    EXPECT_NEAR(a.min_witness.norm(), 0.0, 1e-9);
    EXPECT_NEAR(a.stratum_min.at("edge:1,3"), pi / 4 - pi / 6, 1e-9);
    EXPECT_NEAR(h.margin("scalar").max_abs, 0.0, 1e-12);
}

TEST(Scene, ScaledMapSatisfiesEqualities)
{
    const Scene s = parse_scene(cube_scene("", 2.0));
    const auto c = check_conclusions(s);
    EXPECT_TRUE(c.verdict);
    EXPECT_NEAR(c.margin("angle").max_abs, 0.0, 1e-10);
}

TEST(Scene, Errors)
{
    json bad = cube_scene();
    bad["extra"] = 1;
    EXPECT_THROW(parse_scene(bad), InputError);
    bad = cube_scene();
    bad["faces"].erase("6");
    EXPECT_THROW(parse_scene(bad), InputError);
    bad = cube_scene();
    bad["faces"]["1"] = "9";
    EXPECT_THROW(parse_scene(bad), InputError);
    bad = cube_scene();
    bad["f"] = {"x1", "x2"};
    EXPECT_THROW(parse_scene(bad), InputError);
    bad = cube_scene();
    bad["f"][0] = "x1 +";
    EXPECT_THROW(parse_scene(bad), InputError);
    bad = cube_scene();
    bad["N"]["g"]["11"] = "foo(x1)";
    EXPECT_THROW(parse_scene(bad), InputError);

    // Swapped faces: f = id does not send face 1 into face 2.
    bad = cube_scene();
    bad["faces"]["1"] = "2";
    bad["faces"]["2"] = "1";
    EXPECT_THROW(check_hypotheses(parse_scene(bad)), InputError);

    // f = (x1, x2²) keeps faces on faces but kills the normal direction along x2 = 0.
    const json square = {{"dim", 2},
                         {"halfspaces", {{{"a", {1, 0}}, {"b", 0}}, {{"a", {-1, 0}}, {"b", -1}}, {{"a", {0, 1}}, {"b", 0}}, {{"a", {0, -1}}, {"b", -1}}}},
                         {"g", {{"11", "1"}, {"22", "1"}}}};
    const json folded = {{"N", square}, {"M", square}, {"f", {"x1", "x2^2"}}, {"faces", identity_faces(4)}};
    try {
        check_hypotheses(parse_scene(folded));
        ADD_FAILURE() << "collapsed normal accepted";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("not a corner map"), std::string::npos) << e.what();
    }
}

TEST(Conformal, ConstantFactorFlat)
{
    const auto g = MetricField::euclidean(3);
    const Vec x = Vec::Constant(3, 0.3);
    const auto r = conformal_scalar_identity(g, parse_expression("2"), x);
    EXPECT_NEAR(r.residual(), 0.0, 1e-8);
    PolyDomain D(3, {{Vec::Unit(3, 0), -1.0}});
    Vec y = x;
    y[0] = -1.0;
    EXPECT_NEAR(conformal_mean_identity(g, parse_expression("2"), D, 0, y).residual(), 0.0, 1e-8);
}

TEST(Conformal, ConstantFactorSphere)
{
    const auto sphere = MetricField::diagonal(3, parse_expression("4/(1 + x1^2 + x2^2 + x3^2)^2"));
    const Vec x = (Vec(3) << 0.2, -0.1, 0.3).finished();
    const auto r = conformal_scalar_identity(sphere, parse_expression("3"), x);
    EXPECT_NEAR(r.lhs, 6.0 / 9.0, 1e-4);
    EXPECT_NEAR(r.residual(), 0.0, 1e-4);
}

TEST(Conformal, NonconstantFactor)
{
    const auto g = MetricField::euclidean(3);
    const Expr h = parse_expression("1 + 0.1*sin(x1)");
    for (double t : {-0.7, 0.0, 0.4, 1.3}) {
        const Vec x = (Vec(3) << t, 0.2, -0.5).finished();
        const double hv = 1 + 0.1 * std::sin(t), lap = -0.1 * std::sin(t), grad2 = 0.01 * std::cos(t) * std::cos(t);
        const double rhs = -2.0 * 2.0 * lap / std::pow(hv, 3) + 2.0 * grad2 / std::pow(hv, 4);
        const auto r = conformal_scalar_identity(g, h, x);
        EXPECT_NEAR(r.rhs, rhs, 1e-10);
        EXPECT_NEAR(r.lhs, rhs, 1e-3);
        EXPECT_LE(std::abs(r.residual()), 1e-3);
    }
    // Face x1 = -1 of the half-space x1 ≥ -1: H̄ = 0, ∂h/∂ē_n = 0.1 cos x1.
    PolyDomain D(3, {{Vec::Unit(3, 0), -1.0}});
    const Vec y = (Vec(3) << -1.0, 0.4, 0.1).finished();
    const auto m = conformal_mean_identity(g, h, D, 0, y);
    const double hv = 1 + 0.1 * std::sin(-1.0);
    EXPECT_NEAR(m.rhs, -2.0 * 0.1 * std::cos(-1.0) / (hv * hv), 1e-12);
    EXPECT_LE(std::abs(m.residual()), 1e-3);
}

TEST(Conformal, RejectsNonPositiveFactor)
{
    EXPECT_THROW(conformal_scalar_identity(MetricField::euclidean(2), parse_expression("x1"), Vec::Zero(2)), DomainError);
}
