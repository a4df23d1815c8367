#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"
#include "expr.hpp"
#include "jet.hpp"

namespace dihedral {

/// Symmetric matrix of expressions g_ij over a chart. Only i <= j is stored.
class MetricField {
public:
    MetricField() = default;

    /// Entries in row-major upper-triangular order: g11, g12, .., g1n, g22, ..
    MetricField(int dim, std::vector<Expr> upper) : dim_(dim), upper_(std::move(upper))
    {
        if (dim < 1 || dim > kMaxDim) throw InputError("metric dimension must be in 1.." + std::to_string(kMaxDim));
        if (static_cast<int>(upper_.size()) != dim * (dim + 1) / 2) throw InputError("wrong number of metric entries");
        for (const auto& e : upper_)
            if (e.arity() > dim)
                throw InputError("metric entry " + e.to_string() + " uses a coordinate beyond x" + std::to_string(dim));
    }

    /// Euclidean metric in `dim` coordinates.
    static MetricField euclidean(int dim) { return diagonal(dim, Expr::number(1.0)); }

    /// The conformal metric factor * delta.
    static MetricField diagonal(int dim, const Expr& factor)
    {
        std::vector<Expr> up;
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) up.push_back(i == j ? factor : Expr::number(0.0));
        return MetricField(dim, std::move(up));
    }

    int dim() const noexcept { return dim_; }

    const Expr& entry(int i, int j) const
    {
        if (i > j) std::swap(i, j);
        return upper_[static_cast<std::size_t>(i * dim_ - i * (i - 1) / 2 + (j - i))];
    }

    /// The metric multiplied pointwise by a scalar expression.
    MetricField scaled(const Expr& factor) const
    {
        std::vector<Expr> up;
        for (const auto& e : upper_) up.push_back(factor * e);
        return MetricField(dim_, std::move(up));
    }

private:
    int dim_ = 0;
    std::vector<Expr> upper_;
};

/// Builds a metric from "ij" keyed entry text (1-based, i <= j). Missing off-diagonals are 0.
inline MetricField parse_metric(const std::map<std::string, std::string>& entries, int dim)
{
    if (dim < 1 || dim > kMaxDim) throw InputError("metric dimension must be in 1.." + std::to_string(kMaxDim));
    for (const auto& [key, text] : entries) {
        const bool ok = key.size() == 2 && key[0] >= '1' && key[1] >= '1' && key[0] - '0' <= dim
            && key[1] - '0' <= dim;
        if (!ok) throw InputError("g: invalid entry key \"" + key + "\"");
        if (key[0] > key[1]) throw InputError("g: entry \"" + key + "\" must be given as \"" + key[1] + key[0] + "\"");
    }
    std::vector<Expr> up;
    for (int i = 1; i <= dim; ++i)
        for (int j = i; j <= dim; ++j) {
            const std::string key = std::to_string(i) + std::to_string(j);
            auto it = entries.find(key);
            if (it == entries.end()) {
                if (i == j) throw InputError("g: missing diagonal entry \"" + key + "\"");
                up.push_back(Expr::number(0.0));
                continue;
            }
            try {
                up.push_back(parse_expression(it->second));
            } catch (const ParseError& e) {
                throw InputError("g." + key + ": " + e.what());
            }
        }
    return MetricField(dim, std::move(up));
}

/// Parses {"dim": n, "g": {"11": "...", ...}}. Other keys are rejected unless listed in `extra_keys`.
inline MetricField parse_metric(const nlohmann::json& j, const std::vector<std::string>& extra_keys = {})
{
    if (!j.is_object()) throw InputError("metric: expected an object");
    for (const auto& [key, v] : j.items()) {
        if (key == "dim" || key == "g") continue;
        if (std::find(extra_keys.begin(), extra_keys.end(), key) == extra_keys.end())
            throw InputError("metric: unknown key \"" + key + "\"");
    }
    if (!j.contains("dim") || !j["dim"].is_number_integer()) throw InputError("metric: \"dim\" must be an integer");
    if (!j.contains("g") || !j["g"].is_object()) throw InputError("metric: \"g\" must be an object");
    std::map<std::string, std::string> entries;
    for (const auto& [key, v] : j["g"].items()) {
        if (!v.is_string()) throw InputError("g." + key + ": expected an expression string");
        entries[key] = v.get<std::string>();
    }
    return parse_metric(entries, j["dim"].get<int>());
}

namespace detail {

inline void check_point(const MetricField& g, std::span<const double> x)
{
    if (static_cast<int>(x.size()) != g.dim())
        throw InputError("point has " + std::to_string(x.size()) + " coordinates, metric has dimension "
                         + std::to_string(g.dim()));
}

inline void check_positive(const Mat& m, std::span<const double> x)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
        std::string at;
        for (double v : x) at += (at.empty() ? "" : ", ") + format_double(v);
        throw GeometryError("metric is not positive definite at (" + at + ")");
    }
}

} // namespace detail

/// g(x) as a matrix; throws GeometryError unless it is positive definite.
inline Mat metric_at(const MetricField& g, std::span<const double> x)
{
    detail::check_point(g, x);
    const int n = g.dim();
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = g.entry(i, j).evaluate<double>(x);
    detail::check_positive(m, x);
    return m;
}

inline Mat metric_at(const MetricField& g, const Vec& x) { return metric_at(g, std::span<const double>(x.data(), x.size())); }

/// Second-order jets of every entry at x (index [i][j], full square).
struct MetricJets {
    Mat g;
    std::vector<Mat> dg;               // dg[k](i,j) = d_k g_ij
    std::vector<std::vector<Mat>> d2g; // d2g[k][l](i,j) = d_k d_l g_ij
};

inline MetricJets metric_jets(const MetricField& g, const Vec& x)
{
    const std::span<const double> xs(x.data(), x.size());
    detail::check_point(g, xs);
    const int n = g.dim();
    MetricJets out{Mat(n, n), std::vector<Mat>(n, Mat(n, n)), std::vector<std::vector<Mat>>(n, std::vector<Mat>(n, Mat(n, n)))};
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const Jet e = eval_jet(g.entry(i, j), xs);
            out.g(i, j) = out.g(j, i) = e.value();
            for (int k = 0; k < n; ++k) {
                out.dg[k](i, j) = out.dg[k](j, i) = e.grad()[k];
                for (int l = 0; l < n; ++l) out.d2g[k][l](i, j) = out.d2g[k][l](j, i) = e.hess()(k, l);
            }
        }
    detail::check_positive(out.g, xs);
    return out;
}

} // namespace dihedral
