#pragma once

// Report serialisation. Floating-point values are written with 17 significant digits so
// they round-trip exactly; non-finite values become null. Key order is insertion order.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"

namespace dihedral {

using Report = nlohmann::ordered_json;

inline std::string format_number17(double v)
{
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const Report& j, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case Report::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (const auto& [key, v] : j.items()) {
            if (!first) os << ",\n";
            first = false;
            os << pad << Report(key).dump() << ": ";
            write_json(os, v, indent, depth + 1);
        }
        os << "\n" << close << "}";
        return;
    }
    case Report::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        bool flat = true;
        for (const auto& v : j) flat = flat && !v.is_structured();
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i > 0) os << (flat ? ", " : ",");
            if (!flat) os << "\n" << pad;
            write_json(os, j[i], indent, depth + 1);
        }
        if (!flat) os << "\n" << close;
        os << "]";
        return;
    }
    case Report::value_t::number_float:
        os << format_number17(j.get<double>());
        return;
    default:
        os << j.dump();
    }
}

} // namespace detail

inline void write_report(std::ostream& os, const Report& j)
{
    detail::write_json(os, j, 2, 0);
    os << "\n";
}

inline std::string report_string(const Report& j)
{
    std::ostringstream os;
    write_report(os, j);
    return os.str();
}

inline Report to_json(const Eigen::VectorXd& v)
{
    Report a = Report::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Report to_json(const Eigen::MatrixXd& m)
{
    Report a = Report::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
    return a;
}

inline Report to_json(const std::vector<double>& v)
{
    Report a = Report::array();
    for (double x : v) a.push_back(x);
    return a;
}

/// Comma-separated rows; numbers with 17 significant digits, strings quoted when needed.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

    template <class... T>
    void row(const T&... cells)
    {
        static_assert(sizeof...(T) > 0);
        if (sizeof...(T) != columns_) throw InputError("CSV row has the wrong number of cells");
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << "\n";
    }

    std::string str() const { return out_.str(); }

private:
    static std::string cell(double v) { return std::isfinite(v) ? format_number17(v) : (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf")); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "true" : "false"; }
    static std::string cell(const char* v) { return cell(std::string(v)); }
    static std::string cell(const std::string& v)
    {
        if (v.find_first_of(",\"\n") == std::string::npos) return v;
        std::string q = "\"";
        for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }

    void row_strings(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cell(cells[i]);
        out_ << "\n";
    }

    std::size_t columns_;
    std::ostringstream out_;
};

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw InputError("failed to write " + path);
}

/// Parses a JSON file; syntax errors carry the file name and position.
inline nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError(path + ": cannot open file");
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path + ": malformed JSON: " + e.what());
    }
}

} // namespace dihedral
