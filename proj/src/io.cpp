#include "frontier/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace frontier::io {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return static_cast<int>(j);
    return -1;
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (!have_header) {
            for (auto& f : fields) {
                const auto b = f.find_first_not_of(" \t");
                const auto e = f.find_last_not_of(" \t");
                f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
            }
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(lineno);
    }
    if (!have_header) throw std::runtime_error("CSV input has no header line");
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_csv(in);
}

std::optional<double> parse_number(const std::string& cell) {
    std::size_t b = cell.find_first_not_of(" \t");
    std::size_t e = cell.find_last_not_of(" \t");
    if (b == std::string::npos) return std::nullopt;
    const std::string s = cell.substr(b, e - b + 1);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

Dataset read_dataset_csv(const std::string& path) {
    const CsvTable t = read_csv_file(path);
    std::vector<int> xcols;
    for (int j = 1;; ++j) {
        const int c = t.column("x" + std::to_string(j));
        if (c < 0) break;
        xcols.push_back(c);
    }
    const int ycol = t.column("y");
    const int fcol = t.column("f");
    if (xcols.empty() || ycol < 0) throw std::runtime_error(path + ": expected columns x1..xd and y");
    const Index n = static_cast<Index>(t.rows.size());
    MatrixXd x(n, static_cast<Index>(xcols.size()));
    VectorXd y(n), f(n);
    for (Index i = 0; i < n; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        auto cell = [&](int c) {
            const auto v = c < static_cast<int>(row.size()) ? parse_number(row[static_cast<std::size_t>(c)]) : std::nullopt;
            if (!v)
                throw std::runtime_error(path + ": line " + std::to_string(t.line_numbers[static_cast<std::size_t>(i)]) +
                                         ": non-numeric value in column " + t.header[static_cast<std::size_t>(c)]);
            return *v;
        };
        for (std::size_t j = 0; j < xcols.size(); ++j) x(i, static_cast<Index>(j)) = cell(xcols[j]);
        y(i) = cell(ycol);
        if (fcol >= 0) f(i) = cell(fcol);
    }
    return fcol >= 0 ? Dataset(x, y, f) : Dataset(x, y);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    for (Index j = 0; j < data.dims(); ++j) out << 'x' << j + 1 << ',';
    out << 'y';
    if (data.has_frontier()) out << ",f";
    out << '\n';
    for (Index i = 0; i < data.size(); ++i) {
        for (Index j = 0; j < data.dims(); ++j) out << format_number(data.inputs()(i, j)) << ',';
        out << format_number(data.outputs()(i));
        if (data.has_frontier()) out << ',' << format_number((*data.true_frontier())(i));
        out << '\n';
    }
}

}  // namespace frontier::io
