#ifndef FRONTIER_IO_HPP
#define FRONTIER_IO_HPP

#include "frontier/core.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace frontier::io {

/// Shortest round-trip text for a double ("nan"/"inf" spelled out).
std::string format_number(double v);
/// Empty string for a missing value.
std::string format_number(const std::optional<double>& v);

/// Splits one CSV line. Double-quoted fields may contain commas and
/// doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers;  // 1-based source line of each row

    /// Column position, or -1.
    int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Plain matrix schema: columns x1..xd, y and optionally f (true frontier).
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

/// Strict numeric parse of a whole cell.
std::optional<double> parse_number(const std::string& cell);

}  // namespace frontier::io

#endif  // FRONTIER_IO_HPP
