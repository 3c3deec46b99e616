#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semsim::csv {

/// Shortest round-trip decimal form; NaN is written as "NA".
std::string format_number(double v);

std::optional<double> parse_number(std::string_view text);

std::vector<std::string> split_line(std::string_view line);

/// Header plus string cells, for schema-driven readers.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
};

Table read_table(std::istream& in);

}  // namespace semsim::csv
