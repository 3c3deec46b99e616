#pragma once

#include "semsim/csv.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semsim::figure {

enum class FigureId { Fig2, Fig3, Fig4, Fig5, Fig6, Appendix };

std::string_view to_string(FigureId id);
FigureId parse_figure(std::string_view text);

/// Results CSV does not have the columns or batch the figure needs.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Long-format table; the first column is always n_samples and the last the plotted value.
struct TidyTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Batch of a results table, read from its header.
int results_batch(const csv::Table& results);

/// Main-text figures keep the default signal/noise level (sd_eff 2.5, sd_res 1).
TidyTable tidy(FigureId id, const csv::Table& results);

void write_tidy(std::ostream& out, const TidyTable& table);

/// Small multiples with a log-scaled x axis, one line per scenario and fitter.
void write_svg(std::ostream& out, const TidyTable& table, std::string_view title);

}  // namespace semsim::figure
