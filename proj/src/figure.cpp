#include "semsim/figure.hpp"

#include "semsim/metrics.hpp"
#include "semsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace semsim::figure {

namespace {

constexpr double kMainSdEff = 2.5;
constexpr double kMainSdRes = 1.0;

const char* const kBatch1Metrics[] = {"prop_accepted", "prop_significant_paths", "avg_r2", "prop_ci_failed"};

struct Columns {
    const csv::Table& table;

    std::size_t operator()(std::string_view name) const {
        auto c = table.column(name);
        if (!c) throw SchemaError("results table has no column '" + std::string(name) + "'");
        return *c;
    }
};

bool main_signal(const csv::Table& t, const std::vector<std::string>& row) {
    Columns col{t};
    auto eff = csv::parse_number(row[col("sd_eff")]);
    auto res = csv::parse_number(row[col("sd_res")]);
    if (!eff || !res) throw SchemaError("non-numeric sd_eff or sd_res cell");
    return *eff == kMainSdEff && *res == kMainSdRes;
}

void check_unique(const TidyTable& t) {
    std::set<std::vector<std::string>> keys;
    for (const auto& r : t.rows) {
        std::vector<std::string> key(r.begin(), r.end() - 1);
        if (!keys.insert(key).second) throw SchemaError("results table holds duplicate parameter sets");
    }
}

TidyTable batch1_panel(const csv::Table& t, const char* metric) {
    Columns col{t};
    const std::size_t n = col("n_samples"), cov = col("n_cov"), sc = col("scenario"), fit = col("fitter");
    const std::size_t m = col(metric);
    TidyTable out{{"n_samples", "n_cov", "scenario", "fitter", metric}, {}};
    for (const auto& r : t.rows)
        if (main_signal(t, r)) out.rows.push_back({r[n], r[cov], r[sc], r[fit], r[m]});
    return out;
}

TidyTable batch1_appendix(const csv::Table& t) {
    Columns col{t};
    TidyTable out{{"n_samples", "n_cov", "scenario", "fitter", "sd_eff", "sd_res", "metric", "value"}, {}};
    for (const auto& r : t.rows)
        for (const char* metric : kBatch1Metrics)
            out.rows.push_back({r[col("n_samples")], r[col("n_cov")], r[col("scenario")], r[col("fitter")],
                                r[col("sd_eff")], r[col("sd_res")], metric, r[col(metric)]});
    return out;
}

TidyTable batch2_table(const csv::Table& t, bool all_levels) {
    Columns col{t};
    TidyTable out;
    out.header = {"n_samples", "n_cov", "fitter"};
    if (all_levels) out.header.insert(out.header.end(), {"sd_eff", "sd_res"});
    out.header.insert(out.header.end(), {"ic_metric", "scenario", "prop_best"});

    std::vector<std::string> slots;
    for (ScenarioKind s : sim::kSelectionScenarios) slots.emplace_back(to_string(s));
    slots.emplace_back("none");

    for (const auto& r : t.rows) {
        if (!all_levels && !main_signal(t, r)) continue;
        for (IcMetric m : kAllIcMetrics)
            for (const auto& s : slots) {
                std::vector<std::string> row{r[col("n_samples")], r[col("n_cov")], r[col("fitter")]};
                if (all_levels) row.insert(row.end(), {r[col("sd_eff")], r[col("sd_res")]});
                const std::string metric(to_string(m));
                row.insert(row.end(), {metric, s, r[col(metric + "_" + s)]});
                out.rows.push_back(std::move(row));
            }
    }
    return out;
}

}  // namespace

std::string_view to_string(FigureId id) {
    switch (id) {
        case FigureId::Fig2: return "fig2";
        case FigureId::Fig3: return "fig3";
        case FigureId::Fig4: return "fig4";
        case FigureId::Fig5: return "fig5";
        case FigureId::Fig6: return "fig6";
        case FigureId::Appendix: return "appendix";
    }
    return "unknown";
}

FigureId parse_figure(std::string_view text) {
    for (FigureId id : {FigureId::Fig2, FigureId::Fig3, FigureId::Fig4, FigureId::Fig5, FigureId::Fig6,
                        FigureId::Appendix})
        if (text == to_string(id)) return id;
    throw std::invalid_argument("unknown figure '" + std::string(text) + "'");
}

int results_batch(const csv::Table& results) {
    for (int batch : {1, 2}) {
        const auto need = sim::results_header(batch);
        if (std::all_of(need.begin(), need.end(), [&](const std::string& c) { return results.column(c).has_value(); }))
            return batch;
    }
    throw SchemaError("not a results table: header matches neither batch 1 nor batch 2");
}

TidyTable tidy(FigureId id, const csv::Table& results) {
    const int batch = results_batch(results);
    TidyTable out;
    if (id == FigureId::Appendix) {
        out = batch == 1 ? batch1_appendix(results) : batch2_table(results, true);
    } else if (id == FigureId::Fig6) {
        if (batch != 2) throw SchemaError("fig6 needs batch-2 results");
        out = batch2_table(results, false);
    } else {
        if (batch != 1) throw SchemaError(std::string(to_string(id)) + " needs batch-1 results");
        out = batch1_panel(results, kBatch1Metrics[static_cast<int>(id)]);
    }
    if (out.rows.empty()) throw SchemaError("no rows at the default signal/noise level");
    check_unique(out);
    return out;
}

void write_tidy(std::ostream& out, const TidyTable& table) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
}

namespace {

const char* const kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb"};

struct Series {
    std::string scenario;
    std::string fitter;
    std::vector<std::pair<double, double>> points;
};

struct Panel {
    std::string title;
    std::vector<Series> series;
};

std::string fmt(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << v;
    return s.str();
}

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace

void write_svg(std::ostream& out, const TidyTable& table, std::string_view title) {
    const std::size_t ny = table.header.size() - 1;
    std::optional<std::size_t> sc_col, fit_col;
    std::vector<std::size_t> panel_cols;
    for (std::size_t c = 1; c < ny; ++c) {
        if (table.header[c] == "scenario") sc_col = c;
        else if (table.header[c] == "fitter") fit_col = c;
        else panel_cols.push_back(c);
    }

    std::vector<Panel> panels;
    std::map<std::string, std::size_t> panel_index;
    std::vector<std::string> scenarios, fitters;
    double xmin = INFINITY, xmax = -INFINITY, ymin = 0.0, ymax = 1.0;
    for (const auto& r : table.rows) {
        auto x = csv::parse_number(r[0]);
        auto y = csv::parse_number(r[ny]);
        if (!x || !y || !std::isfinite(*y) || *x <= 0) continue;
        std::string key;
        for (std::size_t c : panel_cols) key += (key.empty() ? "" : ", ") + table.header[c] + "=" + r[c];
        auto [it, fresh] = panel_index.try_emplace(key, panels.size());
        if (fresh) panels.push_back({key, {}});
        Panel& p = panels[it->second];
        const std::string sc = sc_col ? r[*sc_col] : "";
        const std::string fi = fit_col ? r[*fit_col] : "";
        if (std::find(scenarios.begin(), scenarios.end(), sc) == scenarios.end()) scenarios.push_back(sc);
        if (std::find(fitters.begin(), fitters.end(), fi) == fitters.end()) fitters.push_back(fi);
        auto s = std::find_if(p.series.begin(), p.series.end(),
                              [&](const Series& v) { return v.scenario == sc && v.fitter == fi; });
        if (s == p.series.end()) {
            p.series.push_back({sc, fi, {}});
            s = p.series.end() - 1;
        }
        s->points.emplace_back(*x, *y);
        xmin = std::min(xmin, *x);
        xmax = std::max(xmax, *x);
        ymin = std::min(ymin, *y);
        ymax = std::max(ymax, *y);
    }

    const double pw = 280, ph = 210, ml = 45, mr = 15, mt = 30, mb = 35;
    const std::size_t ncol = panels.empty() ? 1 : static_cast<std::size_t>(std::ceil(std::sqrt(double(panels.size()))));
    const std::size_t nrow = panels.empty() ? 1 : (panels.size() + ncol - 1) / ncol;
    const double legend_h = 20.0 * double(scenarios.size() + fitters.size()) + 20;
    const double width = double(ncol) * pw, height = 30 + double(nrow) * ph + legend_h;
    const double lx0 = std::log10(xmin), lx1 = xmax > xmin ? std::log10(xmax) : lx0 + 1;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
        << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << escape(title) << "</text>\n";

    for (std::size_t i = 0; i < panels.size(); ++i) {
        const double ox = double(i % ncol) * pw, oy = 30 + double(i / ncol) * ph;
        const double x0 = ox + ml, x1 = ox + pw - mr, y0 = oy + ph - mb, y1 = oy + mt;
        auto px = [&](double x) { return x0 + (std::log10(x) - lx0) / (lx1 - lx0) * (x1 - x0); };
        auto py = [&](double y) { return y0 - (y - ymin) / (ymax - ymin) * (y0 - y1); };

        out << "<g>\n<text x=\"" << fmt(x0) << "\" y=\"" << fmt(oy + 18) << "\">" << escape(panels[i].title)
            << "</text>\n";
        out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y1) << "\" width=\"" << fmt(x1 - x0) << "\" height=\""
            << fmt(y0 - y1) << "\" fill=\"none\" stroke=\"#888\"/>\n";
        for (double d = std::ceil(lx0 - 1e-9); d <= lx1 + 1e-9; d += 1.0) {
            const double x = px(std::pow(10.0, d));
            out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x) << "\" y2=\""
                << fmt(y0 + 4) << "\" stroke=\"#888\"/><text x=\"" << fmt(x) << "\" y=\"" << fmt(y0 + 15)
                << "\" text-anchor=\"middle\">1e" << static_cast<int>(d) << "</text>\n";
        }
        for (int k = 0; k <= 4; ++k) {
            const double v = ymin + (ymax - ymin) * k / 4.0;
            out << "<text x=\"" << fmt(x0 - 4) << "\" y=\"" << fmt(py(v) + 3) << "\" text-anchor=\"end\">"
                << std::setprecision(2) << v << "</text>\n";
        }
        for (const auto& s : panels[i].series) {
            auto pts = s.points;
            std::sort(pts.begin(), pts.end());
            const auto color = std::find(scenarios.begin(), scenarios.end(), s.scenario) - scenarios.begin();
            const auto dash = std::find(fitters.begin(), fitters.end(), s.fitter) - fitters.begin();
            out << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kPalette[color % 7] << '"';
            if (dash) out << " stroke-dasharray=\"" << 3 * dash << ',' << 2 * dash << '"';
            out << " points=\"";
            for (const auto& [x, y] : pts) out << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
            out << "\"/>\n";
        }
        out << "</g>\n";
    }

    double ly = 30 + double(nrow) * ph + 10;
    for (std::size_t k = 0; k < scenarios.size(); ++k, ly += 20)
        out << "<line x1=\"10\" y1=\"" << fmt(ly) << "\" x2=\"40\" y2=\"" << fmt(ly) << "\" stroke=\"" << kPalette[k % 7]
            << "\" stroke-width=\"2\"/><text x=\"46\" y=\"" << fmt(ly + 3) << "\">"
            << escape(scenarios[k].empty() ? "value" : scenarios[k]) << "</text>\n";
    for (std::size_t k = 0; k < fitters.size(); ++k, ly += 20) {
        out << "<line x1=\"10\" y1=\"" << fmt(ly) << "\" x2=\"40\" y2=\"" << fmt(ly) << "\" stroke=\"black\"";
        if (k) out << " stroke-dasharray=\"" << 3 * k << ',' << 2 * k << '"';
        out << "/><text x=\"46\" y=\"" << fmt(ly + 3) << "\">" << escape(fitters[k]) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace semsim::figure
