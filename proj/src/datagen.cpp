#include "semsim/datagen.hpp"

#include "semsim/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace semsim {

double WeightedDag::coefficient(NodeId from, NodeId to) const {
    const auto& edges = dag.edges();
    const Edge key{from, to};
    const auto it = std::lower_bound(edges.begin(), edges.end(), key);
    if (it == edges.end() || *it != key) return 0.0;
    return coefficients[static_cast<std::size_t>(it - edges.begin())];
}

void WeightedDag::validate() const {
    if (coefficients.size() != dag.edge_count())
        throw std::invalid_argument("WeightedDag: one coefficient per edge required");
    if (residual_sd.size() != dag.size())
        throw std::invalid_argument("WeightedDag: one residual sd per node required");
    for (NodeId v : dag.endogenous())
        if (!(residual_sd[v] > 0.0))
            throw std::invalid_argument("WeightedDag: residual sd of '" + dag.name(v) + "' must be positive");
    if (!(exogenous_law.upper > exogenous_law.lower))
        throw std::invalid_argument("WeightedDag: empty exogenous range");
}

std::size_t Dataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::out_of_range("dataset has no column '" + name + "'");
}

WeightedDag draw_coefficients(const Dag& dag, double sd_eff, double sd_res, Rng& rng, UniformLaw law) {
    if (!(sd_eff >= 0.0)) throw std::invalid_argument("draw_coefficients: sd_eff must be non-negative");
    if (!(sd_res > 0.0)) throw std::invalid_argument("draw_coefficients: sd_res must be positive");
    WeightedDag w{dag, {}, std::vector<double>(dag.size(), sd_res), law};
    w.coefficients.reserve(dag.edge_count());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < dag.edge_count(); ++i) w.coefficients.push_back(sd_eff * normal(rng));
    return w;
}

Dataset generate(const WeightedDag& wdag, std::size_t n_rows, Rng& rng) {
    if (n_rows < 1) throw std::invalid_argument("generate: sample size must be at least 1");
    wdag.validate();
    const Dag& dag = wdag.dag;
    const auto N = static_cast<Eigen::Index>(n_rows);
    Dataset out{dag.names(), Eigen::MatrixXd::Zero(N, static_cast<Eigen::Index>(dag.size()))};

    std::uniform_real_distribution<double> uniform(wdag.exogenous_law.lower, wdag.exogenous_law.upper);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (NodeId v : dag.topological_order()) {
        auto col = out.values.col(static_cast<Eigen::Index>(v));
        if (dag.is_exogenous(v)) {
            for (Eigen::Index r = 0; r < N; ++r) col(r) = uniform(rng);
            continue;
        }
        for (NodeId p : dag.parents(v))
            col += wdag.coefficient(p, v) * out.values.col(static_cast<Eigen::Index>(p));
        const double sd = wdag.residual_sd[v];
        for (Eigen::Index r = 0; r < N; ++r) col(r) += sd * normal(rng);
    }
    return out;
}

Dag scenario_structure(const Dag& model, ScenarioKind scenario, double shuffle_fraction,
                       double modify_fraction, Rng& rng) {
    switch (scenario) {
        case ScenarioKind::Random: return model.with_edges({});
        case ScenarioKind::Exact: return model;
        case ScenarioKind::Shuffled: return shuffle_edges(model, shuffle_fraction, rng);
        case ScenarioKind::Overspecified: return drop_edges(model, modify_fraction, rng);
        case ScenarioKind::Underspecified: return add_edges(model, modify_fraction, rng);
    }
    throw std::invalid_argument("scenario_structure: unknown scenario");
}

ScenarioData generate_scenario(const GenerationRecipe& recipe, std::size_t n_rows, Rng& rng) {
    for (double f : {recipe.shuffle_fraction, recipe.modify_fraction})
        if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("generate_scenario: fractions must lie in [0, 1]");
    if (n_rows < 1) throw std::invalid_argument("generate_scenario: sample size must be at least 1");

    if (recipe.scenario == ScenarioKind::Random) {
        const Dag empty = recipe.model_dag.with_edges({});
        const auto N = static_cast<Eigen::Index>(n_rows);
        Dataset data{empty.names(), Eigen::MatrixXd(N, static_cast<Eigen::Index>(empty.size()))};
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index c = 0; c < data.values.cols(); ++c)
            for (Eigen::Index r = 0; r < N; ++r) data.values(r, c) = normal(rng);
        WeightedDag process{empty, {}, std::vector<double>(empty.size(), 1.0), recipe.exogenous_law};
        return {std::move(data), empty, std::move(process)};
    }

    Dag gen = scenario_structure(recipe.model_dag, recipe.scenario, recipe.shuffle_fraction,
                                 recipe.modify_fraction, rng);
    WeightedDag process = draw_coefficients(gen, recipe.sd_eff, recipe.sd_res, rng, recipe.exogenous_law);
    Dataset data = generate(process, n_rows, rng);
    return {std::move(data), std::move(gen), std::move(process)};
}

void write_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t c = 0; c < data.columns.size(); ++c) out << (c ? "," : "") << data.columns[c];
    out << '\n';
    for (Eigen::Index r = 0; r < data.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.values.cols(); ++c)
            out << (c ? "," : "") << csv::format_number(data.values(r, c));
        out << '\n';
    }
}

void write_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_csv(out, data);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Dataset read_csv(std::istream& in) {
    const csv::Table t = csv::read_table(in);
    Dataset d;
    d.columns = t.header;
    if (t.rows.empty()) throw std::runtime_error("csv: no data rows");
    d.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            auto v = csv::parse_number(t.rows[r][c]);
            if (!v || !std::isfinite(*v))
                throw std::runtime_error("csv row " + std::to_string(r + 2) + ", column '" + t.header[c] +
                                         "': not a finite number: '" + t.rows[r][c] + "'");
            d.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
        }
    return d;
}

Dataset read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
    return read_csv(in);
}

Eigen::MatrixXd columns_for(const Dag& dag, const Dataset& data) {
    std::vector<std::string> missing;
    std::vector<std::size_t> idx;
    for (const auto& name : dag.names()) {
        auto it = std::find(data.columns.begin(), data.columns.end(), name);
        if (it == data.columns.end())
            missing.push_back(name);
        else
            idx.push_back(static_cast<std::size_t>(it - data.columns.begin()));
    }
    if (!missing.empty()) {
        std::string msg = "data is missing model column(s):";
        for (const auto& m : missing) msg += " " + m;
        throw std::invalid_argument(msg);
    }
    Eigen::MatrixXd out(data.values.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = data.values.col(static_cast<Eigen::Index>(idx[j]));
    return out;
}

}  // namespace semsim
