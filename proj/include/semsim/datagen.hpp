#pragma once

#include "semsim/graph.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace semsim {

/// Law of the exogenous columns: Uniform(lower, upper).
struct UniformLaw {
    double lower = 0.0;
    double upper = 1.0;
};

/// Data-generating process: structure, path coefficients and noise levels.
struct WeightedDag {
    Dag dag;
    std::vector<double> coefficients;  // aligned with dag.edges()
    std::vector<double> residual_sd;   // per node; only endogenous entries are used
    UniformLaw exogenous_law;

    double coefficient(NodeId from, NodeId to) const;
    void validate() const;
};

/// N x n sample with named columns.
struct Dataset {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
    std::size_t column_index(const std::string& name) const;
};

struct GenerationRecipe {
    Dag model_dag;
    ScenarioKind scenario = ScenarioKind::Exact;
    double sd_eff = 2.5;
    double sd_res = 1.0;
    double shuffle_fraction = 0.25;
    double modify_fraction = 0.25;
    UniformLaw exogenous_law{};
};

struct ScenarioData {
    Dataset data;
    Dag generating_dag;
    WeightedDag process;  // empty coefficients under the Random scenario
};

WeightedDag draw_coefficients(const Dag& dag, double sd_eff, double sd_res, Rng& rng,
                              UniformLaw law = {});

Dataset generate(const WeightedDag& wdag, std::size_t n_rows, Rng& rng);

/// Draws a fresh process for the recipe's scenario and samples it.
ScenarioData generate_scenario(const GenerationRecipe& recipe, std::size_t n_rows, Rng& rng);

/// Same scenario transformation that generate_scenario applies to the model.
Dag scenario_structure(const Dag& model, ScenarioKind scenario, double shuffle_fraction,
                       double modify_fraction, Rng& rng);

void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::string& path);

/// Columns of `data` reordered to match the node order of `dag`.
Eigen::MatrixXd columns_for(const Dag& dag, const Dataset& data);

}  // namespace semsim
