#pragma once

#include "semsim/datagen.hpp"
#include "semsim/graph.hpp"
#include "semsim/independence.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace semsim {

enum class Fitter { Piecewise, Global };

std::string_view to_string(Fitter f);
Fitter parse_fitter(std::string_view text);

/// Ordinary least squares with an intercept and t-based inference.
struct RegressionFit {
    std::size_t n_obs = 0;
    std::size_t k_params = 0;            // predictors + intercept + residual variance
    Eigen::VectorXd coefficients;        // [intercept, predictors...]
    Eigen::VectorXd standard_errors;     // same layout
    Eigen::VectorXd t_values;            // same layout
    std::vector<double> p_values;        // predictors only
    double rss = 0.0;
    double sigma2_hat = 0.0;             // RSS / (n - p)
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double loglik = 0.0;                 // at the ML variance RSS / n
};

/// Empty when the design is rank deficient or leaves no residual degrees of freedom.
std::optional<RegressionFit> ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

/// Gaussian log-likelihood of n observations with ML residual sum of squares `rss`.
double gaussian_loglik(double rss, std::size_t n);

struct NodeRegression {
    NodeId response;
    std::vector<NodeId> predictors;
    RegressionFit fit;
};

/// One estimated path, aligned with dag.edges().
struct PathEstimate {
    Edge edge;
    double estimate = 0.0;
    double se = 0.0;
    double statistic = 0.0;
    double p = 1.0;
};

struct PiecewiseFit {
    bool converged = false;
    std::size_t n_obs = 0;
    std::vector<NodeRegression> regressions;  // endogenous nodes, ascending id
    std::vector<PathEstimate> paths;
    LocalTests local;                         // basis-set claims and their tests
    FisherC fisher;
    double global_p = 0.0;
    double total_loglik = 0.0;  // endogenous regressions + exogenous marginals
    std::size_t total_k = 0;    // sum over nodes of (parents + 2)

    std::vector<double> path_p_values() const;
};

PiecewiseFit fit_piecewise(const Dag& dag, const Dataset& data, double alpha = 0.05);

struct GlobalFit {
    bool converged = false;
    std::size_t n_obs = 0;
    Eigen::MatrixXd b_matrix;       // [i, j] = effect of j on i
    Eigen::MatrixXd psi;
    Eigen::MatrixXd implied_sigma;
    Eigen::MatrixXd sample_sigma;   // denominator N
    std::vector<PathEstimate> paths;
    Eigen::VectorXd intercepts;
    double fml = 0.0;
    double chi2 = 0.0;
    std::size_t df = 0;
    double global_p = 0.0;
    std::vector<NodeId> endogenous;
    std::vector<double> endo_r2;    // aligned with `endogenous`
    double loglik = 0.0;
    std::size_t k_cov = 0;          // paths + residual variances + exogenous variances
    std::size_t k_params = 0;       // k_cov + one mean per node
    std::string failure;            // reason when !converged

    std::vector<double> path_p_values() const;
};

std::optional<Eigen::MatrixXd> implied_covariance(const Eigen::MatrixXd& b_matrix, const Eigen::MatrixXd& psi);

/// ML discrepancy ln|Sigma| + tr(S Sigma^-1) - ln|S| - p, empty unless both are positive definite.
std::optional<double> fml(const Eigen::MatrixXd& sample_sigma, const Eigen::MatrixXd& implied_sigma);

/// Closed-form ML fit of a recursive observed-variable model from the sample covariance.
GlobalFit fit_global(const Dag& dag, const Dataset& data);

/// Sample covariance with denominator N.
Eigen::MatrixXd ml_covariance(const Eigen::MatrixXd& columns);

/// Number of free covariance-structure parameters.
std::size_t covariance_parameter_count(const Dag& dag);

void write_path_table(std::ostream& out, const Dag& dag, const std::vector<PathEstimate>& paths);
std::string summary_json(const Dag& dag, const PiecewiseFit& fit);
std::string summary_json(const Dag& dag, const GlobalFit& fit);

}  // namespace semsim
