#pragma once

#include "semsim/datagen.hpp"
#include "semsim/graph.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace semsim {

/// Sample partial correlation of columns x and y given the columns in `given`,
/// computed from residuals of intercept-augmented least squares. Empty when a
/// residual vector vanishes (collinear input).
std::optional<double> partial_correlation(const Eigen::MatrixXd& columns, NodeId x, NodeId y,
                                          const std::vector<NodeId>& given);

struct ClaimTest {
    IndependenceClaim claim;
    double r = 0.0;
    double z = 0.0;
    double p = 1.0;
    bool failed = false;
    bool degenerate = false;  // |r| >= 1 or collinear; reported as p = 0
};

/// Fisher z test of a partial correlation: z = atanh(r) * sqrt(N - |Z| - 3).
ClaimTest fisher_z_test(const IndependenceClaim& claim, std::optional<double> r, std::size_t n_obs,
                        double alpha);

struct LocalTests {
    std::vector<ClaimTest> tests;
    double prop_failed = 0.0;

    std::vector<double> p_values() const;
};

/// Tests every basis-set claim of `dag`. `columns` holds the data in dag node order.
LocalTests ci_local_tests(const Dag& dag, const Eigen::MatrixXd& columns, double alpha = 0.05);
LocalTests ci_local_tests(const Dag& dag, const Dataset& data, double alpha = 0.05);

struct FisherC {
    double c = 0.0;
    std::size_t df = 0;
    double p = 1.0;
    bool clamped = false;  // some p-value was 0 and replaced by kMinClaimP
};

inline constexpr double kMinClaimP = 1e-300;

FisherC fishers_c(std::span<const double> claim_p_values);

}  // namespace semsim
