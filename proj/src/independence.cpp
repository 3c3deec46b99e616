#include "semsim/independence.hpp"

#include "semsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semsim {

namespace {

Eigen::VectorXd residualize(const Eigen::MatrixXd& design, const Eigen::VectorXd& v) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    return v - design * qr.solve(v);
}

}  // namespace

std::optional<double> partial_correlation(const Eigen::MatrixXd& columns, NodeId x, NodeId y,
                                          const std::vector<NodeId>& given) {
    const Eigen::Index N = columns.rows();
    Eigen::MatrixXd design(N, static_cast<Eigen::Index>(given.size()) + 1);
    design.col(0).setOnes();
    for (std::size_t j = 0; j < given.size(); ++j)
        design.col(static_cast<Eigen::Index>(j) + 1) = columns.col(static_cast<Eigen::Index>(given[j]));

    const Eigen::VectorXd ex = residualize(design, columns.col(static_cast<Eigen::Index>(x)));
    const Eigen::VectorXd ey = residualize(design, columns.col(static_cast<Eigen::Index>(y)));
    const double nx = ex.norm();
    const double ny = ey.norm();
    if (!(nx > 0.0) || !(ny > 0.0)) return std::nullopt;
    return std::clamp(ex.dot(ey) / (nx * ny), -1.0, 1.0);
}

ClaimTest fisher_z_test(const IndependenceClaim& claim, std::optional<double> r, std::size_t n_obs,
                        double alpha) {
    const std::size_t k = claim.conditioning_set.size();
    if (n_obs <= k + 3)
        throw std::invalid_argument("conditional independence test needs N > |Z| + 3");
    ClaimTest t{claim};
    if (!r || std::abs(*r) >= 1.0) {
        t.r = r.value_or(std::nan(""));
        t.z = std::numeric_limits<double>::infinity();
        t.p = 0.0;
        t.failed = true;
        t.degenerate = true;
        return t;
    }
    t.r = *r;
    t.z = std::atanh(*r) * std::sqrt(static_cast<double>(n_obs - k - 3));
    t.p = stats::normal_two_sided(t.z);
    t.failed = t.p < alpha;
    return t;
}

std::vector<double> LocalTests::p_values() const {
    std::vector<double> out;
    out.reserve(tests.size());
    for (const auto& t : tests) out.push_back(t.p);
    return out;
}

LocalTests ci_local_tests(const Dag& dag, const Eigen::MatrixXd& columns, double alpha) {
    if (static_cast<std::size_t>(columns.cols()) != dag.size())
        throw std::invalid_argument("ci_local_tests: column count does not match the model");
    LocalTests out;
    const auto n_obs = static_cast<std::size_t>(columns.rows());
    std::size_t failed = 0;
    for (const auto& claim : basis_set(dag)) {
        auto r = partial_correlation(columns, claim.x, claim.y, claim.conditioning_set);
        out.tests.push_back(fisher_z_test(claim, r, n_obs, alpha));
        failed += out.tests.back().failed ? 1 : 0;
    }
    out.prop_failed = out.tests.empty() ? 0.0 : double(failed) / double(out.tests.size());
    return out;
}

LocalTests ci_local_tests(const Dag& dag, const Dataset& data, double alpha) {
    return ci_local_tests(dag, columns_for(dag, data), alpha);
}

FisherC fishers_c(std::span<const double> claim_p_values) {
    FisherC out;
    if (claim_p_values.empty()) return out;
    double sum = 0.0;
    for (double p : claim_p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("fishers_c: p-values must lie in [0, 1]");
        if (p < kMinClaimP) {
            p = kMinClaimP;
            out.clamped = true;
        }
        sum += std::log(p);
    }
    out.c = sum == 0.0 ? 0.0 : -2.0 * sum;
    out.df = 2 * claim_p_values.size();
    out.p = stats::chi2_upper(out.c, static_cast<double>(out.df));
    return out;
}

}  // namespace semsim
