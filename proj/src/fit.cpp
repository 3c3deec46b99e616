#include "semsim/fit.hpp"

#include "semsim/csv.hpp"
#include "semsim/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace semsim {

std::string_view to_string(Fitter f) { return f == Fitter::Piecewise ? "piecewise" : "global"; }

Fitter parse_fitter(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "piecewise" || t == "piecewisesem") return Fitter::Piecewise;
    if (t == "global" || t == "lavaan") return Fitter::Global;
    throw std::invalid_argument("unknown fitter '" + std::string(text) + "'");
}

double gaussian_loglik(double rss, std::size_t n) {
    const double nd = static_cast<double>(n);
    if (rss <= 0.0) return std::numeric_limits<double>::infinity();
    return -0.5 * nd * (std::log(2.0 * std::numbers::pi * rss / nd) + 1.0);
}

std::optional<RegressionFit> ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    const Eigen::Index n = y.size();
    const Eigen::Index p = x.cols() + 1;
    if (x.rows() != n) throw std::invalid_argument("ols: row count mismatch");
    if (n <= p) return std::nullopt;

    Eigen::MatrixXd design(n, p);
    design.col(0).setOnes();
    design.rightCols(p - 1) = x;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < p) return std::nullopt;

    RegressionFit f;
    f.n_obs = static_cast<std::size_t>(n);
    f.k_params = static_cast<std::size_t>(p) + 1;
    f.coefficients = qr.solve(y);
    f.rss = (y - design * f.coefficients).squaredNorm();

    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd perm_cov = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * perm_cov * perm.transpose();

    const double resid_df = static_cast<double>(n - p);
    f.sigma2_hat = f.rss / resid_df;
    f.standard_errors = (f.sigma2_hat * xtx_inv.diagonal().array()).sqrt().matrix();
    f.t_values.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double b = f.coefficients(j);
        const double se = f.standard_errors(j);
        f.t_values(j) = se > 0.0 ? b / se : (b == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), b));
    }
    for (Eigen::Index j = 1; j < p; ++j) f.p_values.push_back(stats::t_two_sided(f.t_values(j), resid_df));

    const double mean = y.mean();
    const double tss = (y.array() - mean).square().sum();
    f.r2 = tss > 0.0 ? std::clamp(1.0 - f.rss / tss, 0.0, 1.0) : 0.0;
    f.adj_r2 = 1.0 - (1.0 - f.r2) * static_cast<double>(n - 1) / resid_df;
    f.loglik = gaussian_loglik(f.rss, f.n_obs);
    return f;
}

namespace {

// Every equation needs N above its parameter count (parents + intercept + variance).
bool enough_rows(const Dag& dag, std::size_t n_obs) {
    for (NodeId v = 0; v < dag.size(); ++v)
        if (n_obs <= dag.parents(v).size() + 2) return false;
    return true;
}

std::vector<double> p_values_of(const std::vector<PathEstimate>& paths) {
    std::vector<double> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(p.p);
    return out;
}

}  // namespace

std::vector<double> PiecewiseFit::path_p_values() const { return p_values_of(paths); }
std::vector<double> GlobalFit::path_p_values() const { return p_values_of(paths); }

PiecewiseFit fit_piecewise(const Dag& dag, const Dataset& data, double alpha) {
    const Eigen::MatrixXd cols = columns_for(dag, data);
    PiecewiseFit out;
    out.n_obs = static_cast<std::size_t>(cols.rows());
    if (!enough_rows(dag, out.n_obs)) return out;
    for (const auto& claim : basis_set(dag))
        if (out.n_obs <= claim.conditioning_set.size() + 3) return out;

    for (NodeId v = 0; v < dag.size(); ++v) {
        const auto& parents = dag.parents(v);
        Eigen::MatrixXd x(cols.rows(), static_cast<Eigen::Index>(parents.size()));
        for (std::size_t j = 0; j < parents.size(); ++j)
            x.col(static_cast<Eigen::Index>(j)) = cols.col(static_cast<Eigen::Index>(parents[j]));
        auto fit = ols(cols.col(static_cast<Eigen::Index>(v)), x);
        if (!fit) return out;
        out.total_loglik += fit->loglik;
        out.total_k += fit->k_params;
        if (!parents.empty()) out.regressions.push_back({v, parents, std::move(*fit)});
    }

    for (const Edge& e : dag.edges()) {
        const auto reg = std::find_if(out.regressions.begin(), out.regressions.end(),
                                      [&](const NodeRegression& r) { return r.response == e.to; });
        const auto slot = std::find(reg->predictors.begin(), reg->predictors.end(), e.from) - reg->predictors.begin();
        const auto j = static_cast<Eigen::Index>(slot) + 1;
        out.paths.push_back({e, reg->fit.coefficients(j), reg->fit.standard_errors(j), reg->fit.t_values(j),
                             reg->fit.p_values[static_cast<std::size_t>(slot)]});
    }

    out.local = ci_local_tests(dag, cols, alpha);
    const auto claim_p = out.local.p_values();
    out.fisher = fishers_c(claim_p);
    out.global_p = out.fisher.p;
    out.converged = true;
    return out;
}

std::optional<Eigen::MatrixXd> implied_covariance(const Eigen::MatrixXd& b_matrix, const Eigen::MatrixXd& psi) {
    const Eigen::Index n = b_matrix.rows();
    if (b_matrix.cols() != n || psi.rows() != n || psi.cols() != n)
        throw std::invalid_argument("implied_covariance: dimension mismatch");
    const Eigen::MatrixXd i_minus_b = Eigen::MatrixXd::Identity(n, n) - b_matrix;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(i_minus_b);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::MatrixXd a = lu.inverse();
    const Eigen::MatrixXd sigma = a * psi * a.transpose();
    return (0.5 * (sigma + sigma.transpose())).eval();
}

namespace {

std::optional<double> log_det_pd(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
    if ((diag.array() <= 0.0).any()) return std::nullopt;
    return 2.0 * diag.array().log().sum();
}

}  // namespace

std::optional<double> fml(const Eigen::MatrixXd& sample_sigma, const Eigen::MatrixXd& implied_sigma) {
    const Eigen::Index p = sample_sigma.rows();
    if (sample_sigma.cols() != p || implied_sigma.rows() != p || implied_sigma.cols() != p)
        throw std::invalid_argument("fml: dimension mismatch");
    const Eigen::LLT<Eigen::MatrixXd> llt_s(sample_sigma);
    const Eigen::LLT<Eigen::MatrixXd> llt_sigma(implied_sigma);
    const auto ld_s = log_det_pd(llt_s);
    const auto ld_sigma = log_det_pd(llt_sigma);
    if (!ld_s || !ld_sigma) return std::nullopt;
    const double tr = llt_sigma.solve(sample_sigma).trace();
    const double f = *ld_sigma + tr - *ld_s - static_cast<double>(p);
    return std::max(f, 0.0);
}

Eigen::MatrixXd ml_covariance(const Eigen::MatrixXd& columns) {
    const Eigen::RowVectorXd mean = columns.colwise().mean();
    const Eigen::MatrixXd centered = columns.rowwise() - mean;
    return (centered.transpose() * centered) / static_cast<double>(columns.rows());
}

std::size_t covariance_parameter_count(const Dag& dag) { return dag.edge_count() + dag.size(); }

GlobalFit fit_global(const Dag& dag, const Dataset& data) {
    const Eigen::MatrixXd cols = columns_for(dag, data);
    const auto n = static_cast<Eigen::Index>(dag.size());
    GlobalFit g;
    g.n_obs = static_cast<std::size_t>(cols.rows());
    g.k_cov = covariance_parameter_count(dag);
    g.k_params = g.k_cov + dag.size();
    g.endogenous = dag.endogenous();
    const std::size_t moments = dag.size() * (dag.size() + 1) / 2;
    g.df = moments - g.k_cov;

    if (!enough_rows(dag, g.n_obs)) {
        g.failure = "sample size does not exceed the per-equation parameter count";
        return g;
    }
    g.sample_sigma = ml_covariance(cols);
    const Eigen::RowVectorXd mean = cols.colwise().mean();
    const Eigen::LLT<Eigen::MatrixXd> llt_s(g.sample_sigma);
    if (!log_det_pd(llt_s)) {
        g.failure = "sample covariance is not positive definite";
        return g;
    }

    g.b_matrix = Eigen::MatrixXd::Zero(n, n);
    g.psi = Eigen::MatrixXd::Zero(n, n);
    g.intercepts = Eigen::VectorXd::Zero(n);
    const double nd = static_cast<double>(g.n_obs);
    std::vector<std::vector<PathEstimate>> by_target(dag.size());

    for (NodeId v = 0; v < dag.size(); ++v) {
        const auto iv = static_cast<Eigen::Index>(v);
        const auto& parents = dag.parents(v);
        if (parents.empty()) {
            g.psi(iv, iv) = g.sample_sigma(iv, iv);
            g.intercepts(iv) = mean(iv);
            continue;
        }
        const auto k = static_cast<Eigen::Index>(parents.size());
        Eigen::MatrixXd s_pp(k, k);
        Eigen::VectorXd s_pv(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const auto pa = static_cast<Eigen::Index>(parents[static_cast<std::size_t>(a)]);
            s_pv(a) = g.sample_sigma(pa, iv);
            for (Eigen::Index b = 0; b < k; ++b)
                s_pp(a, b) = g.sample_sigma(pa, static_cast<Eigen::Index>(parents[static_cast<std::size_t>(b)]));
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(s_pp);
        if (llt.info() != Eigen::Success) {
            g.failure = "predictor covariance of '" + dag.name(v) + "' is singular";
            return g;
        }
        const Eigen::VectorXd beta = llt.solve(s_pv);
        const double resid = g.sample_sigma(iv, iv) - s_pv.dot(beta);
        if (!(resid > 0.0)) {
            g.failure = "non-positive residual variance for '" + dag.name(v) + "'";
            return g;
        }
        g.psi(iv, iv) = resid;
        const Eigen::VectorXd inv_diag = llt.solve(Eigen::MatrixXd::Identity(k, k)).diagonal();
        double intercept = mean(iv);
        for (Eigen::Index a = 0; a < k; ++a) {
            const NodeId from = parents[static_cast<std::size_t>(a)];
            g.b_matrix(iv, static_cast<Eigen::Index>(from)) = beta(a);
            intercept -= beta(a) * mean(static_cast<Eigen::Index>(from));
            PathEstimate pe{{from, v}, beta(a), std::sqrt(resid * inv_diag(a) / nd)};
            pe.statistic = pe.estimate / pe.se;
            pe.p = stats::normal_two_sided(pe.statistic);
            by_target[v].push_back(pe);
        }
        g.intercepts(iv) = intercept;
    }
    for (const Edge& e : dag.edges())
        for (const auto& pe : by_target[e.to])
            if (pe.edge == e) g.paths.push_back(pe);

    auto implied = implied_covariance(g.b_matrix, g.psi);
    if (!implied) {
        g.failure = "I - B is singular";
        return g;
    }
    g.implied_sigma = std::move(*implied);
    const auto f = fml(g.sample_sigma, g.implied_sigma);
    if (!f) {
        g.failure = "implied covariance is not positive definite";
        return g;
    }
    g.fml = *f;
    g.chi2 = (nd - 1.0) * g.fml;
    g.global_p = g.df == 0 ? 1.0 : stats::chi2_upper(g.chi2, static_cast<double>(g.df));

    for (NodeId v : g.endogenous) {
        const auto iv = static_cast<Eigen::Index>(v);
        g.endo_r2.push_back(1.0 - g.psi(iv, iv) / g.sample_sigma(iv, iv));
    }

    const Eigen::LLT<Eigen::MatrixXd> llt_sigma(g.implied_sigma);
    const double ld = *log_det_pd(llt_sigma);
    const double tr = llt_sigma.solve(g.sample_sigma).trace();
    g.loglik = -0.5 * nd * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + ld + tr);
    g.converged = true;
    return g;
}

void write_path_table(std::ostream& out, const Dag& dag, const std::vector<PathEstimate>& paths) {
    out << "response,predictor,estimate,se,statistic,p\n";
    for (const auto& p : paths)
        out << dag.name(p.edge.to) << ',' << dag.name(p.edge.from) << ',' << csv::format_number(p.estimate) << ','
            << csv::format_number(p.se) << ',' << csv::format_number(p.statistic) << ','
            << csv::format_number(p.p) << '\n';
}

namespace {

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

std::string summary_json(const Dag& dag, const PiecewiseFit& fit) {
    nlohmann::ordered_json j;
    j["fitter"] = "piecewise";
    j["converged"] = fit.converged;
    j["n_obs"] = fit.n_obs;
    j["statistic"] = {{"name", "fisher_c"}, {"value", number(fit.fisher.c)},
                      {"df", fit.fisher.df}, {"p", number(fit.global_p)}};
    nlohmann::ordered_json r2 = nlohmann::ordered_json::object();
    for (const auto& reg : fit.regressions)
        r2[dag.name(reg.response)] = {{"r2", number(reg.fit.r2)}, {"adj_r2", number(reg.fit.adj_r2)}};
    j["r2"] = r2;
    j["loglik"] = number(fit.total_loglik);
    j["k"] = fit.total_k;
    return j.dump(2);
}

std::string summary_json(const Dag& dag, const GlobalFit& fit) {
    nlohmann::ordered_json j;
    j["fitter"] = "global";
    j["converged"] = fit.converged;
    if (!fit.converged) j["failure"] = fit.failure;
    j["n_obs"] = fit.n_obs;
    j["statistic"] = {{"name", "chi2"}, {"value", number(fit.chi2)}, {"df", fit.df}, {"p", number(fit.global_p)}};
    nlohmann::ordered_json r2 = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < fit.endo_r2.size(); ++i) r2[dag.name(fit.endogenous[i])] = number(fit.endo_r2[i]);
    j["r2"] = r2;
    j["loglik"] = number(fit.loglik);
    j["k"] = fit.k_params;
    return j.dump(2);
}

}  // namespace semsim
