#include "semsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace semsim {

std::string_view to_string(IcMetric m) {
    switch (m) {
        case IcMetric::Aicc: return "aicc";
        case IcMetric::Bic: return "bic";
        case IcMetric::Hbic: return "hbic";
    }
    return "unknown";
}

double aic(double loglik, std::size_t k) { return -2.0 * loglik + 2.0 * static_cast<double>(k); }

double aicc(double loglik, std::size_t k, std::size_t n) {
    if (n <= k + 1) throw std::domain_error("aicc undefined for n <= k + 1");
    const double kd = static_cast<double>(k);
    return aic(loglik, k) + 2.0 * kd * (kd + 1.0) / static_cast<double>(n - k - 1);
}

double bic(double loglik, std::size_t k, std::size_t n) {
    return -2.0 * loglik + static_cast<double>(k) * std::log(static_cast<double>(n));
}

double hbic(double loglik, std::size_t k, std::size_t n, HbicOrientation orientation) {
    const double penalty = static_cast<double>(k) * std::log(static_cast<double>(n) / (2.0 * std::numbers::pi));
    return orientation == HbicOrientation::AsPrinted ? loglik - penalty : -2.0 * loglik + penalty;
}

std::optional<double> InformationCriteria::get(IcMetric m) const {
    switch (m) {
        case IcMetric::Aicc: return aicc;
        case IcMetric::Bic: return bic;
        case IcMetric::Hbic: return hbic;
    }
    return std::nullopt;
}

InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n, HbicOrientation orientation) {
    InformationCriteria ic;
    if (n > k + 1) ic.aicc = aicc(loglik, k, n);
    ic.bic = bic(loglik, k, n);
    ic.hbic = hbic(loglik, k, n, orientation);
    return ic;
}

bool acceptance(double global_p, bool converged, double alpha) { return converged && global_p > alpha; }

double prop_significant(std::span<const double> path_p_values, double alpha) {
    if (path_p_values.empty()) throw std::invalid_argument("prop_significant: no paths");
    const auto hits = std::count_if(path_p_values.begin(), path_p_values.end(), [&](double p) { return p < alpha; });
    return static_cast<double>(hits) / static_cast<double>(path_p_values.size());
}

namespace {

double clamped_mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return std::clamp(s / static_cast<double>(v.size()), 0.0, 1.0);
}

}  // namespace

double avg_r2(const PiecewiseFit& fit) {
    std::vector<double> v;
    for (const auto& r : fit.regressions) v.push_back(r.fit.adj_r2);
    return clamped_mean(v);
}

double avg_r2(const GlobalFit& fit) { return clamped_mean(fit.endo_r2); }

MetricBundle compute_metrics(const Dag&, const Dataset&, const PiecewiseFit& fit, const MetricOptions& opt) {
    MetricBundle b;
    b.n_obs = fit.n_obs;
    b.converged = fit.converged;
    if (!fit.converged) return b;
    b.global_p = fit.global_p;
    b.accepted = acceptance(fit.global_p, true, opt.alpha);
    const auto p = fit.path_p_values();
    b.prop_significant_paths = p.empty() ? 0.0 : prop_significant(p, opt.alpha);
    b.avg_r2 = avg_r2(fit);
    b.prop_ci_failed = fit.local.prop_failed;
    b.loglik = fit.total_loglik;
    b.k_params = fit.total_k;
    b.ic = information_criteria(b.loglik, b.k_params, b.n_obs, opt.hbic);
    return b;
}

MetricBundle compute_metrics(const Dag& dag, const Dataset& data, const GlobalFit& fit, const MetricOptions& opt) {
    MetricBundle b;
    b.n_obs = fit.n_obs;
    b.converged = fit.converged;
    if (!fit.converged) return b;
    b.global_p = fit.global_p;
    b.accepted = acceptance(fit.global_p, true, opt.alpha);
    const auto p = fit.path_p_values();
    b.prop_significant_paths = p.empty() ? 0.0 : prop_significant(p, opt.alpha);
    b.avg_r2 = avg_r2(fit);
    b.prop_ci_failed = ci_local_tests(dag, data, opt.alpha).prop_failed;
    b.loglik = fit.loglik;
    b.k_params = fit.k_params;
    b.ic = information_criteria(b.loglik, b.k_params, b.n_obs, opt.hbic);
    return b;
}

MetricBundle fit_and_measure(Fitter fitter, const Dag& dag, const Dataset& data, const MetricOptions& opt) {
    if (fitter == Fitter::Piecewise) return compute_metrics(dag, data, fit_piecewise(dag, data, opt.alpha), opt);
    return compute_metrics(dag, data, fit_global(dag, data), opt);
}

ScenarioSelection select_best(const std::map<ScenarioKind, double>& ic_by_scenario, double threshold) {
    if (ic_by_scenario.size() < 2) throw std::invalid_argument("select_best: need at least two scenarios");
    std::vector<std::pair<double, ScenarioKind>> sorted;
    for (const auto& [s, v] : ic_by_scenario) {
        if (!std::isfinite(v)) throw std::invalid_argument("select_best: information criteria must be finite");
        sorted.emplace_back(v, s);
    }
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    ScenarioSelection out;
    out.margin = sorted[1].first - sorted[0].first;
    if (out.margin > threshold) out.best = sorted[0].second;
    return out;
}

std::string_view to_string(DiagnosisLabel d) {
    switch (d) {
        case DiagnosisLabel::Respecify: return "re-specify";
        case DiagnosisLabel::NoSignal: return "no-real-signal";
        case DiagnosisLabel::Underfitting: return "underfitting-or-wrong-direction";
        case DiagnosisLabel::Acceptable: return "acceptable-check-overfitting";
        case DiagnosisLabel::RejectedUnclear: return "rejected-unclear";
    }
    return "unknown";
}

Diagnosis diagnose(const MetricBundle& b, const DiagnoseThresholds& t) {
    if (!b.converged)
        return {DiagnosisLabel::Respecify,
                "The fit did not converge; estimates are untrusted. Re-specify the model."};

    const bool accepted = acceptance(b.global_p, b.converged, t.alpha);
    const bool weak_paths = b.prop_significant_paths < t.low_prop_significant;
    const bool weak_r2 = b.avg_r2 < t.low_r2;
    if (accepted && weak_paths && weak_r2)
        return {DiagnosisLabel::NoSignal,
                "The global test accepts the model but few paths are significant and R-squares are low: "
                "no real signal was extracted from the data."};
    if (accepted)
        return {DiagnosisLabel::Acceptable,
                "Global fit is acceptable and the model carries signal. None of these checks guards against "
                "superfluous paths; compare against simpler candidates with BIC, especially for N > 100."};

    const bool many_paths = b.prop_significant_paths >= t.high_prop_significant;
    const bool ci_failures = b.prop_ci_failed > t.high_prop_ci_failed;
    const bool strong_r2 = b.avg_r2 >= t.high_r2;
    if (many_paths || ci_failures || strong_r2)
        return {DiagnosisLabel::Underfitting,
                "The global test rejects the model while the data carry signal (significant paths, failed "
                "independence claims and/or large R-squares): look for missing relationships or reversed "
                "directions, guided by the failed local tests."};
    return {DiagnosisLabel::RejectedUnclear,
            "The global test rejects the model and the local evidence is weak; revisit the model structure "
            "and collect more data if possible."};
}

}  // namespace semsim
