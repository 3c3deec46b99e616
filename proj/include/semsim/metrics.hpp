#pragma once

#include "semsim/fit.hpp"
#include "semsim/graph.hpp"
#include "semsim/independence.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>

namespace semsim {

enum class HbicOrientation {
    LowerIsBetter,  // -2 logl + K ln(N / 2pi)
    AsPrinted,      // logl - K ln(N / 2pi)
};

enum class IcMetric { Aicc, Bic, Hbic };

inline constexpr IcMetric kAllIcMetrics[] = {IcMetric::Aicc, IcMetric::Bic, IcMetric::Hbic};

std::string_view to_string(IcMetric m);

double aic(double loglik, std::size_t k);
/// Throws std::domain_error when n <= k + 1.
double aicc(double loglik, std::size_t k, std::size_t n);
double bic(double loglik, std::size_t k, std::size_t n);
double hbic(double loglik, std::size_t k, std::size_t n,
            HbicOrientation orientation = HbicOrientation::LowerIsBetter);

/// Criteria of one fitted model. aicc is empty when undefined for (k, n).
struct InformationCriteria {
    std::optional<double> aicc;
    double bic = 0.0;
    double hbic = 0.0;

    std::optional<double> get(IcMetric m) const;
};

InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n,
                                         HbicOrientation orientation = HbicOrientation::LowerIsBetter);

struct MetricBundle {
    bool converged = false;
    bool accepted = false;
    double global_p = 0.0;
    double prop_significant_paths = 0.0;
    double avg_r2 = 0.0;
    double prop_ci_failed = 0.0;
    double loglik = 0.0;
    std::size_t k_params = 0;
    std::size_t n_obs = 0;
    InformationCriteria ic;
};

bool acceptance(double global_p, bool converged, double alpha = 0.05);

/// Fraction of p-values strictly below alpha; throws on an empty list.
double prop_significant(std::span<const double> path_p_values, double alpha = 0.05);

/// Mean adjusted R-square of the component regressions, clamped to [0, 1].
double avg_r2(const PiecewiseFit& fit);
/// Mean R-square of the endogenous variables, clamped to [0, 1].
double avg_r2(const GlobalFit& fit);

struct MetricOptions {
    double alpha = 0.05;
    HbicOrientation hbic = HbicOrientation::LowerIsBetter;
};

MetricBundle compute_metrics(const Dag& dag, const Dataset& data, const PiecewiseFit& fit,
                             const MetricOptions& opt = {});
MetricBundle compute_metrics(const Dag& dag, const Dataset& data, const GlobalFit& fit,
                             const MetricOptions& opt = {});

/// Fit `dag` to `data` with the chosen fitter and derive the metric bundle.
MetricBundle fit_and_measure(Fitter fitter, const Dag& dag, const Dataset& data,
                             const MetricOptions& opt = {});

struct ScenarioSelection {
    std::optional<ScenarioKind> best;
    double margin = 0.0;  // second lowest minus lowest
};

/// Labels the lowest-IC scenario when it beats the runner-up by more than `threshold`.
ScenarioSelection select_best(const std::map<ScenarioKind, double>& ic_by_scenario, double threshold = 2.0);

enum class DiagnosisLabel {
    Respecify,
    NoSignal,
    Underfitting,
    Acceptable,
    RejectedUnclear,
};

std::string_view to_string(DiagnosisLabel d);

struct Diagnosis {
    DiagnosisLabel label;
    std::string advice;
};

/// Cut-offs for the post-fit decision rules; all are configurable defaults.
struct DiagnoseThresholds {
    double alpha = 0.05;
    double low_prop_significant = 0.25;
    double low_r2 = 0.1;
    double high_prop_significant = 0.5;
    double high_prop_ci_failed = 0.25;
    double high_r2 = 0.5;
};

Diagnosis diagnose(const MetricBundle& bundle, const DiagnoseThresholds& thresholds = {});

}  // namespace semsim
