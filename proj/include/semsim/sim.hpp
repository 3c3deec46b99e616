#pragma once

#include "semsim/datagen.hpp"
#include "semsim/fit.hpp"
#include "semsim/graph.hpp"
#include "semsim/metrics.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace semsim::sim {

/// Knobs shared by every parameter set of a run.
struct Settings {
    double connectance = 0.3;
    ConnectanceBase connectance_base = ConnectanceBase::Square;
    double shuffle_fraction = 0.25;
    double modify_fraction = 0.25;
    UniformLaw exogenous_law{};
    double alpha = 0.05;
    double ic_threshold = 2.0;
    HbicOrientation hbic = HbicOrientation::LowerIsBetter;
    std::uint64_t master_seed = 1;
};

struct ParameterSet {
    int batch = 1;
    std::size_t set_id = 0;
    std::size_t n_samples = 0;
    std::size_t n_cov = 0;
    ScenarioKind scenario = ScenarioKind::Exact;  // batch 1 only
    Fitter fitter = Fitter::Piecewise;
    double sd_eff = 2.5;
    double sd_res = 1.0;
    std::size_t replicates = 100;
};

inline const std::vector<std::size_t> kDefaultSampleSizes{20, 40, 60, 80, 100, 200, 500, 1000, 5000, 10000};
inline const std::vector<std::size_t> kDefaultCovariates{5, 7, 10};
inline const std::vector<double> kDefaultSdEff{1.0, 2.5, 5.0};
inline const std::vector<double> kDefaultSdRes{0.5, 1.0, 2.5};
inline constexpr double kRandomScenarioSdEff = 2.5;

/// Restrictions of the default grid; unset axes keep every default level.
struct GridOverrides {
    std::optional<std::vector<std::size_t>> n_samples;
    std::optional<std::vector<std::size_t>> n_cov;
    std::optional<std::vector<ScenarioKind>> scenarios;
    std::optional<std::vector<Fitter>> fitters;
    std::optional<std::vector<double>> sd_eff;
    std::optional<std::vector<double>> sd_res;
};

/// Reduced grid used for minutes-scale runs.
GridOverrides desk_grid();

/// Cartesian grid in a fixed order (sd_res, sd_eff, n_cov, scenario, fitter, n_samples).
/// The Random scenario keeps a single signal level.
std::vector<ParameterSet> expand_grid(int batch, const GridOverrides& overrides = {}, std::size_t replicates = 100);

/// Independent stream for replicate `replicate` of `set`. The fitter is not part
/// of the key, so both fitters see identical data for matching sets.
Rng replicate_rng(std::uint64_t master_seed, const ParameterSet& set, std::size_t replicate);

struct Batch1Replicate {
    std::size_t set_id = 0;
    std::size_t replicate = 0;
    bool failed = false;  // an exception escaped the replicate
    std::string error;
    MetricBundle bundle;
    std::size_t model_edges = 0;
    std::size_t generating_edges = 0;
};

/// Per-scenario slots of a selection tally; the last slot counts "no best scenario".
inline constexpr ScenarioKind kSelectionScenarios[] = {ScenarioKind::Exact, ScenarioKind::Shuffled,
                                                        ScenarioKind::Overspecified, ScenarioKind::Underspecified};
inline constexpr std::size_t kSelectionSlots = 5;
inline constexpr std::size_t kNoneSlot = 4;

std::size_t selection_slot(std::optional<ScenarioKind> best);

struct Batch2Replicate {
    std::size_t set_id = 0;
    std::size_t replicate = 0;
    bool failed = false;
    std::string error;
    bool flagged = false;  // some fit did not converge or some criterion was undefined
    std::array<ScenarioSelection, 3> selection{};  // indexed like kAllIcMetrics
    std::array<InformationCriteria, 4> ic{};       // indexed like kSelectionScenarios
    std::array<bool, 4> converged{};
};

Batch1Replicate run_batch1_replicate(const ParameterSet& set, std::size_t replicate, const Settings& settings);
Batch2Replicate run_batch2_replicate(const ParameterSet& set, std::size_t replicate, const Settings& settings);

struct MetricSummary {
    ParameterSet set;
    std::size_t n_effective = 0;
    std::size_t n_failed = 0;
    std::size_t n_nonconverged = 0;
    double prop_accepted = 0.0;
    double prop_significant_paths = 0.0;  // means over converged replicates, NaN if none
    double avg_r2 = 0.0;
    double prop_ci_failed = 0.0;
};

struct SelectionSummary {
    ParameterSet set;
    std::size_t n_effective = 0;
    std::size_t n_failed = 0;
    std::size_t n_flagged = 0;
    std::array<std::array<double, kSelectionSlots>, 3> prop_best{};  // [metric][slot]
};

MetricSummary summarize(const ParameterSet& set, const std::vector<Batch1Replicate>& reps);
SelectionSummary summarize(const ParameterSet& set, const std::vector<Batch2Replicate>& reps);

struct Batch1Result {
    std::vector<MetricSummary> rows;
    std::vector<Batch1Replicate> raw;  // ordered by (set, replicate)
};

struct Batch2Result {
    std::vector<SelectionSummary> rows;
    std::vector<Batch2Replicate> raw;
};

/// `workers` = 0 uses the hardware concurrency.
Batch1Result run_batch1(const std::vector<ParameterSet>& sets, const Settings& settings, std::size_t workers = 1);
Batch2Result run_batch2(const std::vector<ParameterSet>& sets, const Settings& settings, std::size_t workers = 1);

void write_results_csv(std::ostream& out, const Batch1Result& result);
void write_results_csv(std::ostream& out, const Batch2Result& result);
void write_raw_csv(std::ostream& out, const Batch1Result& result);
void write_raw_csv(std::ostream& out, const Batch2Result& result);

std::vector<std::string> results_header(int batch);

}  // namespace semsim::sim
