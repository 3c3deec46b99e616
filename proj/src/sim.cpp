#include "semsim/sim.hpp"

#include "semsim/csv.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace semsim::sim {

namespace {

template <class T>
std::vector<T> checked_axis(const std::optional<std::vector<T>>& override_levels, const std::vector<T>& defaults,
                            const char* axis) {
    if (!override_levels) return defaults;
    if (override_levels->empty()) throw std::invalid_argument(std::string("empty grid axis: ") + axis);
    std::vector<T> out;
    for (const T& v : defaults)
        if (std::find(override_levels->begin(), override_levels->end(), v) != override_levels->end()) out.push_back(v);
    for (const T& v : *override_levels)
        if (std::find(defaults.begin(), defaults.end(), v) == defaults.end())
            throw std::invalid_argument(std::string("grid override outside the default levels on axis ") + axis);
    return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

// Runs fn(i) for i in [0, count) on a bounded pool; results land at their own index.
template <class Result, class Fn>
std::vector<Result> run_indexed(std::size_t count, std::size_t workers, Fn fn) {
    std::vector<Result> out(count);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(count, 1));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) out[i] = fn(i);
    };
    if (workers == 1) {
        work();
        return out;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
    return out;
}

void require_replicates(const std::vector<ParameterSet>& sets) {
    for (const auto& s : sets)
        if (s.replicates == 0) throw std::invalid_argument("parameter set needs at least one replicate");
}

std::size_t selection_index(IcMetric m) {
    return static_cast<std::size_t>(std::find(std::begin(kAllIcMetrics), std::end(kAllIcMetrics), m) -
                                    std::begin(kAllIcMetrics));
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

GridOverrides desk_grid() {
    GridOverrides g;
    g.n_samples = std::vector<std::size_t>{20, 100, 1000, 10000};
    g.n_cov = std::vector<std::size_t>{5, 10};
    g.sd_eff = std::vector<double>{2.5};
    g.sd_res = std::vector<double>{1.0};
    return g;
}

std::vector<ParameterSet> expand_grid(int batch, const GridOverrides& o, std::size_t replicates) {
    if (batch != 1 && batch != 2) throw std::invalid_argument("batch must be 1 or 2");
    const auto n_samples = checked_axis(o.n_samples, kDefaultSampleSizes, "n_samples");
    const auto n_cov = checked_axis(o.n_cov, kDefaultCovariates, "n_cov");
    const auto sd_eff = checked_axis(o.sd_eff, kDefaultSdEff, "sd_eff");
    const auto sd_res = checked_axis(o.sd_res, kDefaultSdRes, "sd_res");
    const auto fitters = checked_axis(o.fitters, std::vector<Fitter>{Fitter::Piecewise, Fitter::Global}, "fitter");
    std::vector<ScenarioKind> scenarios{ScenarioKind::Exact};
    if (batch == 1)
        scenarios = checked_axis(o.scenarios, std::vector<ScenarioKind>(std::begin(kAllScenarios), std::end(kAllScenarios)),
                                 "scenario");

    const bool has_default_signal = std::find(sd_eff.begin(), sd_eff.end(), kRandomScenarioSdEff) != sd_eff.end();
    const double random_sd_eff = has_default_signal ? kRandomScenarioSdEff : sd_eff.front();

    std::vector<ParameterSet> out;
    for (double res : sd_res)
        for (double eff : sd_eff)
            for (std::size_t cov : n_cov)
                for (ScenarioKind sc : scenarios) {
                    if (batch == 1 && sc == ScenarioKind::Random && eff != random_sd_eff) continue;
                    for (Fitter f : fitters)
                        for (std::size_t n : n_samples) {
                            ParameterSet p;
                            p.batch = batch;
                            p.set_id = out.size();
                            p.n_samples = n;
                            p.n_cov = cov;
                            p.scenario = sc;
                            p.fitter = f;
                            p.sd_eff = eff;
                            p.sd_res = res;
                            p.replicates = replicates;
                            out.push_back(p);
                        }
                }
    if (out.empty()) throw std::invalid_argument("empty parameter grid");
    return out;
}

Rng replicate_rng(std::uint64_t master_seed, const ParameterSet& set, std::size_t replicate) {
    std::uint64_t h = splitmix64(master_seed);
    h = mix(h, static_cast<std::uint64_t>(set.batch));
    h = mix(h, set.n_samples);
    h = mix(h, set.n_cov);
    h = mix(h, static_cast<std::uint64_t>(set.batch == 1 ? set.scenario : ScenarioKind::Exact));
    h = mix(h, std::bit_cast<std::uint64_t>(set.sd_eff));
    h = mix(h, std::bit_cast<std::uint64_t>(set.sd_res));
    h = mix(h, replicate);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

std::size_t selection_slot(std::optional<ScenarioKind> best) {
    if (!best) return kNoneSlot;
    for (std::size_t i = 0; i < 4; ++i)
        if (kSelectionScenarios[i] == *best) return i;
    return kNoneSlot;
}

Batch1Replicate run_batch1_replicate(const ParameterSet& set, std::size_t replicate, const Settings& settings) {
    Batch1Replicate out;
    out.set_id = set.set_id;
    out.replicate = replicate;
    try {
        Rng rng = replicate_rng(settings.master_seed, set, replicate);
        const Dag model = random_dag(set.n_cov, settings.connectance, rng, settings.connectance_base);
        GenerationRecipe recipe{model,           set.scenario,        set.sd_eff, set.sd_res, settings.shuffle_fraction,
                                settings.modify_fraction, settings.exogenous_law};
        const ScenarioData sd = generate_scenario(recipe, set.n_samples, rng);
        out.model_edges = model.edge_count();
        out.generating_edges = sd.generating_dag.edge_count();
        out.bundle = fit_and_measure(set.fitter, model, sd.data, {settings.alpha, settings.hbic});
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    return out;
}

Batch2Replicate run_batch2_replicate(const ParameterSet& set, std::size_t replicate, const Settings& settings) {
    Batch2Replicate out;
    out.set_id = set.set_id;
    out.replicate = replicate;
    try {
        Rng rng = replicate_rng(settings.master_seed, set, replicate);
        const Dag truth = random_dag(set.n_cov, settings.connectance, rng, settings.connectance_base);
        const WeightedDag process = draw_coefficients(truth, set.sd_eff, set.sd_res, rng, settings.exogenous_law);
        const Dataset data = generate(process, set.n_samples, rng);

        // The data stay exact; the fitted structures carry the misspecification.
        const std::array<Dag, 4> models{truth, shuffle_edges(truth, settings.shuffle_fraction, rng),
                                        add_edges(truth, settings.modify_fraction, rng),
                                        drop_edges(truth, settings.modify_fraction, rng)};
        const MetricOptions opt{settings.alpha, settings.hbic};
        for (std::size_t i = 0; i < models.size(); ++i) {
            const MetricBundle b = fit_and_measure(set.fitter, models[i], data, opt);
            out.converged[i] = b.converged;
            out.ic[i] = b.ic;
        }
        const bool all_converged = std::all_of(out.converged.begin(), out.converged.end(), [](bool c) { return c; });
        if (!all_converged) out.flagged = true;
        for (IcMetric m : kAllIcMetrics) {
            if (!all_converged) continue;
            std::map<ScenarioKind, double> values;
            bool defined = true;
            for (std::size_t i = 0; i < 4; ++i) {
                auto v = out.ic[i].get(m);
                if (!v || !std::isfinite(*v)) {
                    defined = false;
                    break;
                }
                values[kSelectionScenarios[i]] = *v;
            }
            if (!defined) {
                out.flagged = true;
                continue;
            }
            out.selection[selection_index(m)] = select_best(values, settings.ic_threshold);
        }
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    return out;
}

MetricSummary summarize(const ParameterSet& set, const std::vector<Batch1Replicate>& reps) {
    if (reps.empty()) throw std::invalid_argument("summarize: no replicates");
    MetricSummary s{set};
    std::size_t accepted = 0, converged = 0;
    double sig = 0.0, r2 = 0.0, ci = 0.0;
    for (const auto& r : reps) {
        if (r.failed) {
            ++s.n_failed;
            continue;
        }
        ++s.n_effective;
        if (!r.bundle.converged) {
            ++s.n_nonconverged;
            continue;
        }
        ++converged;
        accepted += r.bundle.accepted ? 1 : 0;
        sig += r.bundle.prop_significant_paths;
        r2 += r.bundle.avg_r2;
        ci += r.bundle.prop_ci_failed;
    }
    s.prop_accepted = s.n_effective ? double(accepted) / double(s.n_effective) : nan();
    s.prop_significant_paths = converged ? sig / double(converged) : nan();
    s.avg_r2 = converged ? r2 / double(converged) : nan();
    s.prop_ci_failed = converged ? ci / double(converged) : nan();
    return s;
}

SelectionSummary summarize(const ParameterSet& set, const std::vector<Batch2Replicate>& reps) {
    if (reps.empty()) throw std::invalid_argument("summarize: no replicates");
    SelectionSummary s{set};
    std::array<std::array<std::size_t, kSelectionSlots>, 3> counts{};
    for (const auto& r : reps) {
        if (r.failed) {
            ++s.n_failed;
            continue;
        }
        ++s.n_effective;
        s.n_flagged += r.flagged ? 1 : 0;
        for (std::size_t m = 0; m < 3; ++m) ++counts[m][selection_slot(r.selection[m].best)];
    }
    for (std::size_t m = 0; m < 3; ++m)
        for (std::size_t k = 0; k < kSelectionSlots; ++k)
            s.prop_best[m][k] = s.n_effective ? double(counts[m][k]) / double(s.n_effective) : nan();
    return s;
}

namespace {

struct Task {
    std::size_t set;
    std::size_t replicate;
};

std::vector<Task> tasks_for(const std::vector<ParameterSet>& sets) {
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < sets.size(); ++s)
        for (std::size_t r = 0; r < sets[s].replicates; ++r) tasks.push_back({s, r});
    return tasks;
}

template <class Summary, class Rep>
std::vector<Summary> summarize_all(const std::vector<ParameterSet>& sets, const std::vector<Rep>& raw) {
    std::vector<Summary> rows;
    std::size_t at = 0;
    for (const auto& s : sets) {
        std::vector<Rep> chunk(raw.begin() + static_cast<std::ptrdiff_t>(at),
                               raw.begin() + static_cast<std::ptrdiff_t>(at + s.replicates));
        at += s.replicates;
        rows.push_back(summarize(s, chunk));
    }
    return rows;
}

}  // namespace

Batch1Result run_batch1(const std::vector<ParameterSet>& sets, const Settings& settings, std::size_t workers) {
    require_replicates(sets);
    const auto tasks = tasks_for(sets);
    Batch1Result res;
    res.raw = run_indexed<Batch1Replicate>(tasks.size(), workers, [&](std::size_t i) {
        return run_batch1_replicate(sets[tasks[i].set], tasks[i].replicate, settings);
    });
    res.rows = summarize_all<MetricSummary>(sets, res.raw);
    return res;
}

Batch2Result run_batch2(const std::vector<ParameterSet>& sets, const Settings& settings, std::size_t workers) {
    require_replicates(sets);
    const auto tasks = tasks_for(sets);
    Batch2Result res;
    res.raw = run_indexed<Batch2Replicate>(tasks.size(), workers, [&](std::size_t i) {
        return run_batch2_replicate(sets[tasks[i].set], tasks[i].replicate, settings);
    });
    res.rows = summarize_all<SelectionSummary>(sets, res.raw);
    return res;
}

std::vector<std::string> results_header(int batch) {
    if (batch == 1)
        return {"batch",       "set_id",     "n_samples",      "n_cov",         "scenario",
                "fitter",      "sd_eff",     "sd_res",         "replicates",    "n_effective",
                "n_failed",    "n_nonconverged", "prop_accepted", "prop_significant_paths", "avg_r2",
                "prop_ci_failed"};
    std::vector<std::string> h{"batch",  "set_id",     "n_samples",   "n_cov",    "fitter",   "sd_eff",
                               "sd_res", "replicates", "n_effective", "n_failed", "n_flagged"};
    for (IcMetric m : kAllIcMetrics) {
        for (ScenarioKind s : kSelectionScenarios) h.push_back(std::string(to_string(m)) + "_" + std::string(to_string(s)));
        h.push_back(std::string(to_string(m)) + "_none");
    }
    return h;
}

namespace {

void write_header(std::ostream& out, const std::vector<std::string>& h) {
    for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
    out << '\n';
}

std::string quoted(const std::string& text) {
    std::string q = "\"";
    for (char c : text) {
        if (c == '"') q += '"';
        q += (c == '\n' || c == '\r') ? ' ' : c;
    }
    return q + '"';
}

using csv::format_number;

}  // namespace

void write_results_csv(std::ostream& out, const Batch1Result& result) {
    write_header(out, results_header(1));
    for (const auto& r : result.rows) {
        const auto& p = r.set;
        out << 1 << ',' << p.set_id << ',' << p.n_samples << ',' << p.n_cov << ',' << to_string(p.scenario) << ','
            << to_string(p.fitter) << ',' << format_number(p.sd_eff) << ',' << format_number(p.sd_res) << ','
            << p.replicates << ',' << r.n_effective << ',' << r.n_failed << ',' << r.n_nonconverged << ','
            << format_number(r.prop_accepted) << ',' << format_number(r.prop_significant_paths) << ','
            << format_number(r.avg_r2) << ',' << format_number(r.prop_ci_failed) << '\n';
    }
}

void write_results_csv(std::ostream& out, const Batch2Result& result) {
    write_header(out, results_header(2));
    for (const auto& r : result.rows) {
        const auto& p = r.set;
        out << 2 << ',' << p.set_id << ',' << p.n_samples << ',' << p.n_cov << ',' << to_string(p.fitter) << ','
            << format_number(p.sd_eff) << ',' << format_number(p.sd_res) << ',' << p.replicates << ','
            << r.n_effective << ',' << r.n_failed << ',' << r.n_flagged;
        for (std::size_t m = 0; m < 3; ++m)
            for (std::size_t k = 0; k < kSelectionSlots; ++k) out << ',' << format_number(r.prop_best[m][k]);
        out << '\n';
    }
}

void write_raw_csv(std::ostream& out, const Batch1Result& result) {
    out << "set_id,replicate,status,model_edges,generating_edges,converged,accepted,global_p,"
           "prop_significant_paths,avg_r2,prop_ci_failed,loglik,k,aicc,bic,hbic,error\n";
    for (const auto& r : result.raw) {
        const auto& b = r.bundle;
        out << r.set_id << ',' << r.replicate << ',' << (r.failed ? "failed" : "ok") << ',' << r.model_edges << ','
            << r.generating_edges << ',' << b.converged << ',' << b.accepted << ',' << format_number(b.global_p) << ','
            << format_number(b.prop_significant_paths) << ',' << format_number(b.avg_r2) << ','
            << format_number(b.prop_ci_failed) << ',' << format_number(b.loglik) << ',' << b.k_params << ','
            << format_number(b.ic.aicc.value_or(nan())) << ',' << format_number(b.ic.bic) << ','
            << format_number(b.ic.hbic) << ',' << quoted(r.error) << '\n';
    }
}

void write_raw_csv(std::ostream& out, const Batch2Result& result) {
    out << "set_id,replicate,status,flagged";
    for (IcMetric m : kAllIcMetrics) out << ',' << to_string(m) << "_best," << to_string(m) << "_margin";
    for (ScenarioKind s : kSelectionScenarios)
        for (IcMetric m : kAllIcMetrics) out << ',' << to_string(m) << '_' << to_string(s);
    out << ",error\n";
    for (const auto& r : result.raw) {
        out << r.set_id << ',' << r.replicate << ',' << (r.failed ? "failed" : "ok") << ',' << r.flagged;
        for (std::size_t m = 0; m < 3; ++m) {
            const auto& sel = r.selection[m];
            out << ',' << (sel.best ? to_string(*sel.best) : "none") << ',' << format_number(sel.margin);
        }
        for (std::size_t i = 0; i < 4; ++i)
            for (IcMetric m : kAllIcMetrics) out << ',' << format_number(r.ic[i].get(m).value_or(nan()));
        out << ',' << quoted(r.error) << '\n';
    }
}

}  // namespace semsim::sim
