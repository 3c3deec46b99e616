#include "semsim/cli.hpp"

#include "semsim/csv.hpp"
#include "semsim/datagen.hpp"
#include "semsim/figure.hpp"
#include "semsim/fit.hpp"
#include "semsim/graph.hpp"
#include "semsim/independence.hpp"
#include "semsim/metrics.hpp"
#include "semsim/sim.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#ifndef SEMSIM_VERSION
#define SEMSIM_VERSION "0.0.0"
#endif

namespace semsim::cli {

namespace {

using json = nlohmann::ordered_json;
using csv::format_number;

/// Bad flags, unreadable inputs or malformed files.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    return f;
}

void close_output(std::ofstream& f, const std::string& path) {
    f.close();
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
    return path.substr(0, dot) + suffix;
}

template <class T, class F>
std::vector<T> convert_all(const std::vector<std::string>& texts, F parse) {
    std::vector<T> out;
    for (const auto& t : texts) {
        try {
            out.push_back(parse(t));
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    return out;
}

ConnectanceBase parse_base(const std::string& text) {
    if (text == "square") return ConnectanceBase::Square;
    if (text == "pairs") return ConnectanceBase::Pairs;
    throw UsageError("connectance base must be 'square' or 'pairs'");
}

Rng seeded_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

json versions() {
    return {{"semsim", SEMSIM_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"cli11", CLI11_VERSION}};
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    int batch = 1;
    std::string preset = "paper-defaults";
    std::uint64_t seed = 1;
    std::size_t replicates = 100;
    std::size_t workers = 0;
    std::string out = "results.csv";
    bool hbic_as_printed = false;
    bool emit_raw = false;
    std::vector<std::size_t> n, n_cov;
    std::vector<std::string> scenario, fitter;
    std::vector<double> sd_eff, sd_res;
    double alpha = 0.05;
    double connectance = 0.3;
    std::string connectance_base = "square";
    double ic_threshold = 2.0;
    double shuffle_fraction = 0.25;
    double modify_fraction = 0.25;
};

template <class T>
json unique_axis(const std::vector<sim::ParameterSet>& sets, T (*get)(const sim::ParameterSet&)) {
    std::vector<T> seen;
    for (const auto& s : sets)
        if (std::find(seen.begin(), seen.end(), get(s)) == seen.end()) seen.push_back(get(s));
    json a = json::array();
    for (const auto& v : seen) a.push_back(v);
    return a;
}

json grid_json(const std::vector<sim::ParameterSet>& sets, int batch) {
    json g;
    g["n_samples"] = unique_axis<std::size_t>(sets, [](const sim::ParameterSet& s) { return s.n_samples; });
    g["n_cov"] = unique_axis<std::size_t>(sets, [](const sim::ParameterSet& s) { return s.n_cov; });
    if (batch == 1)
        g["scenario"] = unique_axis<std::string>(
            sets, [](const sim::ParameterSet& s) { return std::string(to_string(s.scenario)); });
    g["fitter"] =
        unique_axis<std::string>(sets, [](const sim::ParameterSet& s) { return std::string(to_string(s.fitter)); });
    g["sd_eff"] = unique_axis<double>(sets, [](const sim::ParameterSet& s) { return s.sd_eff; });
    g["sd_res"] = unique_axis<double>(sets, [](const sim::ParameterSet& s) { return s.sd_res; });
    return g;
}

template <class Rep>
json failure_report(const std::vector<Rep>& raw) {
    std::map<std::size_t, std::pair<std::size_t, std::vector<std::string>>> by_set;
    for (const auto& r : raw) {
        if (!r.failed) continue;
        auto& [count, errors] = by_set[r.set_id];
        ++count;
        if (errors.size() < 5 && std::find(errors.begin(), errors.end(), r.error) == errors.end())
            errors.push_back(r.error);
    }
    json a = json::array();
    for (const auto& [id, entry] : by_set)
        a.push_back({{"set_id", id}, {"n_failed", entry.first}, {"errors", entry.second}});
    return a;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    if (a.batch != 1 && a.batch != 2) throw UsageError("--batch must be 1 or 2");
    if (a.replicates < 1) throw UsageError("--replicates must be at least 1");

    sim::GridOverrides grid;
    if (a.preset == "desk") grid = sim::desk_grid();
    else if (a.preset != "paper-defaults") throw UsageError("unknown preset '" + a.preset + "'");
    if (!a.n.empty()) grid.n_samples = a.n;
    if (!a.n_cov.empty()) grid.n_cov = a.n_cov;
    if (!a.sd_eff.empty()) grid.sd_eff = a.sd_eff;
    if (!a.sd_res.empty()) grid.sd_res = a.sd_res;
    if (!a.scenario.empty()) grid.scenarios = convert_all<ScenarioKind>(a.scenario, parse_scenario);
    if (!a.fitter.empty()) grid.fitters = convert_all<Fitter>(a.fitter, parse_fitter);

    sim::Settings st;
    st.connectance = a.connectance;
    st.connectance_base = parse_base(a.connectance_base);
    st.shuffle_fraction = a.shuffle_fraction;
    st.modify_fraction = a.modify_fraction;
    st.alpha = a.alpha;
    st.ic_threshold = a.ic_threshold;
    st.hbic = a.hbic_as_printed ? HbicOrientation::AsPrinted : HbicOrientation::LowerIsBetter;
    st.master_seed = a.seed;

    std::vector<sim::ParameterSet> sets;
    try {
        sets = sim::expand_grid(a.batch, grid, a.replicates);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    // Open outputs before spending time on the run.
    auto results = open_output(a.out);
    const std::string manifest_path = a.out + ".manifest.json";
    auto manifest = open_output(manifest_path);
    const std::string raw_path = with_suffix(a.out, ".raw.csv");
    std::ofstream raw;
    if (a.emit_raw) raw = open_output(raw_path);

    const auto t0 = std::chrono::steady_clock::now();
    json failures;
    if (a.batch == 1) {
        const auto r = sim::run_batch1(sets, st, a.workers);
        sim::write_results_csv(results, r);
        if (a.emit_raw) sim::write_raw_csv(raw, r);
        failures = failure_report(r.raw);
    } else {
        const auto r = sim::run_batch2(sets, st, a.workers);
        sim::write_results_csv(results, r);
        if (a.emit_raw) sim::write_raw_csv(raw, r);
        failures = failure_report(r.raw);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    close_output(results, a.out);
    if (a.emit_raw) close_output(raw, raw_path);

    json m;
    m["command"] = "simulate";
    m["versions"] = versions();
    m["batch"] = a.batch;
    m["preset"] = a.preset;
    m["seed"] = a.seed;
    m["replicates"] = a.replicates;
    m["workers"] = a.workers;
    m["parameter_sets"] = sets.size();
    m["grid"] = grid_json(sets, a.batch);
    m["settings"] = {{"alpha", st.alpha},
                     {"connectance", st.connectance},
                     {"connectance_base", a.connectance_base},
                     {"shuffle_fraction", st.shuffle_fraction},
                     {"modify_fraction", st.modify_fraction},
                     {"ic_threshold", st.ic_threshold},
                     {"hbic", a.hbic_as_printed ? "as-printed" : "lower-is-better"}};
    m["outputs"] = {{"results", a.out}};
    if (a.emit_raw) m["outputs"]["raw"] = raw_path;
    m["wall_seconds"] = wall;
    m["failures"] = failures;
    manifest << m.dump(2) << '\n';
    close_output(manifest, manifest_path);

    out << "wrote " << sets.size() << " parameter sets to " << a.out << " (" << format_number(wall) << " s)\n";
    return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::string model, data, fitter = "piecewise", json_out;
    double alpha = 0.05;
    bool hbic_as_printed = false;
};

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void print_claims(std::ostream& out, const Dag& dag, const LocalTests& local) {
    out << "\nindependence claims\nx,y,given,r,z,p,failed\n";
    for (const auto& t : local.tests) {
        std::string given;
        for (NodeId v : t.claim.conditioning_set) given += (given.empty() ? "" : " ") + dag.name(v);
        out << dag.name(t.claim.x) << ',' << dag.name(t.claim.y) << ',' << given << ',' << format_number(t.r) << ','
            << format_number(t.z) << ',' << format_number(t.p) << ',' << yes_no(t.failed)
            << (t.degenerate ? " (degenerate)" : "") << '\n';
    }
    if (local.tests.empty()) out << "(none: the model is saturated)\n";
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    Dag dag;
    Dataset data;
    Fitter fitter{};
    try {
        fitter = parse_fitter(a.fitter);
        dag = read_model_spec(a.model);
        data = read_csv(a.data);
        columns_for(dag, data);
    } catch (const ModelSpecError& e) {
        throw UsageError(a.model + ": " + e.what());
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    const MetricOptions opt{a.alpha, a.hbic_as_printed ? HbicOrientation::AsPrinted : HbicOrientation::LowerIsBetter};
    out << "fitter: " << to_string(fitter) << "\nmodel: " << dag.size() << " nodes, " << dag.edge_count()
        << " paths, N = " << data.rows() << "\n";

    MetricBundle bundle;
    std::string summary;
    if (fitter == Fitter::Piecewise) {
        const PiecewiseFit fit = fit_piecewise(dag, data, a.alpha);
        bundle = compute_metrics(dag, data, fit, opt);
        if (fit.converged) {
            out << "\npaths\n";
            write_path_table(out, dag, fit.paths);
            out << "\nglobal test\nFisher's C = " << format_number(fit.fisher.c) << " on " << fit.fisher.df
                << " df, p = " << format_number(fit.global_p) << '\n';
            out << "\nr-squared\nresponse,r2,adj_r2\n";
            for (const auto& r : fit.regressions)
                out << dag.name(r.response) << ',' << format_number(r.fit.r2) << ',' << format_number(r.fit.adj_r2)
                    << '\n';
            print_claims(out, dag, fit.local);
        } else {
            out << "\nfit did not converge: too few rows or a singular design\n";
        }
        summary = summary_json(dag, fit);
    } else {
        const GlobalFit fit = fit_global(dag, data);
        bundle = compute_metrics(dag, data, fit, opt);
        if (fit.converged) {
            out << "\npaths\n";
            write_path_table(out, dag, fit.paths);
            out << "\nglobal test\nchi-square = " << format_number(fit.chi2) << " on " << fit.df
                << " df, p = " << format_number(fit.global_p) << '\n';
            out << "\nr-squared\nresponse,r2\n";
            for (std::size_t i = 0; i < fit.endogenous.size(); ++i)
                out << dag.name(fit.endogenous[i]) << ',' << format_number(fit.endo_r2[i]) << '\n';
            print_claims(out, dag, ci_local_tests(dag, data, a.alpha));
        } else {
            out << "\nfit did not converge: " << fit.failure << '\n';
        }
        summary = summary_json(dag, fit);
    }

    if (bundle.converged) {
        out << "\ninformation criteria\nloglik,k,n,aicc,bic,hbic\n"
            << format_number(bundle.loglik) << ',' << bundle.k_params << ',' << bundle.n_obs << ','
            << (bundle.ic.aicc ? format_number(*bundle.ic.aicc) : "NA") << ',' << format_number(bundle.ic.bic) << ','
            << format_number(bundle.ic.hbic) << '\n';
        out << "\nchecks\naccepted: " << yes_no(bundle.accepted) << " (alpha " << format_number(a.alpha) << ")\n"
            << "prop_significant_paths: " << format_number(bundle.prop_significant_paths) << '\n'
            << "avg_r2: " << format_number(bundle.avg_r2) << '\n'
            << "prop_ci_failed: " << format_number(bundle.prop_ci_failed) << '\n';
    }

    DiagnoseThresholds th;
    th.alpha = a.alpha;
    const Diagnosis d = diagnose(bundle, th);
    out << "\ndiagnosis: " << to_string(d.label) << '\n' << d.advice << '\n';

    if (!a.json_out.empty()) {
        auto f = open_output(a.json_out);
        f << summary << '\n';
        close_output(f, a.json_out);
    }
    return bundle.converged ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string model, scenario = "exact", out;
    std::size_t n = 100;
    double sd_eff = 2.5, sd_res = 1.0;
    double shuffle_fraction = 0.25, modify_fraction = 0.25;
    std::uint64_t seed = 1;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    GenerationRecipe recipe;
    try {
        recipe.model_dag = read_model_spec(a.model);
        recipe.scenario = parse_scenario(a.scenario);
    } catch (const ModelSpecError& e) {
        throw UsageError(a.model + ": " + e.what());
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    if (a.n < 1) throw UsageError("--n must be at least 1");
    recipe.sd_eff = a.sd_eff;
    recipe.sd_res = a.sd_res;
    recipe.shuffle_fraction = a.shuffle_fraction;
    recipe.modify_fraction = a.modify_fraction;

    Rng rng = seeded_rng(a.seed);
    const ScenarioData sd = generate_scenario(recipe, a.n, rng);

    auto f = open_output(a.out);
    write_csv(f, sd.data);
    close_output(f, a.out);

    json m;
    m["command"] = "generate";
    m["versions"] = versions();
    m["seed"] = a.seed;
    m["scenario"] = to_string(recipe.scenario);
    m["n_samples"] = a.n;
    m["sd_eff"] = a.sd_eff;
    m["sd_res"] = a.sd_res;
    m["model"] = format_model_spec(recipe.model_dag);
    const auto& w = sd.process;
    m["generating_dag"] = format_model_spec(sd.generating_dag);
    json edges = json::array();
    for (std::size_t i = 0; i < w.coefficients.size(); ++i) {
        const Edge& e = w.dag.edges()[i];
        edges.push_back({{"from", w.dag.name(e.from)}, {"to", w.dag.name(e.to)}, {"coefficient", w.coefficients[i]}});
    }
    m["coefficients"] = edges;
    if (recipe.scenario == ScenarioKind::Random) {
        m["columns"] = "independent standard normal";
    } else {
        json sds = json::object();
        for (NodeId v : w.dag.endogenous()) sds[w.dag.name(v)] = w.residual_sd[v];
        m["residual_sd"] = sds;
        m["exogenous_law"] = {{"uniform_lower", w.exogenous_law.lower}, {"uniform_upper", w.exogenous_law.upper}};
    }
    const std::string manifest_path = a.out + ".manifest.json";
    auto mf = open_output(manifest_path);
    mf << m.dump(2) << '\n';
    close_output(mf, manifest_path);

    out << "wrote " << a.n << " rows to " << a.out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- figure

struct FigureArgs {
    std::string in, figure, out, svg;
};

int cmd_figure(const FigureArgs& a, std::ostream& out) {
    figure::TidyTable table;
    try {
        const auto id = figure::parse_figure(a.figure);
        std::ifstream f(a.in, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open results file '" + a.in + "'");
        table = figure::tidy(id, csv::read_table(f));
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    if (a.out.empty() || a.out == "-") {
        figure::write_tidy(out, table);
    } else {
        auto f = open_output(a.out);
        figure::write_tidy(f, table);
        close_output(f, a.out);
    }
    if (!a.svg.empty()) {
        auto f = open_output(a.svg);
        figure::write_svg(f, table, a.figure);
        close_output(f, a.svg);
    }
    return kExitOk;
}

void add_config(CLI::App* sub) {
    sub->add_option("--config", "key=value file; command-line flags take precedence");
}

std::string trim(std::string_view t) {
    const auto b = t.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = t.find_last_not_of(" \t\r");
    return std::string(t.substr(b, e - b + 1));
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

/// Splices the entries of a `--config` file in front of the subcommand's own
/// flags, skipping keys that the command line sets itself.
std::vector<std::string> merge_config(const CLI::App& app, const std::vector<std::string>& args) {
    if (args.empty()) return args;
    const CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(args[0]);
    } catch (const CLI::OptionNotFound&) {
        return args;
    }
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::vector<std::string> injected;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ": line " + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (!opt || key == "config")
            throw UsageError(path + ": line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (given_on_command_line(args, flag)) continue;
        if (opt->get_expected_min() == 0) {
            if (value == "true" || value == "1" || value == "yes") injected.push_back(flag);
            else if (value != "false" && value != "0" && value != "no")
                throw UsageError(path + ": line " + std::to_string(line_no) + ": '" + key + "' takes true or false");
            continue;
        }
        injected.push_back(flag);
        injected.push_back(value);
    }
    std::vector<std::string> merged{args[0]};
    merged.insert(merged.end(), injected.begin(), injected.end());
    merged.insert(merged.end(), args.begin() + 1, args.end());
    return merged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte Carlo study of model checks for structural equation models", "semsim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SEMSIM_VERSION);

    SimulateArgs sa;
    auto* sim_cmd = app.add_subcommand("simulate", "run a simulation batch and write the results table");
    add_config(sim_cmd);
    sim_cmd->add_option("--batch", sa.batch, "1 = fit checks per scenario, 2 = information-criterion selection")
        ->check(CLI::IsMember({1, 2}));
    sim_cmd->add_option("--preset", sa.preset, "paper-defaults or desk")
        ->check(CLI::IsMember({"paper-defaults", "desk"}));
    sim_cmd->add_option("--seed", sa.seed, "master seed");
    sim_cmd->add_option("--replicates", sa.replicates, "replicates per parameter set")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--workers", sa.workers, "worker threads, 0 = all cores");
    sim_cmd->add_option("--out", sa.out, "results CSV path");
    sim_cmd->add_flag("--hbic-as-printed", sa.hbic_as_printed, "evaluate HBIC as logl - K ln(N/2pi)");
    sim_cmd->add_flag("--emit-raw", sa.emit_raw, "also write per-replicate rows");
    sim_cmd->add_option("--n", sa.n, "sample sizes")->delimiter(',');
    sim_cmd->add_option("--n-cov", sa.n_cov, "covariate counts")->delimiter(',');
    sim_cmd->add_option("--scenario", sa.scenario, "batch-1 scenarios")->delimiter(',');
    sim_cmd->add_option("--fitter", sa.fitter, "piecewise and/or global")->delimiter(',');
    sim_cmd->add_option("--sd-eff", sa.sd_eff, "path coefficient sd levels")->delimiter(',');
    sim_cmd->add_option("--sd-res", sa.sd_res, "residual sd levels")->delimiter(',');
    sim_cmd->add_option("--alpha", sa.alpha, "significance level");
    sim_cmd->add_option("--connectance", sa.connectance, "edges per squared node count");
    sim_cmd->add_option("--connectance-base", sa.connectance_base, "square or pairs");
    sim_cmd->add_option("--ic-threshold", sa.ic_threshold, "IC gap needed to name a best scenario");
    sim_cmd->add_option("--shuffle-fraction", sa.shuffle_fraction, "share of reversed edges");
    sim_cmd->add_option("--modify-fraction", sa.modify_fraction, "share of added or dropped edges");

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model spec to a data CSV and diagnose it");
    add_config(fit_cmd);
    fit_cmd->add_option("--model", fa.model, "model spec file")->required();
    fit_cmd->add_option("--data", fa.data, "data CSV")->required();
    fit_cmd->add_option("--fitter", fa.fitter, "piecewise or global");
    fit_cmd->add_option("--alpha", fa.alpha, "significance level");
    fit_cmd->add_flag("--hbic-as-printed", fa.hbic_as_printed, "evaluate HBIC as logl - K ln(N/2pi)");
    fit_cmd->add_option("--json", fa.json_out, "write a JSON summary here");

    GenerateArgs ga;
    auto* gen_cmd = app.add_subcommand("generate", "simulate a data set from a model spec");
    add_config(gen_cmd);
    gen_cmd->add_option("--model", ga.model, "model spec file")->required();
    gen_cmd->add_option("--scenario", ga.scenario, "random, exact, shuffled, overspecified or underspecified");
    gen_cmd->add_option("--n", ga.n, "rows");
    gen_cmd->add_option("--sd-eff", ga.sd_eff, "path coefficient sd");
    gen_cmd->add_option("--sd-res", ga.sd_res, "residual sd");
    gen_cmd->add_option("--shuffle-fraction", ga.shuffle_fraction, "share of reversed edges");
    gen_cmd->add_option("--modify-fraction", ga.modify_fraction, "share of added or dropped edges");
    gen_cmd->add_option("--seed", ga.seed, "seed");
    gen_cmd->add_option("--out", ga.out, "data CSV path")->required();

    FigureArgs ra;
    auto* fig_cmd = app.add_subcommand("figure", "tidy figure data from a results CSV");
    add_config(fig_cmd);
    fig_cmd->add_option("--in", ra.in, "results CSV")->required();
    fig_cmd->add_option("--figure", ra.figure, "fig2, fig3, fig4, fig5, fig6 or appendix")->required();
    fig_cmd->add_option("--out", ra.out, "tidy CSV path, standard output when omitted");
    fig_cmd->add_option("--svg", ra.svg, "also draw an SVG plot here");

    try {
        const auto merged = merge_config(app, args);
        std::vector<std::string> reversed(merged.rbegin(), merged.rend());
        app.parse(reversed);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*sim_cmd) return cmd_simulate(sa, out);
        if (*fit_cmd) return cmd_fit(fa, out);
        if (*gen_cmd) return cmd_generate(ga, out);
        return cmd_figure(ra, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace semsim::cli
