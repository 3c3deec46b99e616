// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.

#include "../oracles.hpp"

#include "semsim/cli.hpp"
#include "semsim/csv.hpp"
#include "semsim/datagen.hpp"
#include "semsim/fit.hpp"
#include "semsim/metrics.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

using namespace semsim;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << ' ' << id << ' ' << name << ": " << detail << std::endl;
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

class Results {
public:
    explicit Results(const fs::path& p) {
        std::ifstream in(p);
        t_ = csv::read_table(in);
    }

    // Value of `metric` in rows matching every (column, value) filter.
    std::vector<double> values(const std::map<std::string, std::string>& where, const std::string& metric) const {
        std::vector<double> out;
        const std::size_t m = col(metric);
        for (const auto& r : t_.rows) {
            bool keep = true;
            for (const auto& [c, v] : where) keep = keep && r[col(c)] == v;
            if (keep) out.push_back(*csv::parse_number(r[m]));
        }
        return out;
    }

    double value(const std::map<std::string, std::string>& where, const std::string& metric) const {
        const auto v = values(where, metric);
        if (v.size() != 1) throw std::runtime_error("expected one row for " + metric);
        return v.front();
    }

private:
    std::size_t col(const std::string& name) const {
        const auto c = t_.column(name);
        if (!c) throw std::runtime_error("results lack column " + name);
        return *c;
    }
    csv::Table t_;
};

const std::vector<std::string> kDeskN{"20", "100", "1000", "10000"};
const std::vector<std::string> kFitters{"piecewise", "global"};

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

void criterion1() {
    Rng rng(101);
    double worst = 0.0;
    bool ok = true;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 3 + rng() % 8;
        const Dag g = random_dag(n, 0.3, rng);
        const Dataset d = generate(draw_coefficients(g, 2.5, 1.0, rng), 30 + rng() % 1000, rng);
        const GlobalFit gf = fit_global(g, d);
        const PiecewiseFit pf = fit_piecewise(g, d);
        ok = ok && gf.converged && pf.converged && gf.paths.size() == pf.paths.size();
        if (!ok) break;
        for (std::size_t i = 0; i < gf.paths.size(); ++i)
            worst = std::max(worst, rel_diff(gf.paths[i].estimate, pf.paths[i].estimate));
    }
    double sat_chi2 = 0.0;
    bool sat_df = true;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 2 + rng() % 6;
        const Dag g = random_dag(n, 1.0, rng, ConnectanceBase::Pairs);
        const GlobalFit f = fit_global(g, generate(draw_coefficients(g, 2.5, 1.0, rng), 200, rng));
        sat_chi2 = std::max(sat_chi2, f.chi2);
        sat_df = sat_df && f.converged && f.df == 0;
    }
    ok = ok && worst <= 1e-8 && sat_chi2 <= 1e-8 && sat_df;
    report(1, "oracle equivalence", ok,
           "max relative ML-OLS gap " + fmt(worst) + " over 200 instances, saturated max chi2 " + fmt(sat_chi2) +
               (sat_df ? ", df 0" : ", df not 0"));
}

void criterion2() {
    Rng rng(202);
    std::size_t mismatches = 0, queries = 0;
    while (queries < 1000) {
        const std::size_t n = 3 + rng() % 3;
        const Dag g = random_dag(n, 0.1 + 0.05 * static_cast<double>(rng() % 7), rng);
        const NodeId x = rng() % n;
        const NodeId y = rng() % n;
        if (x == y) continue;
        std::vector<NodeId> z;
        for (NodeId v = 0; v < n; ++v)
            if (v != x && v != y && rng() % 2) z.push_back(v);
        mismatches += d_separated(g, x, y, z) != oracle::d_separated_by_paths(g, x, y, z);
        ++queries;
    }
    report(2, "d-separation", mismatches == 0, std::to_string(mismatches) + " mismatches in 1000 queries");
}

void criterion3(const Results& r) {
    bool ok = true;
    std::string detail;
    for (const auto& f : kFitters) {
        const double exact = r.value({{"scenario", "exact"}, {"n_cov", "5"}, {"n_samples", "10000"}, {"fitter", f}},
                                     "prop_accepted");
        double under_max = 0.0;
        for (double v : r.values({{"scenario", "underspecified"}, {"n_cov", "10"}, {"fitter", f}}, "prop_accepted"))
            under_max = std::max(under_max, v);
        ok = ok && exact >= 0.80 && exact <= 0.98 && under_max <= 0.05;
        detail += f + " exact " + fmt(exact) + " underspecified max " + fmt(under_max) + "; ";
    }
    report(3, "acceptance rates", ok, detail);
}

void criterion4(const Results& r) {
    bool ok = true;
    std::string detail;
    for (const auto& f : kFitters) {
        const std::map<std::string, std::string> base{{"scenario", "shuffled"}, {"n_cov", "5"}, {"fitter", f}};
        auto at = [&](const std::string& n) {
            auto w = base;
            w["n_samples"] = n;
            return r.value(w, "prop_accepted");
        };
        const double lo = at("20"), hi = at("10000");
        ok = ok && lo >= 0.35 && lo <= 0.65 && hi >= 0.10 && hi <= 0.40 && hi < lo;
        detail += f + " N=20 " + fmt(lo) + " N=1e4 " + fmt(hi) + "; ";
    }
    report(4, "shuffled acceptance decay", ok, detail);
}

void criterion5(const Results& r) {
    bool ok = true;
    std::string detail;
    for (const auto& f : kFitters) {
        const double sig = mean(r.values({{"scenario", "random"}, {"fitter", f}}, "prop_significant_paths"));
        const double ci = mean(r.values({{"scenario", "exact"}, {"fitter", f}}, "prop_ci_failed"));
        ok = ok && sig >= 0.02 && sig <= 0.08 && ci >= 0.01 && ci <= 0.09;
        detail += f + " random prop_sig " + fmt(sig) + " exact prop_ci_failed " + fmt(ci) + "; ";
    }
    report(5, "null calibration", ok, detail);
}

void criterion6(const Results& r) {
    bool ok = true;
    std::string detail;
    for (const auto& f : kFitters) {
        bool crossed = false, monotone = true;
        double prev = -1.0;
        detail += f;
        for (const auto& n : kDeskN) {
            const double v = r.value({{"scenario", "exact"}, {"n_cov", "5"}, {"n_samples", n}, {"fitter", f}},
                                     "prop_significant_paths");
            if (std::stoul(n) <= 200 && v >= 0.80) crossed = true;
            if (v < prev - 0.05) monotone = false;
            prev = std::max(prev, v);
            detail += " " + fmt(v);
        }
        ok = ok && crossed && monotone;
        detail += "; ";
    }
    report(6, "power rule of thumb", ok, detail);
}

void criterion7(const Results& r) {
    bool ok = true;
    std::string detail;
    const std::map<std::string, std::pair<double, double>> band{{"5", {0.55, 0.85}}, {"10", {0.65, 0.92}}};
    for (const auto& f : kFitters)
        for (const auto& [n_cov, range] : band) {
            const auto v = r.values({{"scenario", "exact"}, {"n_cov", n_cov}, {"fitter", f}}, "avg_r2");
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            ok = ok && v.size() == kDeskN.size() && *lo >= range.first && *hi <= range.second && *hi - *lo <= 0.15;
            detail += f + " n=" + n_cov + " [" + fmt(*lo) + ", " + fmt(*hi) + "]; ";
        }
    report(7, "R-squared levels", ok, detail);
}

void criterion8(const Results& r) {
    bool ok = true;
    std::string detail;
    for (const auto& f : kFitters) {
        const std::map<std::string, std::string> point{{"n_cov", "10"}, {"n_samples", "1000"}, {"fitter", f}};
        const double b = r.value(point, "bic_exact"), a = r.value(point, "aicc_exact");
        std::vector<double> curve;
        for (const auto& n : kDeskN)
            curve.push_back(r.value({{"n_cov", "5"}, {"n_samples", n}, {"fitter", f}}, "aicc_exact"));
        const double peak = *std::max_element(curve.begin(), curve.end());
        const bool hump = peak >= curve.front() + 0.05 && peak >= curve.back() + 0.05;
        ok = ok && b >= 0.5 && b > a && hump;
        detail += f + " BIC " + fmt(b) + " vs AICc " + fmt(a) + ", AICc n=5 curve";
        for (double v : curve) detail += " " + fmt(v);
        detail += hump ? " (hump); " : " (no hump); ";
    }
    report(8, "IC selection", ok, detail);
}

void criterion9() {
    const FisherC c = fishers_c(std::vector<double>{0.05, 0.05});
    bool ok = std::abs(c.c - 11.983) <= 1e-3 && c.df == 4 && std::abs(c.p - 0.0175) <= 1e-3;

    Eigen::MatrixXd s(1, 1), sigma(1, 1);
    s << 2.0;
    sigma << 1.0;
    const auto f = fml(s, sigma);
    ok = ok && f && std::abs(*f - (1.0 - std::log(2.0))) <= 1e-10;

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2), expected(2, 2);
    b(1, 0) = 2.0;
    expected << 1, 2, 2, 5;
    const auto implied = implied_covariance(b, Eigen::MatrixXd::Identity(2, 2));
    ok = ok && implied && *implied == expected;

    ok = ok && aicc(-50.0, 3, 20) == 107.5;
    for (std::size_t k : {1u, 5u, 17u})
        ok = ok && std::abs(bic(-50.0, k, 100) - hbic(-50.0, k, 100) - k * std::log(2.0 * std::numbers::pi)) <= 1e-12;
    report(9, "formula golden values", ok,
           "fishers_c (" + fmt(c.c, 6) + ", " + std::to_string(c.df) + ", " + fmt(c.p, 6) + "), aicc " +
               fmt(aicc(-50.0, 3, 20), 6));
}

int simulate(const std::vector<std::string>& extra, const fs::path& out) {
    std::vector<std::string> args{"simulate", "--preset", "desk", "--seed", "42", "--out", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    std::ostringstream sink, err;
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = cli::run(args, sink, err);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "simulate";
    for (const auto& e : extra) std::cerr << ' ' << e;
    std::cerr << ": rc " << rc << " in " << fmt(secs) << " s\n" << err.str();
    return rc;
}

}  // namespace

int main() {
    const fs::path dir = fs::temp_directory_path() / "semsim_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    criterion1();
    criterion2();

    const fs::path b1 = dir / "batch1.csv", b1w = dir / "batch1_w3.csv", b2 = dir / "batch2.csv";
    const bool b1_ok = simulate({"--batch", "1", "--workers", "1"}, b1) == 0;
    const bool b2_ok = simulate({"--batch", "2", "--workers", "1"}, b2) == 0;

    auto guarded = [](int id, const char* name, bool ran, auto&& check) {
        if (!ran) return report(id, name, false, "simulation failed");
        try {
            check();
        } catch (const std::exception& e) {
            report(id, name, false, e.what());
        }
    };
    if (b1_ok) {
        const Results r(b1);
        guarded(3, "acceptance rates", true, [&] { criterion3(r); });
        guarded(4, "shuffled acceptance decay", true, [&] { criterion4(r); });
        guarded(5, "null calibration", true, [&] { criterion5(r); });
        guarded(6, "power rule of thumb", true, [&] { criterion6(r); });
        guarded(7, "R-squared levels", true, [&] { criterion7(r); });
    } else {
        for (int id = 3; id <= 7; ++id) guarded(id, "batch-1 metrics", false, [] {});
    }
    guarded(8, "IC selection", b2_ok, [&] { criterion8(Results(b2)); });
    criterion9();

    const fs::path b2w = dir / "batch2_w3.csv";
    const bool again = b1_ok && b2_ok && simulate({"--batch", "1", "--workers", "3"}, b1w) == 0 &&
                       simulate({"--batch", "2", "--workers", "3"}, b2w) == 0;
    const bool same1 = again && slurp(b1) == slurp(b1w);
    const bool same2 = again && slurp(b2) == slurp(b2w);
    report(10, "determinism", same1 && same2,
           std::string("batch 1 ") + (same1 ? "identical" : "differs") + ", batch 2 " +
               (same2 ? "identical" : "differs") + " across --workers 1 and 3");

    fs::remove_all(dir);
    return failures == 0 ? 0 : 1;
}
