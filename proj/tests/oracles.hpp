#pragma once

// Independent reference implementations used to check the library.

#include "semsim/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace oracle {

inline semsim::Dag dag_from(std::vector<std::string> names, const std::vector<std::pair<int, int>>& edges) {
    std::vector<semsim::Edge> e;
    for (auto [a, b] : edges) e.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
    return semsim::Dag(std::move(names), std::move(e));
}

inline bool is_descendant_or_self(const semsim::Dag& g, std::size_t from, std::size_t target) {
    if (from == target) return true;
    for (auto c : g.children(from))
        if (is_descendant_or_self(g, c, target)) return true;
    return false;
}

/// Enumerates every simple path of the skeleton and applies the blocking rules.
inline bool d_separated_by_paths(const semsim::Dag& g, std::size_t x, std::size_t y,
                                 const std::vector<std::size_t>& z) {
    const std::size_t n = g.size();
    auto in_z = [&](std::size_t v) { return std::find(z.begin(), z.end(), v) != z.end(); };
    auto collider_open = [&](std::size_t c) {
        for (std::size_t v : z)
            if (is_descendant_or_self(g, c, v)) return true;
        return false;
    };
    std::vector<std::size_t> path{x};
    std::vector<bool> used(n, false);
    used[x] = true;
    bool open_path = false;

    std::function<void(std::size_t)> walk = [&](std::size_t v) {
        if (open_path) return;
        if (v == y) {
            bool blocked = false;
            for (std::size_t i = 1; i + 1 < path.size() && !blocked; ++i) {
                const std::size_t a = path[i - 1], m = path[i], b = path[i + 1];
                const bool collider = g.has_edge(a, m) && g.has_edge(b, m);
                blocked = collider ? !collider_open(m) : in_z(m);
            }
            if (!blocked) open_path = true;
            return;
        }
        for (std::size_t w = 0; w < n; ++w) {
            if (used[w] || !g.adjacent(v, w)) continue;
            used[w] = true;
            path.push_back(w);
            walk(w);
            path.pop_back();
            used[w] = false;
        }
    };
    walk(x);
    return !open_path;
}

/// Least squares through the normal equations with an explicit inverse.
struct NormalEquations {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    double rss;
};

inline NormalEquations normal_equations(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    const Eigen::Index n = y.size(), p = x.cols() + 1;
    Eigen::MatrixXd d(n, p);
    d.col(0).setOnes();
    d.rightCols(p - 1) = x;
    const Eigen::MatrixXd inv = (d.transpose() * d).inverse();
    NormalEquations out;
    out.beta = inv * d.transpose() * y;
    out.rss = (y - d * out.beta).squaredNorm();
    const double s2 = out.rss / static_cast<double>(n - p);
    out.se = (s2 * inv.diagonal().array()).sqrt();
    return out;
}

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                        int depth = 50) {
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4 * frm + fhi);
            if (d <= 0 || std::abs(left + right - whole) <= 15 * tol)
                return left + right + (left + right - whole) / 15.0;
            return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4 * fm + fb), depth);
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

inline double chi2_pdf(double x, double k) {
    if (x <= 0) return 0.0;
    return std::exp((k / 2 - 1) * std::log(x) - x / 2 - (k / 2) * std::log(2.0) - std::lgamma(k / 2));
}

inline double t_pdf(double t, double v) {
    return std::exp(std::lgamma((v + 1) / 2) - std::lgamma(v / 2) - 0.5 * std::log(v * M_PI) -
                    (v + 1) / 2 * std::log1p(t * t / v));
}

/// Upper tail of a density on (a, inf): unit steps up to `far`, then u = 1 / t beyond.
inline double upper_tail(const std::function<double(double)>& pdf, double a, double far = 200.0) {
    double total = 0.0, lo = a;
    for (; lo + 1.0 < far; lo += 1.0) total += integrate(pdf, lo, lo + 1.0);
    return total + integrate([&](double u) { return u <= 0 ? 0.0 : pdf(1.0 / u) / (u * u); }, 0.0, 1.0 / lo);
}

}  // namespace oracle
