#include "semsim/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace semsim {

namespace {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

// First k entries of `items` become a uniform random k-subset.
template <class T>
void partial_shuffle(std::vector<T>& items, std::size_t k, Rng& rng) {
    for (std::size_t i = 0; i < k && i + 1 < items.size(); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
        std::swap(items[i], items[pick(rng)]);
    }
}

}  // namespace

Dag::Dag(std::vector<std::string> names, std::vector<Edge> edges)
    : names_(std::move(names)), edges_(std::move(edges)) {
    const std::size_t n = names_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (names_[i].empty()) fail("empty node name");
        for (std::size_t j = 0; j < i; ++j)
            if (names_[i] == names_[j]) fail("duplicate node name '" + names_[i] + "'");
    }
    adj_.assign(n * n, 0);
    parents_.assign(n, {});
    children_.assign(n, {});
    for (const Edge& e : edges_) {
        if (e.from >= n || e.to >= n) fail("edge references unknown node");
        if (e.from == e.to) fail("self-loop on '" + names_[e.from] + "'");
        if (adj_[e.from * n + e.to]) fail("duplicate edge " + names_[e.from] + " -> " + names_[e.to]);
        if (adj_[e.to * n + e.from])
            fail("edges in both directions between " + names_[e.from] + " and " + names_[e.to]);
        adj_[e.from * n + e.to] = 1;
    }
    std::sort(edges_.begin(), edges_.end());
    for (const Edge& e : edges_) {
        parents_[e.to].push_back(e.from);
        children_[e.from].push_back(e.to);
    }
    for (auto& p : parents_) std::sort(p.begin(), p.end());
    for (auto& c : children_) std::sort(c.begin(), c.end());
    if (has_cycle(n, edges_)) fail("graph contains a directed cycle");
}

std::optional<NodeId> Dag::find(std::string_view name) const {
    for (NodeId i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    return std::nullopt;
}

NodeId Dag::index_of(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw std::out_of_range("unknown node '" + std::string(name) + "'");
}

std::vector<NodeId> Dag::exogenous() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < size(); ++v)
        if (is_exogenous(v)) out.push_back(v);
    return out;
}

std::vector<NodeId> Dag::endogenous() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < size(); ++v)
        if (!is_exogenous(v)) out.push_back(v);
    return out;
}

std::vector<NodeId> Dag::topological_order() const {
    const std::size_t n = size();
    std::vector<std::size_t> indeg(n);
    for (NodeId v = 0; v < n; ++v) indeg[v] = parents_[v].size();
    std::vector<NodeId> order;
    order.reserve(n);
    std::vector<bool> done(n, false);
    while (order.size() < n) {
        NodeId next = n;
        for (NodeId v = 0; v < n; ++v)
            if (!done[v] && indeg[v] == 0) {
                next = v;
                break;
            }
        // Acyclicity is checked at construction.
        done[next] = true;
        order.push_back(next);
        for (NodeId c : children_[next]) --indeg[c];
    }
    return order;
}

bool has_cycle(std::size_t n, const std::vector<Edge>& edges) {
    std::vector<std::size_t> indeg(n, 0);
    std::vector<std::vector<NodeId>> out(n);
    for (const Edge& e : edges) {
        ++indeg[e.to];
        out[e.from].push_back(e.to);
    }
    std::vector<NodeId> stack;
    for (NodeId v = 0; v < n; ++v)
        if (indeg[v] == 0) stack.push_back(v);
    std::size_t seen = 0;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        ++seen;
        for (NodeId c : out[v])
            if (--indeg[c] == 0) stack.push_back(c);
    }
    return seen != n;
}

std::string_view to_string(ScenarioKind s) {
    switch (s) {
        case ScenarioKind::Random: return "random";
        case ScenarioKind::Exact: return "exact";
        case ScenarioKind::Shuffled: return "shuffled";
        case ScenarioKind::Overspecified: return "overspecified";
        case ScenarioKind::Underspecified: return "underspecified";
    }
    return "unknown";
}

ScenarioKind parse_scenario(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    for (ScenarioKind s : kAllScenarios)
        if (to_string(s) == t) return s;
    if (t == "over") return ScenarioKind::Overspecified;
    if (t == "under") return ScenarioKind::Underspecified;
    throw std::invalid_argument("unknown scenario '" + std::string(text) + "'");
}

std::size_t edge_budget(std::size_t n, double connectance, ConnectanceBase base) {
    if (!(connectance > 0.0 && connectance <= 1.0)) fail("connectance must lie in (0, 1]");
    const double pairs = base == ConnectanceBase::Square ? double(n) * double(n)
                                                         : double(n) * double(n - 1) / 2.0;
    // The epsilon absorbs representation error such as 0.3 * 100 = 29.999...
    return static_cast<std::size_t>(std::floor(connectance * pairs + 1e-9));
}

Dag random_dag(std::size_t n, double connectance, Rng& rng, ConnectanceBase base) {
    if (n < 2) fail("random_dag needs at least 2 nodes");
    const std::size_t m = edge_budget(n, connectance, base);
    const std::size_t max_edges = n * (n - 1) / 2;
    if (m > max_edges)
        fail("edge budget " + std::to_string(m) + " exceeds DAG maximum " + std::to_string(max_edges));

    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    partial_shuffle(order, n, rng);

    std::vector<Edge> forward;
    forward.reserve(max_edges);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) forward.push_back({order[i], order[j]});
    partial_shuffle(forward, m, rng);
    forward.resize(m);

    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("X" + std::to_string(i + 1));
    return Dag(std::move(names), std::move(forward));
}

bool d_separated(const Dag& dag, NodeId x, NodeId y, const std::vector<NodeId>& z) {
    const std::size_t n = dag.size();
    if (x >= n || y >= n) throw std::out_of_range("d_separated: unknown node id");
    if (x == y) fail("d_separated: x and y must differ");
    std::vector<bool> in_z(n, false);
    for (NodeId v : z) {
        if (v >= n) throw std::out_of_range("d_separated: unknown node id in conditioning set");
        in_z[v] = true;
    }
    if (in_z[x] || in_z[y]) fail("d_separated: x and y must not be conditioned on");

    // Ancestors of Z (inclusive) decide which colliders are open.
    std::vector<bool> anc(n, false);
    std::vector<NodeId> stack(z.begin(), z.end());
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        if (anc[v]) continue;
        anc[v] = true;
        for (NodeId p : dag.parents(v)) stack.push_back(p);
    }

    // Reachability over (node, arrived-from-child) states.
    enum Dir : unsigned char { Up = 0, Down = 1 };
    std::vector<unsigned char> visited(2 * n, 0);
    std::vector<std::pair<NodeId, Dir>> queue{{x, Up}};
    while (!queue.empty()) {
        auto [v, dir] = queue.back();
        queue.pop_back();
        if (visited[2 * v + dir]) continue;
        visited[2 * v + dir] = 1;
        if (v == y) return false;
        if (dir == Up) {
            if (in_z[v]) continue;
            for (NodeId p : dag.parents(v)) queue.push_back({p, Up});
            for (NodeId c : dag.children(v)) queue.push_back({c, Down});
        } else {
            if (!in_z[v])
                for (NodeId c : dag.children(v)) queue.push_back({c, Down});
            if (anc[v])
                for (NodeId p : dag.parents(v)) queue.push_back({p, Up});
        }
    }
    return true;
}

std::vector<IndependenceClaim> basis_set(const Dag& dag) {
    const std::size_t n = dag.size();
    const auto order = dag.topological_order();
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) rank[order[i]] = i;

    std::vector<IndependenceClaim> claims;
    for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) {
            if (dag.adjacent(a, b)) continue;
            IndependenceClaim c;
            c.x = rank[a] < rank[b] ? a : b;
            c.y = rank[a] < rank[b] ? b : a;
            std::vector<NodeId> cond = dag.parents(a);
            cond.insert(cond.end(), dag.parents(b).begin(), dag.parents(b).end());
            std::sort(cond.begin(), cond.end());
            cond.erase(std::unique(cond.begin(), cond.end()), cond.end());
            std::erase_if(cond, [&](NodeId v) { return v == a || v == b; });
            c.conditioning_set = std::move(cond);
            claims.push_back(std::move(c));
        }
    }
    return claims;
}

std::size_t modification_count(double fraction, std::size_t count) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) fail("fraction must lie in [0, 1]");
    // nearbyint under the default rounding mode is half-to-even.
    return static_cast<std::size_t>(std::nearbyint(fraction * double(count)));
}

namespace {

std::size_t never_vacuous(double fraction, std::size_t count) {
    std::size_t k = modification_count(fraction, count);
    if (k == 0 && fraction > 0.0 && count >= 1) k = 1;
    return k;
}

std::vector<Edge> reversed(std::vector<Edge> edges, const std::vector<std::size_t>& which) {
    for (std::size_t i : which) std::swap(edges[i].from, edges[i].to);
    return edges;
}

}  // namespace

Dag shuffle_edges(const Dag& dag, double fraction, Rng& rng) {
    const std::size_t m = dag.edge_count();
    const std::size_t k = std::min(modification_count(fraction, m), m);
    if (k == 0) return dag;

    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    constexpr int kMaxRetries = 100;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        partial_shuffle(idx, k, rng);
        std::vector<std::size_t> pick(idx.begin(), idx.begin() + k);
        auto edges = reversed(dag.edges(), pick);
        if (!has_cycle(dag.size(), edges)) return dag.with_edges(std::move(edges));
    }

    // Greedy fallback: walk a random permutation, keep reversals that stay acyclic.
    partial_shuffle(idx, m, rng);
    std::vector<Edge> edges = dag.edges();
    std::size_t done = 0;
    for (std::size_t i : idx) {
        if (done == k) break;
        std::swap(edges[i].from, edges[i].to);
        if (has_cycle(dag.size(), edges))
            std::swap(edges[i].from, edges[i].to);
        else
            ++done;
    }
    return dag.with_edges(std::move(edges));
}

Dag drop_edges(const Dag& dag, double fraction, Rng& rng) {
    const std::size_t m = dag.edge_count();
    const std::size_t k = std::min(never_vacuous(fraction, m), m);
    if (k == 0) return dag;
    std::vector<Edge> edges = dag.edges();
    partial_shuffle(edges, k, rng);
    edges.erase(edges.begin(), edges.begin() + k);
    return dag.with_edges(std::move(edges));
}

Dag add_edges(const Dag& dag, double fraction, Rng& rng) {
    const std::size_t k = never_vacuous(fraction, dag.edge_count());
    if (k == 0) return dag;
    const auto order = dag.topological_order();
    std::vector<Edge> candidates;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j)
            if (!dag.adjacent(order[i], order[j])) candidates.push_back({order[i], order[j]});
    if (candidates.empty()) throw std::runtime_error("add_edges: the DAG is complete, no edge can be added");
    if (candidates.size() < k)
        throw std::runtime_error("add_edges: " + std::to_string(k) + " edges requested but only " +
                                 std::to_string(candidates.size()) + " pairs are non-adjacent");
    partial_shuffle(candidates, k, rng);
    std::vector<Edge> edges = dag.edges();
    edges.insert(edges.end(), candidates.begin(), candidates.begin() + k);
    return dag.with_edges(std::move(edges));
}

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

bool valid_identifier(std::string_view s) {
    if (s.empty()) return false;
    for (unsigned char c : s)
        if (!(std::isalnum(c) || c == '_' || c == '.' || c >= 0x80)) return false;
    return true;
}

}  // namespace

Dag parse_model_spec(std::string_view text) {
    std::vector<std::string> names;
    std::vector<std::pair<std::string, std::string>> raw_edges;
    auto intern = [&](std::string_view name) {
        if (std::find(names.begin(), names.end(), name) == names.end()) names.emplace_back(name);
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::vector<std::string> targets;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto tilde = line.find('~');
        if (tilde == std::string_view::npos) {
            if (!valid_identifier(line)) throw ModelSpecError(line_no, "expected 'TARGET ~ SOURCE [+ SOURCE ...]'");
            intern(line);
            continue;
        }
        const auto target = trim(line.substr(0, tilde));
        if (!valid_identifier(target)) throw ModelSpecError(line_no, "invalid or missing target name");
        if (std::find(targets.begin(), targets.end(), target) != targets.end())
            throw ModelSpecError(line_no, "target '" + std::string(target) + "' defined twice");
        targets.emplace_back(target);
        intern(target);

        auto rhs = trim(line.substr(tilde + 1));
        if (rhs.empty()) throw ModelSpecError(line_no, "missing predictor after '~'");
        std::size_t start = 0;
        while (true) {
            const auto plus = rhs.find('+', start);
            auto term = trim(rhs.substr(start, plus == std::string_view::npos ? std::string_view::npos : plus - start));
            if (!valid_identifier(term))
                throw ModelSpecError(line_no, term.empty() ? "empty predictor term" : "invalid predictor '" + std::string(term) + "'");
            if (term == target) throw ModelSpecError(line_no, "self-loop on '" + std::string(term) + "'");
            intern(term);
            raw_edges.emplace_back(std::string(term), std::string(target));
            if (plus == std::string_view::npos) break;
            start = plus + 1;
        }
    }

    auto id = [&](const std::string& s) {
        return NodeId(std::find(names.begin(), names.end(), s) - names.begin());
    };
    std::vector<Edge> edges;
    for (const auto& [from, to] : raw_edges) edges.push_back({id(from), id(to)});
    try {
        return Dag(std::move(names), std::move(edges));
    } catch (const std::invalid_argument& e) {
        throw ModelSpecError(line_no, e.what());
    }
}

Dag read_model_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model spec '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model_spec(buf.str());
}

std::string format_model_spec(const Dag& dag) {
    std::string out;
    for (NodeId v = 0; v < dag.size(); ++v) {
        if (dag.is_exogenous(v)) {
            if (dag.children(v).empty()) out += dag.name(v) + "\n";
            continue;
        }
        out += dag.name(v) + " ~ ";
        const auto& ps = dag.parents(v);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (i) out += " + ";
            out += dag.name(ps[i]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace semsim
