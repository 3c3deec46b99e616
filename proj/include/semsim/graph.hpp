#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semsim {

using Rng = std::mt19937_64;
using NodeId = std::size_t;

struct Edge {
    NodeId from;
    NodeId to;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed acyclic graph over named nodes.
///
/// Edges are kept sorted by (from, to). Construction validates the full
/// invariant set: no self-loops, no duplicates, at most one edge per
/// unordered pair and no directed cycle.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::vector<std::string> names, std::vector<Edge> edges = {});

    std::size_t size() const { return names_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(NodeId v) const { return names_.at(v); }
    const std::vector<Edge>& edges() const { return edges_; }

    std::optional<NodeId> find(std::string_view name) const;
    NodeId index_of(std::string_view name) const;

    bool has_edge(NodeId from, NodeId to) const { return adj_[from * size() + to] != 0; }
    bool adjacent(NodeId a, NodeId b) const { return has_edge(a, b) || has_edge(b, a); }

    /// Ascending node ids.
    const std::vector<NodeId>& parents(NodeId v) const { return parents_.at(v); }
    const std::vector<NodeId>& children(NodeId v) const { return children_.at(v); }

    bool is_exogenous(NodeId v) const { return parents_.at(v).empty(); }
    std::vector<NodeId> exogenous() const;
    std::vector<NodeId> endogenous() const;

    /// Same node set, edges replaced; validates the result.
    Dag with_edges(std::vector<Edge> edges) const { return Dag(names_, std::move(edges)); }

    /// Deterministic Kahn order, smallest ready id first.
    std::vector<NodeId> topological_order() const;

    friend bool operator==(const Dag& a, const Dag& b) {
        return a.names_ == b.names_ && a.edges_ == b.edges_;
    }

private:
    std::vector<std::string> names_;
    std::vector<Edge> edges_;
    std::vector<unsigned char> adj_;
    std::vector<std::vector<NodeId>> parents_;
    std::vector<std::vector<NodeId>> children_;
};

/// True iff the edge list over `n` nodes contains a directed cycle.
bool has_cycle(std::size_t n, const std::vector<Edge>& edges);

struct IndependenceClaim {
    NodeId x;
    NodeId y;
    std::vector<NodeId> conditioning_set;  // ascending

    friend bool operator==(const IndependenceClaim&, const IndependenceClaim&) = default;
};

enum class ScenarioKind { Random, Exact, Shuffled, Overspecified, Underspecified };

inline constexpr ScenarioKind kAllScenarios[] = {
    ScenarioKind::Random, ScenarioKind::Exact, ScenarioKind::Shuffled,
    ScenarioKind::Overspecified, ScenarioKind::Underspecified};

std::string_view to_string(ScenarioKind s);
ScenarioKind parse_scenario(std::string_view text);

/// Normalizer used to turn a connectance into an edge budget.
enum class ConnectanceBase {
    Square,  // floor(c * n^2)
    Pairs,   // floor(c * n(n-1)/2)
};

std::size_t edge_budget(std::size_t n, double connectance,
                        ConnectanceBase base = ConnectanceBase::Square);

/// Random DAG over nodes X1..Xn with exactly edge_budget(n, connectance) edges.
///
/// A uniformly random node ordering is drawn and the edges are sampled without
/// replacement among forward pairs of that ordering, so the first node of the
/// ordering is always exogenous.
Dag random_dag(std::size_t n, double connectance, Rng& rng,
               ConnectanceBase base = ConnectanceBase::Square);

bool d_separated(const Dag& dag, NodeId x, NodeId y, const std::vector<NodeId>& z);

/// Union-of-parents basis set: one claim per non-adjacent pair, sorted by
/// node indices; y is the later member of the pair in topological order.
std::vector<IndependenceClaim> basis_set(const Dag& dag);

/// Round-half-to-even of fraction * count.
std::size_t modification_count(double fraction, std::size_t count);

Dag shuffle_edges(const Dag& dag, double fraction, Rng& rng);
Dag drop_edges(const Dag& dag, double fraction, Rng& rng);
Dag add_edges(const Dag& dag, double fraction, Rng& rng);

class ModelSpecError : public std::runtime_error {
public:
    ModelSpecError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parse `TARGET ~ A + B` lines. A line holding a single identifier declares
/// an isolated node. Node order is order of first appearance.
Dag parse_model_spec(std::string_view text);
Dag read_model_spec(const std::string& path);
std::string format_model_spec(const Dag& dag);

}  // namespace semsim
