#include "oracles.hpp"

#include "semsim/graph.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace semsim;
using oracle::dag_from;

namespace {

Dag chain3() { return dag_from({"A", "B", "C"}, {{0, 1}, {1, 2}}); }
Dag collider() { return dag_from({"A", "B", "C"}, {{0, 2}, {1, 2}}); }

std::set<std::pair<NodeId, NodeId>> skeleton(const Dag& g) {
    std::set<std::pair<NodeId, NodeId>> s;
    for (const Edge& e : g.edges()) s.insert({std::min(e.from, e.to), std::max(e.from, e.to)});
    return s;
}

bool respects_order(const Dag& g, const std::vector<NodeId>& order) {
    std::vector<std::size_t> pos(g.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const Edge& e : g.edges())
        if (pos[e.from] >= pos[e.to]) return false;
    return order.size() == g.size();
}

}  // namespace

TEST(Dag, RejectsInvalidStructures) {
    EXPECT_THROW(dag_from({"A", "B"}, {{0, 0}}), std::invalid_argument);
    EXPECT_THROW(dag_from({"A", "B"}, {{0, 1}, {0, 1}}), std::invalid_argument);
    EXPECT_THROW(dag_from({"A", "B"}, {{0, 1}, {1, 0}}), std::invalid_argument);
    EXPECT_THROW(dag_from({"A", "B", "C"}, {{0, 1}, {1, 2}, {2, 0}}), std::invalid_argument);
    EXPECT_THROW(dag_from({"A", "A"}, {}), std::invalid_argument);
}

TEST(Dag, ParentsChildrenAndExogenous) {
    const Dag g = collider();
    EXPECT_EQ(g.parents(2), (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(g.children(0), (std::vector<NodeId>{2}));
    EXPECT_EQ(g.exogenous(), (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(g.endogenous(), (std::vector<NodeId>{2}));
    EXPECT_EQ(g.index_of("C"), 2u);
    EXPECT_FALSE(g.find("D").has_value());
}

TEST(Dag, TopologicalOrderExamples) {
    EXPECT_EQ(chain3().topological_order(), (std::vector<NodeId>{0, 1, 2}));
    const Dag empty = dag_from({"A", "B"}, {});
    EXPECT_TRUE(respects_order(empty, empty.topological_order()));
    EXPECT_EQ(collider().topological_order().back(), 2u);
}

TEST(Dag, HasCycle) {
    EXPECT_FALSE(has_cycle(3, {{0, 1}, {1, 2}}));
    EXPECT_TRUE(has_cycle(3, {{0, 1}, {1, 2}, {2, 0}}));
}

TEST(DSeparation, TextbookCases) {
    EXPECT_TRUE(d_separated(chain3(), 0, 2, {1}));
    EXPECT_FALSE(d_separated(chain3(), 0, 2, {}));
    EXPECT_TRUE(d_separated(collider(), 0, 1, {}));
    EXPECT_FALSE(d_separated(collider(), 0, 1, {2}));
    // Conditioning on a descendant of a collider opens it.
    const Dag g = dag_from({"A", "B", "C", "D"}, {{0, 2}, {1, 2}, {2, 3}});
    EXPECT_FALSE(d_separated(g, 0, 1, {3}));
    EXPECT_THROW(d_separated(g, 0, 9, {}), std::out_of_range);
}

TEST(DSeparation, MatchesPathEnumeration) {
    Rng rng(2024);
    std::size_t mismatches = 0, queries = 0;
    while (queries < 1000) {
        const std::size_t n = 3 + rng() % 3;
        const double c = 0.1 + 0.05 * static_cast<double>(rng() % 7);
        const Dag g = random_dag(n, c, rng);
        const NodeId x = rng() % n;
        NodeId y = rng() % n;
        if (x == y) continue;
        std::vector<NodeId> z;
        for (NodeId v = 0; v < n; ++v)
            if (v != x && v != y && rng() % 2) z.push_back(v);
        if (d_separated(g, x, y, z) != oracle::d_separated_by_paths(g, x, y, z)) ++mismatches;
        ++queries;
    }
    EXPECT_EQ(mismatches, 0u);
}

TEST(BasisSet, Examples) {
    const auto chain = basis_set(chain3());
    ASSERT_EQ(chain.size(), 1u);
    EXPECT_EQ(chain[0], (IndependenceClaim{0, 2, {1}}));
    EXPECT_TRUE(basis_set(dag_from({"A", "B", "C"}, {{0, 1}, {0, 2}, {1, 2}})).empty());
    const auto col = basis_set(collider());
    ASSERT_EQ(col.size(), 1u);
    EXPECT_EQ(col[0], (IndependenceClaim{0, 1, {}}));
}

TEST(BasisSet, ClaimsAreTrueSeparations) {
    Rng rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 3 + rng() % 4;
        const Dag g = random_dag(n, 0.2, rng);
        const auto claims = basis_set(g);
        std::size_t non_adjacent = 0;
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b) non_adjacent += !g.adjacent(a, b);
        ASSERT_EQ(claims.size(), non_adjacent);
        for (const auto& c : claims)
            EXPECT_TRUE(oracle::d_separated_by_paths(g, c.x, c.y, c.conditioning_set));
    }
}

TEST(RandomDag, EdgeBudget) {
    EXPECT_EQ(edge_budget(5, 0.3), 7u);
    EXPECT_EQ(edge_budget(10, 0.3), 30u);
    EXPECT_EQ(edge_budget(7, 0.3), 14u);
    EXPECT_EQ(edge_budget(10, 0.3, ConnectanceBase::Pairs), 13u);
}

TEST(RandomDag, ExactEdgeCountAndExogenousNode) {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const Dag g = random_dag(5, 0.3, rng);
        EXPECT_EQ(g.edge_count(), 7u);
        EXPECT_FALSE(g.exogenous().empty());
        EXPECT_FALSE(has_cycle(g.size(), g.edges()));
    }
    EXPECT_EQ(random_dag(10, 0.3, rng).edge_count(), 30u);
    EXPECT_THROW(random_dag(3, 0.9, rng), std::invalid_argument);
}

TEST(RandomDag, DeterministicGivenSeed) {
    Rng a(5), b(5), c(6);
    const Dag ga = random_dag(7, 0.3, a);
    EXPECT_EQ(ga, random_dag(7, 0.3, b));
    EXPECT_NE(ga, random_dag(7, 0.3, c));
}

TEST(Modification, CountRoundsHalfToEven) {
    EXPECT_EQ(modification_count(0.25, 2), 0u);
    EXPECT_EQ(modification_count(0.25, 7), 2u);
    EXPECT_EQ(modification_count(0.25, 8), 2u);
    EXPECT_EQ(modification_count(0.25, 10), 2u);
    EXPECT_EQ(modification_count(0.25, 30), 8u);
    EXPECT_EQ(modification_count(0.25, 3), 1u);
}

TEST(Shuffle, Examples) {
    Rng rng(1);
    const Dag chain = dag_from({"A", "B", "C", "D"}, {{0, 1}, {1, 2}, {2, 3}});
    EXPECT_EQ(shuffle_edges(chain, 0.0, rng), chain);
    const Dag s = shuffle_edges(chain, 0.25, rng);
    EXPECT_EQ(s.edge_count(), 3u);
    EXPECT_EQ(skeleton(s), skeleton(chain));
    std::size_t reversed = 0;
    for (const Edge& e : s.edges()) reversed += !chain.has_edge(e.from, e.to);
    EXPECT_EQ(reversed, 1u);
}

TEST(Shuffle, KeepsSkeletonAndAcyclicity) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const Dag g = random_dag(6, 0.3, rng);
        const Dag s = shuffle_edges(g, 0.25, rng);
        EXPECT_EQ(s.edge_count(), g.edge_count());
        EXPECT_EQ(skeleton(s), skeleton(g));
        EXPECT_FALSE(has_cycle(s.size(), s.edges()));
        std::size_t reversed = 0;
        for (const Edge& e : s.edges()) reversed += !g.has_edge(e.from, e.to);
        EXPECT_LE(reversed, modification_count(0.25, g.edge_count()));
    }
}

TEST(Drop, Examples) {
    Rng rng(4);
    const Dag eight = random_dag(6, 0.25, rng);  // floor(0.25 * 36) = 9
    const Dag g = eight.with_edges({eight.edges().begin(), eight.edges().begin() + 8});
    const Dag d = drop_edges(g, 0.25, rng);
    EXPECT_EQ(d.edge_count(), 6u);
    for (const Edge& e : d.edges()) EXPECT_TRUE(g.has_edge(e.from, e.to));
    EXPECT_EQ(drop_edges(g, 0.0, rng), g);
    EXPECT_EQ(drop_edges(collider(), 0.25, rng).edge_count(), 1u);
}

TEST(Add, Examples) {
    Rng rng(8);
    const Dag base = random_dag(6, 0.25, rng);
    const Dag g = base.with_edges({base.edges().begin(), base.edges().begin() + 8});
    const Dag a = add_edges(g, 0.25, rng);
    EXPECT_EQ(a.edge_count(), 10u);
    EXPECT_FALSE(has_cycle(a.size(), a.edges()));
    for (const Edge& e : g.edges()) EXPECT_TRUE(a.has_edge(e.from, e.to));
    EXPECT_EQ(add_edges(g, 0.0, rng), g);
    EXPECT_THROW(add_edges(dag_from({"A", "B", "C"}, {{0, 1}, {0, 2}, {1, 2}}), 0.25, rng), std::runtime_error);
    EXPECT_EQ(add_edges(collider(), 0.25, rng).edge_count(), 3u);
}

TEST(Modification, DeterministicGivenSeed) {
    Rng base(11);
    const Dag g = random_dag(10, 0.3, base);
    std::set<std::vector<Edge>> distinct;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng a(seed), b(seed);
        EXPECT_EQ(shuffle_edges(g, 0.25, a), shuffle_edges(g, 0.25, b));
        EXPECT_EQ(drop_edges(g, 0.25, a), drop_edges(g, 0.25, b));
        EXPECT_EQ(add_edges(g, 0.25, a), add_edges(g, 0.25, b));
        Rng c(seed);
        distinct.insert(drop_edges(g, 0.25, c).edges());
    }
    EXPECT_GT(distinct.size(), 5u);
}

TEST(ModelSpec, ParsesTargetsAndComments) {
    const Dag g = parse_model_spec("# chain\nB ~ A   # first\nC ~ B\n\n");
    EXPECT_EQ(g.names(), (std::vector<std::string>{"B", "A", "C"}));
    EXPECT_TRUE(g.has_edge(g.index_of("A"), g.index_of("B")));
    EXPECT_TRUE(g.has_edge(g.index_of("B"), g.index_of("C")));
    EXPECT_EQ(g.edge_count(), 2u);

    const Dag multi = parse_model_spec("Y ~ X1 + X2 + X3\nZ\n");
    EXPECT_EQ(multi.parents(multi.index_of("Y")).size(), 3u);
    EXPECT_TRUE(multi.is_exogenous(multi.index_of("Z")));
}

TEST(ModelSpec, ReportsErrorsWithLineNumbers) {
    try {
        parse_model_spec("B ~ A\nC ~\n");
        FAIL() << "expected a parse error";
    } catch (const ModelSpecError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("missing predictor after '~'"), std::string::npos);
    }
    EXPECT_THROW(parse_model_spec("B ~ A\nA ~ B\n"), ModelSpecError);
    EXPECT_THROW(parse_model_spec("B ~ B\n"), ModelSpecError);
    EXPECT_THROW(parse_model_spec("B ~ A +\n"), ModelSpecError);
    EXPECT_THROW(parse_model_spec("B ~ A\nB ~ C\n"), ModelSpecError);
    EXPECT_THROW(parse_model_spec("~ A\n"), ModelSpecError);
}

TEST(ModelSpec, FormatRoundTrips) {
    Rng rng(12);
    for (int i = 0; i < 50; ++i) {
        const Dag g = random_dag(7, 0.2, rng);
        const Dag back = parse_model_spec(format_model_spec(g));
        ASSERT_EQ(back.size(), g.size());
        for (const Edge& e : g.edges())
            EXPECT_TRUE(back.has_edge(back.index_of(g.name(e.from)), back.index_of(g.name(e.to))));
        EXPECT_EQ(back.edge_count(), g.edge_count());
    }
}
