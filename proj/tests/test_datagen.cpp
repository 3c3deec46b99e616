#include "oracles.hpp"

#include "semsim/datagen.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace semsim;
using oracle::dag_from;

namespace {

double mean(const Eigen::VectorXd& v) { return v.mean(); }

double sd(const Eigen::VectorXd& v) {
    return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

// Kolmogorov-Smirnov distance to the standard normal.
double ks_normal(Eigen::VectorXd v) {
    std::sort(v.data(), v.data() + v.size());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double f = 0.5 * std::erfc(-v(i) / std::sqrt(2.0));
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return d;
}

}  // namespace

TEST(DrawCoefficients, ZeroSignalGivesZeroPaths) {
    Rng rng(1);
    const Dag g = random_dag(5, 0.3, rng);
    const WeightedDag w = draw_coefficients(g, 0.0, 1.0, rng);
    ASSERT_EQ(w.coefficients.size(), g.edge_count());
    for (double c : w.coefficients) EXPECT_EQ(c, 0.0);
}

TEST(DrawCoefficients, SpreadMatchesSdEff) {
    Rng rng(2);
    const Dag g = dag_from({"A", "B"}, {{0, 1}});
    Eigen::VectorXd draws(10000);
    for (Eigen::Index i = 0; i < draws.size(); ++i) draws(i) = draw_coefficients(g, 2.5, 1.0, rng).coefficients[0];
    EXPECT_NEAR(sd(draws), 2.5, 0.1);
    EXPECT_NEAR(mean(draws), 0.0, 0.1);
}

TEST(DrawCoefficients, DeterministicAndValidated) {
    Rng rng(3);
    const Dag g = random_dag(6, 0.3, rng);
    Rng a(9), b(9);
    EXPECT_EQ(draw_coefficients(g, 2.5, 1.0, a).coefficients, draw_coefficients(g, 2.5, 1.0, b).coefficients);
    EXPECT_THROW(draw_coefficients(g, -1.0, 1.0, a), std::invalid_argument);
    EXPECT_THROW(draw_coefficients(g, 1.0, 0.0, a), std::invalid_argument);
}

TEST(Generate, EmptyGraphIsUniform) {
    Rng rng(4);
    const WeightedDag w{dag_from({"A", "B"}, {}), {}, {1.0, 1.0}, {}};
    const Dataset d = generate(w, 5, rng);
    EXPECT_EQ(d.rows(), 5u);
    EXPECT_EQ(d.cols(), 2u);
    EXPECT_TRUE((d.values.array() >= 0.0).all() && (d.values.array() <= 1.0).all());
}

TEST(Generate, ZeroNoiseLimitIsExact) {
    Rng rng(5);
    const WeightedDag w{dag_from({"A", "B"}, {{0, 1}}), {2.0}, {1.0, 1e-12}, {}};
    const Dataset d = generate(w, 50, rng);
    EXPECT_LT((d.values.col(1) - 2.0 * d.values.col(0)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Generate, OlsRecoversSlope) {
    Rng rng(6);
    const WeightedDag w{dag_from({"A", "B"}, {{0, 1}}), {2.0}, {1.0, 1.0}, {}};
    const Dataset d = generate(w, 100000, rng);
    const auto ne = oracle::normal_equations(d.values.col(1), d.values.col(0));
    EXPECT_NEAR(ne.beta(1), 2.0, 0.05);
}

TEST(Generate, DeterministicGivenSeed) {
    Rng g(7);
    const WeightedDag w = draw_coefficients(random_dag(6, 0.3, g), 2.5, 1.0, g);
    Rng a(42), b(42);
    EXPECT_EQ(generate(w, 30, a).values, generate(w, 30, b).values);
}

TEST(Scenario, ExactKeepsModel) {
    Rng rng(8);
    GenerationRecipe r;
    r.model_dag = random_dag(6, 0.25, rng);
    const auto s = generate_scenario(r, 20, rng);
    EXPECT_EQ(s.generating_dag, r.model_dag);
    EXPECT_EQ(s.data.columns, r.model_dag.names());
}

TEST(Scenario, RandomIsStandardNormal) {
    Rng rng(9);
    GenerationRecipe r;
    r.model_dag = random_dag(5, 0.3, rng);
    r.scenario = ScenarioKind::Random;
    const auto s = generate_scenario(r, 10000, rng);
    EXPECT_EQ(s.generating_dag.edge_count(), 0u);
    for (Eigen::Index c = 0; c < s.data.values.cols(); ++c) {
        const Eigen::VectorXd col = s.data.values.col(c);
        EXPECT_NEAR(mean(col), 0.0, 0.05);
        EXPECT_NEAR(sd(col), 1.0, 0.05);
        EXPECT_LT(ks_normal(col), 1.63 / std::sqrt(10000.0));  // 1% critical value
    }
}

TEST(Scenario, MisspecifiedStructures) {
    Rng rng(10);
    const Dag base = random_dag(6, 0.25, rng);
    GenerationRecipe r;
    r.model_dag = base.with_edges({base.edges().begin(), base.edges().begin() + 8});

    r.scenario = ScenarioKind::Overspecified;
    auto over = generate_scenario(r, 20, rng).generating_dag;
    EXPECT_EQ(over.edge_count(), 6u);
    for (const Edge& e : over.edges()) EXPECT_TRUE(r.model_dag.has_edge(e.from, e.to));

    r.scenario = ScenarioKind::Underspecified;
    auto under = generate_scenario(r, 20, rng).generating_dag;
    EXPECT_EQ(under.edge_count(), 10u);
    for (const Edge& e : r.model_dag.edges()) EXPECT_TRUE(under.has_edge(e.from, e.to));

    r.scenario = ScenarioKind::Shuffled;
    auto shuffled = generate_scenario(r, 20, rng).generating_dag;
    EXPECT_EQ(shuffled.edge_count(), 8u);
    std::size_t reversed = 0;
    for (const Edge& e : shuffled.edges()) {
        EXPECT_TRUE(r.model_dag.adjacent(e.from, e.to));
        reversed += !r.model_dag.has_edge(e.from, e.to);
    }
    EXPECT_LE(reversed, 2u);
}

TEST(Csv, RoundTripsBitForBit) {
    Rng rng(11);
    GenerationRecipe r;
    r.model_dag = random_dag(5, 0.3, rng);
    const Dataset d = generate_scenario(r, 40, rng).data;
    std::stringstream buf;
    write_csv(buf, d);
    const Dataset back = read_csv(buf);
    EXPECT_EQ(back.columns, d.columns);
    EXPECT_EQ(back.values, d.values);
}

TEST(Csv, RejectsBadCells) {
    std::stringstream bad("A,B\n1,2\n3,x\n");
    EXPECT_THROW(read_csv(bad), std::runtime_error);
    std::stringstream ragged("A,B\n1,2\n3\n");
    EXPECT_THROW(read_csv(ragged), std::runtime_error);
}

TEST(Csv, ColumnsForNamesMissingColumns) {
    std::stringstream buf("A,C\n1,2\n3,4\n");
    const Dataset d = read_csv(buf);
    const Dag g = dag_from({"A", "B", "C"}, {{0, 1}});
    try {
        columns_for(g, d);
        FAIL() << "expected missing-column error";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("B"), std::string::npos);
    }
    const Dag h = dag_from({"C", "A"}, {{1, 0}});
    const Eigen::MatrixXd cols = columns_for(h, d);
    EXPECT_EQ(cols(0, 0), 2.0);
    EXPECT_EQ(cols(1, 1), 3.0);
}
