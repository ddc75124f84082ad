#include "posabm/topology.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "support/stats.hpp"

namespace posabm {
namespace {

TEST(PeerGraph, RejectsSelfLoopsAndDuplicates) {
    EXPECT_THROW(PeerGraph(3, {{1, 1}}), TopologyError);
    EXPECT_THROW(PeerGraph(3, {{0, 1}, {1, 0}}), TopologyError);
    EXPECT_THROW(PeerGraph(2, {{0, 2}}), TopologyError);
}

TEST(PeerGraph, AdjacencyIsSymmetricAndChannelsDoubleEdges) {
    PeerGraph g(4, {{2, 0}, {1, 2}, {3, 1}});
    EXPECT_EQ(g.channel_count(), 6u);
    for (NodeId a = 0; a < 4; ++a)
        for (NodeId b : g.neighbors(a)) EXPECT_TRUE(g.adjacent(b, a));
    EXPECT_EQ(g.channel(0), (Channel{0, 2}));
    EXPECT_EQ(g.channel(1), (Channel{2, 0}));
}

TEST(GenerateEr, TwoNodesUnitDegreeIsSingleEdge) {
    Rng rng(1);
    const auto g = generate_er(2, 1.0, rng);
    ASSERT_EQ(g.edge_count(), 1u);
    EXPECT_TRUE(g.adjacent(0, 1));
}

TEST(GenerateEr, FourNodesDegreeThreeIsComplete) {
    Rng rng(2);
    const auto g = generate_er(4, 3.0, rng);
    EXPECT_EQ(g.edge_count(), 6u);
    EXPECT_EQ(diameter(g), 1u);
}

TEST(GenerateEr, MeanDegreeMatchesEnsemble) {
    Rng rng(3);
    double total = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto g = generate_er(128, 8.0, rng);
        EXPECT_TRUE(is_connected(g));
        total += g.mean_degree();
    }
    EXPECT_NEAR(total / 50.0, 8.0, 1.5);
}

TEST(GenerateEr, SimpleConnectedSymmetric) {
    Rng rng(4);
    for (int i = 0; i < 20; ++i) {
        const auto g = generate_er(40, 4.0, rng);
        EXPECT_TRUE(is_connected(g));
        std::size_t degree_sum = 0;
        for (NodeId v = 0; v < g.node_count(); ++v) {
            degree_sum += g.degree(v);
            EXPECT_FALSE(g.adjacent(v, v));
            for (NodeId w : g.neighbors(v)) EXPECT_TRUE(g.adjacent(w, v));
        }
        EXPECT_EQ(degree_sum, g.channel_count());
    }
}

TEST(GenerateEr, FailsBelowConnectivityRegime) {
    Rng rng(5);
    try {
        generate_er(200, 0.2, rng);
        FAIL() << "expected TopologyError";
    } catch (const TopologyError& e) {
        EXPECT_NE(std::string(e.what()).find("ln(N)/N"), std::string::npos);
    }
}

TEST(GenerateEr, RejectsBadParameters) {
    Rng rng(6);
    EXPECT_THROW(generate_er(1, 0.5, rng), std::invalid_argument);
    EXPECT_THROW(generate_er(5, 0.0, rng), std::invalid_argument);
    EXPECT_THROW(generate_er(5, 4.5, rng), std::invalid_argument);
}

TEST(Diameter, CompleteAndPathGraphs) {
    EXPECT_EQ(diameter(complete_graph(5)), 1u);
    EXPECT_EQ(diameter(path_graph(4)), 3u);
    for (std::size_t n = 2; n < 12; ++n) {
        EXPECT_EQ(diameter(complete_graph(n)), 1u);
        EXPECT_EQ(diameter(path_graph(n)), n - 1);
    }
}

TEST(Diameter, DisconnectedThrows) {
    EXPECT_THROW(diameter(PeerGraph(4, {{0, 1}, {2, 3}})), TopologyError);
}

TEST(PredictedDiameter, ReferenceValues) {
    // ln(128) / ln(128 * 8 / 127), evaluated independently.
    EXPECT_NEAR(predicted_diameter(128, 8.0 / 127.0), 2.3245656040239395, 1e-12);
    // n = round(e^2) = 7 and n p = e give ln 7 ~ 1.95.
    EXPECT_NEAR(predicted_diameter(7, std::exp(1.0) / 7.0), 2.0, 0.06);
    EXPECT_NEAR(predicted_diameter(1000, 0.01), 3.0, 1e-12);
}

TEST(PredictedDiameter, OutsideRegimeThrows) {
    EXPECT_THROW(predicted_diameter(100, 0.01), std::domain_error);
    EXPECT_THROW(predicted_diameter(100, 0.005), std::domain_error);
}

TEST(PredictedDiameter, DecreasesWithP) {
    double prev = predicted_diameter(128, 0.01);
    for (double p = 0.02; p <= 1.0; p += 0.01) {
        const double d = predicted_diameter(128, p);
        EXPECT_LT(d, prev);
        prev = d;
    }
}

TEST(SampleDirectedChannel, SingleEdgeIsBalanced) {
    PeerGraph g(2, {{0, 1}});
    Rng rng(7);
    int forward = 0;
    for (int i = 0; i < 10000; ++i)
        if (sample_directed_channel(g, rng) == Channel{0, 1}) ++forward;
    EXPECT_NEAR(forward / 10000.0, 0.5, 0.02);
}

TEST(SampleDirectedChannel, TriangleUniformOverSixChannels) {
    const auto g = complete_graph(3);
    Rng rng(8);
    std::map<std::pair<NodeId, NodeId>, int> freq;
    for (int i = 0; i < 100000; ++i) {
        const auto c = sample_directed_channel(g, rng);
        ASSERT_TRUE(g.adjacent(c.sender, c.receiver));
        ++freq[{c.sender, c.receiver}];
    }
    ASSERT_EQ(freq.size(), 6u);
    for (const auto& [pair, count] : freq) EXPECT_NEAR(count / 100000.0, 1.0 / 6.0, 0.02);
}

TEST(SampleDirectedChannel, ChiSquareUniformOnErGraph) {
    Rng rng(9);
    const auto g = generate_er(30, 4.0, rng);
    std::map<std::pair<NodeId, NodeId>, std::size_t> index;
    for (std::size_t c = 0; c < g.channel_count(); ++c) {
        const auto ch = g.channel(c);
        index[{ch.sender, ch.receiver}] = c;
    }
    std::vector<std::size_t> counts(g.channel_count(), 0);
    for (int i = 0; i < 100000; ++i) {
        const auto ch = sample_directed_channel(g, rng);
        ASSERT_TRUE(g.adjacent(ch.sender, ch.receiver));
        ++counts[index.at({ch.sender, ch.receiver})];
    }
    EXPECT_GT(test::chi_square_uniform_p(counts), 0.01);
}

TEST(SampleDirectedChannel, EdgelessThrows) {
    Rng rng(10);
    EXPECT_THROW(sample_directed_channel(PeerGraph(3, {}), rng), TopologyError);
}

TEST(EdgeList, RoundTrip) {
    Rng rng(11);
    const auto g = generate_er(20, 3.0, rng);
    std::stringstream s;
    write_edge_list(s, g);
    EXPECT_TRUE(s.str().starts_with("# nodes=20\n"));
    const auto back = read_edge_list(s);
    EXPECT_EQ(back.node_count(), g.node_count());
    ASSERT_EQ(back.edge_count(), g.edge_count());
    for (std::size_t i = 0; i < g.edge_count(); ++i) EXPECT_EQ(back.edges()[i], g.edges()[i]);
}

TEST(EdgeList, MalformedInput) {
    std::istringstream missing_header("0 1\n");
    EXPECT_THROW(read_edge_list(missing_header), TopologyError);
    std::istringstream bad_line("# nodes=3\n0 x\n");
    EXPECT_THROW(read_edge_list(bad_line), TopologyError);
}

}  // namespace
}  // namespace posabm
