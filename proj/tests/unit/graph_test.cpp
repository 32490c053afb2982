#include <chanscope/graph.hpp>

#include "../support/generators.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace chanscope;

namespace {

Archive archive_of(const std::vector<RawMessage>& msgs, std::set<std::string> extra = {}) {
    Archive a;
    for (const auto& m : msgs) {
        extra.insert(m.channel_id);
        a.messages[m.channel_id].push_back(m);
    }
    for (const auto& id : extra) {
        a.channels[id] = Channel{id, 1, false, {}, true};
        a.messages[id];
    }
    return a;
}

Timestamp t0() { return make_timestamp(2020, 3, 1); }

} // namespace

TEST(BuildGraph, NoReferencesNoEdges) {
    auto g = build_graph(archive_of({gen::message("a", 1, t0()), gen::message("b", 1, t0())}));
    EXPECT_EQ(g.node_count(), 2u);
    EXPECT_EQ(g.edge_count(), 0u);
}

TEST(BuildGraph, WeightsAccumulate) {
    auto g = build_graph(archive_of({gen::message("A", 1, t0(), {}, "B"), gen::message("A", 2, t0(), {"C"}, "B"),
                                     gen::message("A", 3, t0(), {"A"})},
                                    {"B", "C"}));
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(*g.weight("A", "B"), 2);
    EXPECT_EQ(*g.weight("A", "C"), 1);
    EXPECT_FALSE(g.weight("A", "A"));
}

TEST(BuildGraph, FilterDropsEdgesToExcludedNodes) {
    auto a = archive_of({gen::message("A", 1, t0(), {"B", "X"})}, {"B", "X"});
    a.channels["X"].is_german = false;
    a.messages["B"].push_back(gen::message("B", 1, t0()));
    auto g = build_graph(a, german_and_active(make_timestamp(2020, 1, 1), make_timestamp(2021, 1, 1)));
    EXPECT_EQ(g.node_ids(), (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(g.edge_count(), 1u);
}

TEST(BuildGraph, MessageOrderInvariant) {
    Rng rng(6);
    std::vector<RawMessage> msgs;
    for (int i = 0; i < 300; ++i) {
        auto src = gen::channel_name(rng.index(12));
        std::vector<std::string> m{gen::channel_name(rng.index(12))};
        std::optional<std::string> fwd;
        if (rng.bernoulli(0.5)) {
            auto f = gen::channel_name(rng.index(12));
            if (f != src) fwd = f;
        }
        msgs.push_back(gen::message(src, i, t0(), m, fwd));
    }
    auto g1 = build_graph(archive_of(msgs));
    rng.shuffle(msgs);
    auto g2 = build_graph(archive_of(msgs));
    EXPECT_EQ(g1, g2);
}

TEST(GraphStats, FormulaExamples) {
    std::set<std::string> nodes{"a", "b", "c"};
    ChannelGraph complete(nodes);
    for (const auto& s : nodes)
        for (const auto& d : nodes) complete.add_edge(s, d);
    EXPECT_EQ(graph_stats(complete).density, 1.0);

    std::set<std::string> ring;
    for (int i = 0; i < 10; ++i) ring.insert(gen::channel_name(i));
    ChannelGraph cycle(ring);
    for (int i = 0; i < 10; ++i) cycle.add_edge(gen::channel_name(i), gen::channel_name((i + 1) % 10));
    auto s = graph_stats(cycle);
    EXPECT_DOUBLE_EQ(s.density, 10.0 / 90.0);
    EXPECT_DOUBLE_EQ(s.avg_in_degree, 1.0);
    EXPECT_DOUBLE_EQ(s.avg_out_degree, 1.0);

    auto published = graph_stats_from_counts(2420, 146865);
    EXPECT_NEAR(published.density, 0.02509, 5e-6);
    EXPECT_NEAR(published.avg_in_degree, 60.69, 5e-3);
    EXPECT_THROW(graph_stats(ChannelGraph({std::string("x")})), Error);
}

TEST(GraphStats, MatchesBruteForceOnRandomGraphs) {
    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng.index(49);
        auto g = gen::random_graph(rng, n, rng.uniform() * 0.5);
        std::size_t m = 0, indeg = 0;
        auto in = g.in_neighbors();
        for (const auto& u : g.node_ids())
            for (const auto& v : g.node_ids())
                if (u != v && g.weight(u, v)) ++m;
        for (const auto& l : in) indeg += l.size();
        auto s = graph_stats(g);
        EXPECT_EQ(s.n_edges, m);
        EXPECT_DOUBLE_EQ(s.density, static_cast<double>(m) / static_cast<double>(n * (n - 1)));
        EXPECT_DOUBLE_EQ(s.avg_in_degree, static_cast<double>(indeg) / static_cast<double>(n));
        EXPECT_GE(s.density, 0.0);
        EXPECT_LE(s.density, 1.0);
    }
}

TEST(FirstDegree, EitherDirection) {
    ChannelGraph g(std::set<std::string>{"s", "a", "b", "c", "d", "e"});
    g.add_edge("s", "a");
    g.add_edge("s", "b");
    g.add_edge("c", "s");
    g.add_edge("a", "e");
    EXPECT_EQ(first_degree_network(g, {"s"}), (std::set<std::string>{"a", "b", "c"}));
    EXPECT_TRUE(first_degree_network(g, {}).empty());
    auto bigger = first_degree_network(g, {"s", "e"});
    EXPECT_TRUE(bigger.count("a"));
    EXPECT_FALSE(bigger.count("d"));
    EXPECT_THROW(first_degree_network(g, {"zz"}), Error);
}

TEST(Export, CsvGolden) {
    ChannelGraph g(std::set<std::string>{"b", "a", "c"});
    g.add_edge("c", "a", 2);
    g.add_edge("a", "b");
    std::ostringstream out;
    export_graph(out, g, GraphFormat::edge_list_csv);
    EXPECT_EQ(out.str(), "src,dst,weight\na,b,1\nc,a,2\n");
    std::ostringstream empty;
    export_graph(empty, ChannelGraph{}, GraphFormat::edge_list_csv);
    EXPECT_EQ(empty.str(), "src,dst,weight\n");
    EXPECT_THROW(parse_graph_format("dot"), Error);
}

TEST(Export, RoundTripsOnRandomGraphs) {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        auto g = gen::random_graph(rng, 100, 0.03);
        std::ostringstream xml, csv;
        export_graph(xml, g, GraphFormat::graphml);
        export_graph(csv, g, GraphFormat::edge_list_csv);
        std::istringstream xin(xml.str()), cin(csv.str());
        EXPECT_EQ(import_graphml(xin), g);
        std::set<std::string> nodes(g.node_ids().begin(), g.node_ids().end());
        EXPECT_EQ(import_edge_list(cin, nodes), g);
    }
}

TEST(Export, GraphmlEscapesIds) {
    ChannelGraph g(std::set<std::string>{"a&b", "<c>", "q\"t"});
    g.add_edge("a&b", "<c>", 3);
    std::ostringstream out;
    export_graph(out, g, GraphFormat::graphml);
    std::istringstream in(out.str());
    EXPECT_EQ(import_graphml(in), g);
}

TEST(Import, RejectsInvalidEdges) {
    std::istringstream loop("src,dst,weight\na,a,1\n");
    EXPECT_THROW(import_edge_list(loop), ParseError);
    std::istringstream zero("src,dst,weight\na,b,0\n");
    EXPECT_THROW(import_edge_list(zero), ParseError);
    std::istringstream dup("src,dst,weight\na,b,1\na,b,2\n");
    EXPECT_THROW(import_edge_list(dup), ParseError);
}
