#include <chanscope/hclust.hpp>
#include <chanscope/topics.hpp>

#include "../support/oracles.hpp"

#include <chanscope/rng.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace chanscope;

namespace {

std::vector<double> axis(std::size_t dim, std::size_t i) {
    std::vector<double> v(dim, 0.0);
    v[i] = 1.0;
    return v;
}

std::vector<TopicVector> axis_topics(std::size_t dim = 12) {
    std::vector<TopicVector> t;
    for (std::size_t i = 0; i < kTopicCount; ++i) t.push_back({std::string(kTopicNames[i]), axis(dim, i), {}});
    return t;
}

std::vector<double> random_distribution(Rng& rng, std::size_t n, double zero_prob = 0.2) {
    std::vector<double> v(n);
    double s = 0.0;
    for (auto& x : v) {
        x = rng.bernoulli(zero_prob) ? 0.0 : rng.uniform();
        s += x;
    }
    if (s == 0.0) {
        v[rng.index(n)] = 1.0;
        return v;
    }
    for (auto& x : v) x /= s;
    return v;
}

} // namespace

TEST(AssignTopics, IdentityAndOrthogonal) {
    auto topics = axis_topics();
    auto a = assign_topics(topics[3].vector, topics);
    EXPECT_EQ(a.topics, std::vector<std::size_t>{3});
    auto none = assign_topics(axis(12, 10), topics);
    EXPECT_TRUE(none.topics.empty());
    auto zero = assign_topics(std::vector<double>(12, 0.0), topics);
    EXPECT_TRUE(zero.zero_norm);
    EXPECT_TRUE(zero.topics.empty());
    EXPECT_THROW(assign_topics(std::vector<double>(5, 1.0), topics), Error);
}

TEST(AssignTopics, StrictThreshold) {
    // doc = (1,1,1,1,0,...) has norm 2, so an axis topic sits at cosine 0.5 exactly
    const std::size_t dim = 12;
    std::vector<double> doc(dim, 0.0);
    for (int i = 0; i < 4; ++i) doc[i] = 1.0;
    std::vector<double> dhat(dim, 0.0), w(dim, 0.0);
    for (int i = 0; i < 4; ++i) dhat[i] = 0.5;
    w[0] = std::sqrt(0.5);
    w[1] = -std::sqrt(0.5);
    auto with_cos = [&](double c) {
        std::vector<double> u(dim);
        for (std::size_t i = 0; i < dim; ++i) u[i] = c * dhat[i] + std::sqrt(1.0 - c * c) * w[i];
        return u;
    };
    std::vector<TopicVector> topics;
    topics.push_back({"Vaccinations", with_cos(0.51), {}});
    topics.push_back({"Police", axis(dim, 0), {}});
    topics.push_back({"Covid-19", with_cos(-0.2), {}});
    for (std::size_t i = 3; i < kTopicCount; ++i) topics.push_back({std::string(kTopicNames[i]), axis(dim, i + 2), {}});
    EXPECT_EQ(dot(doc, topics[1].vector) / norm2(doc), 0.5);
    auto a = assign_topics(doc, topics);
    EXPECT_EQ(a.topics, std::vector<std::size_t>{0});
}

TEST(AssignTopics, ScaleInvariant) {
    Rng rng(3);
    std::vector<TopicVector> topics;
    for (std::size_t i = 0; i < kTopicCount; ++i) {
        std::vector<double> v(6);
        for (auto& x : v) x = rng.normal();
        double n = norm2(v);
        for (auto& x : v) x /= n;
        topics.push_back({std::string(kTopicNames[i]), v, {}});
    }
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> doc(6);
        for (auto& x : doc) x = rng.normal();
        auto scaled = doc;
        double k = std::ldexp(1.0, static_cast<int>(rng.index(20)) - 10);
        for (auto& x : scaled) x *= k;
        EXPECT_EQ(assign_topics(doc, topics).topics, assign_topics(scaled, topics).topics);
    }
}

TEST(Distribution, CountsAndNormalises) {
    auto covid = topic_index("Covid-19"), migration = topic_index("Migration");
    auto d = channel_topic_distribution({{covid}, {covid}, {migration}});
    EXPECT_EQ(d.hit_count, 3);
    EXPECT_DOUBLE_EQ(d.probs[covid], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(d.probs[migration], 1.0 / 3.0);
    auto zero = channel_topic_distribution({{}, {}});
    EXPECT_EQ(zero.hit_count, 0);
    for (double p : zero.probs) EXPECT_EQ(p, 0.0);
    auto multi = channel_topic_distribution({{covid, migration}});
    EXPECT_EQ(multi.hit_count, 2);
    EXPECT_DOUBLE_EQ(multi.probs[covid], 0.5);
}

TEST(Distribution, PermutationInvariant) {
    Rng rng(4);
    std::vector<std::vector<std::size_t>> docs;
    for (int i = 0; i < 100; ++i) {
        std::vector<std::size_t> h;
        for (std::size_t t = 0; t < kTopicCount; ++t)
            if (rng.bernoulli(0.1)) h.push_back(t);
        docs.push_back(h);
    }
    auto a = channel_topic_distribution(docs);
    rng.shuffle(docs);
    auto b = channel_topic_distribution(docs);
    EXPECT_EQ(a.probs, b.probs);
    double s = 0.0;
    for (double p : a.probs) s += p;
    EXPECT_NEAR(s, 1.0, 1e-9);
}

TEST(Distribution, CsvRoundTrip) {
    std::vector<TopicDistribution> d{channel_topic_distribution({{0}, {1, 2}}, "x"), channel_topic_distribution({}, "y")};
    std::ostringstream out;
    write_topic_distributions(out, d);
    std::istringstream in(out.str());
    auto back = read_topic_distributions(in);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].probs, d[0].probs);
    EXPECT_EQ(back[1].hit_count, 0);
}

TEST(ReadTopics, ValidatesNamesAndNorms) {
    auto make = [](double scale, bool drop_last) {
        std::string s = "[";
        for (std::size_t i = 0; i < kTopicCount - (drop_last ? 1 : 0); ++i) {
            if (i) s += ",";
            std::vector<double> v(3, 0.0);
            v[i % 3] = (i == 0 ? scale : 1.0);
            s += "{\"topic_id\":\"" + std::string(kTopicNames[kTopicCount - 1 - i]) + "\",\"terms\":[\"x\"],\"vector\":[" +
                 format_double(v[0]) + "," + format_double(v[1]) + "," + format_double(v[2]) + "]}";
        }
        return s + "]";
    };
    std::istringstream ok(make(1.0, false));
    auto t = read_topics(ok);
    ASSERT_EQ(t.size(), kTopicCount);
    EXPECT_EQ(t[0].topic_id, "Vaccinations");
    std::istringstream bad_norm(make(1.1, false));
    EXPECT_THROW(read_topics(bad_norm), Error);
    std::istringstream missing(make(1.0, true));
    EXPECT_THROW(read_topics(missing), Error);
}

TEST(Jsd, Examples) {
    std::vector<double> p{0.5, 0.5}, q{0.9, 0.1}, a{1, 0}, b{0, 1};
    EXPECT_EQ(js_divergence(p, p), 0.0);
    EXPECT_EQ(js_divergence(a, b), 1.0);
    EXPECT_NEAR(js_divergence(p, q), oracle::jsd_direct(p, q), 1e-15);
    EXPECT_THROW(js_divergence(std::vector<double>{0.5, 0.6}, p), Error);
    EXPECT_THROW(js_divergence(std::vector<double>{1.0}, p), Error);
}

TEST(Jsd, MetricProperties) {
    Rng rng(21);
    for (int i = 0; i < 2000; ++i) {
        std::size_t n = 2 + rng.index(9);
        auto p = random_distribution(rng, n), q = random_distribution(rng, n), r = random_distribution(rng, n);
        double pq = js_divergence(p, q);
        EXPECT_EQ(pq, js_divergence(q, p));
        EXPECT_GE(pq, 0.0);
        EXPECT_LE(pq, 1.0);
        EXPECT_NEAR(pq, oracle::jsd_direct(p, q), 1e-12);
        EXPECT_LE(std::sqrt(pq), std::sqrt(js_divergence(p, r)) + std::sqrt(js_divergence(r, q)) + 1e-12);
    }
}

TEST(SimilarityMatrix, ExcludesZeroHitChannels) {
    std::vector<TopicDistribution> d{channel_topic_distribution({{0}}, "a"), channel_topic_distribution({}, "b"),
                                     channel_topic_distribution({{1}}, "c")};
    std::vector<std::size_t> kept;
    auto m = similarity_matrix(d, &kept);
    EXPECT_EQ(kept, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(m[0][1], 1.0);
    EXPECT_THROW(similarity_matrix({d[0], d[1]}), Error);
}

TEST(HClust, HandComputedSequence) {
    std::vector<std::vector<double>> d{{0, 1, 4, 5}, {1, 0, 3, 6}, {4, 3, 0, 2}, {5, 6, 2, 0}};
    auto t = hierarchical_cluster(d);
    ASSERT_EQ(t.merges.size(), 3u);
    EXPECT_EQ(t.merges[0].cluster_a, 0u);
    EXPECT_EQ(t.merges[0].cluster_b, 1u);
    EXPECT_EQ(t.merges[0].distance, 1.0);
    EXPECT_EQ(t.merges[1].cluster_a, 2u);
    EXPECT_EQ(t.merges[1].cluster_b, 3u);
    EXPECT_EQ(t.merges[2].cluster_a, 4u);
    EXPECT_EQ(t.merges[2].cluster_b, 5u);
    EXPECT_DOUBLE_EQ(t.merges[2].distance, 4.5);
    EXPECT_EQ(t.merges[2].size, 4u);
    EXPECT_EQ(t.leaf_order, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(HClust, TiesBreakBySmallestIds) {
    std::vector<std::vector<double>> d(4, std::vector<double>(4, 1.0));
    for (int i = 0; i < 4; ++i) d[i][i] = 0.0;
    auto t = hierarchical_cluster(d);
    EXPECT_EQ(t.merges[0].cluster_a, 0u);
    EXPECT_EQ(t.merges[0].cluster_b, 1u);
    EXPECT_EQ(t.merges[1].cluster_a, 2u);
    EXPECT_EQ(t.merges[1].cluster_b, 3u);
    EXPECT_EQ(t.merges[2].cluster_a, 4u);
    EXPECT_EQ(t.merges[2].cluster_b, 5u);
}

TEST(HClust, IdenticalDistributionsMergeAtZero) {
    std::vector<TopicDistribution> d(3, channel_topic_distribution({{2}, {5}}));
    auto t = hierarchical_cluster(similarity_matrix(d));
    for (const auto& m : t.merges) EXPECT_EQ(m.distance, 0.0);
}

TEST(HClust, PlantedGroupsSplitAtTop) {
    Rng rng(8);
    std::vector<TopicDistribution> d;
    for (int i = 0; i < 12; ++i) {
        std::vector<std::vector<std::size_t>> docs;
        for (int k = 0; k < 40; ++k) docs.push_back({i < 6 ? rng.index(3) : 6 + rng.index(3)});
        d.push_back(channel_topic_distribution(docs));
    }
    auto t = hierarchical_cluster(similarity_matrix(d));
    const auto& top = t.merges.back();
    EXPECT_EQ(t.merges[top.cluster_a - 12].size, 6u);
    EXPECT_EQ(t.merges[top.cluster_b - 12].size, 6u);
    std::set<std::size_t> first_half(t.leaf_order.begin(), t.leaf_order.begin() + 6);
    EXPECT_TRUE(first_half == (std::set<std::size_t>{0, 1, 2, 3, 4, 5}) ||
                first_half == (std::set<std::size_t>{6, 7, 8, 9, 10, 11}));
}

TEST(HClust, MatchesBruteForceAndIsMonotone) {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 6;
        std::vector<std::vector<double>> pts(n, std::vector<double>(3));
        for (auto& p : pts)
            for (auto& x : p) x = rng.uniform();
        std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
                d[i][j] = std::sqrt(s);
            }
        auto t = hierarchical_cluster(d);
        auto o = oracle::average_linkage(d);
        ASSERT_EQ(t.merges.size(), n - 1);
        for (std::size_t k = 0; k < o.size(); ++k) {
            EXPECT_EQ(t.merges[k].cluster_a, o[k].a);
            EXPECT_EQ(t.merges[k].cluster_b, o[k].b);
            EXPECT_NEAR(t.merges[k].distance, o[k].distance, 1e-12);
            if (k) EXPECT_GE(t.merges[k].distance, t.merges[k - 1].distance - 1e-12);
        }
        EXPECT_EQ(t.leaf_order.size(), n);
    }
}
