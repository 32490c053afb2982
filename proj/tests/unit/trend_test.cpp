#include <chanscope/trend.hpp>

#include "../support/generators.hpp"

#include <gtest/gtest.h>

using namespace chanscope;

namespace {

struct Corpus {
    Archive archive;
    std::map<MessageKey, MessageLabel> labels;
    std::int64_t next_id = 1;

    void add(const std::string& channel, Timestamp ts, bool abusive) {
        auto m = gen::message(channel, next_id++, ts);
        archive.channels.try_emplace(channel, Channel{channel, 1, false, {}, true});
        labels[m.key()] = {m.key(), abusive ? Label::abusive : Label::neutral, abusive ? 6 : 0};
        archive.messages[channel].push_back(std::move(m));
    }

    void add_month(const std::string& channel, int y, unsigned mo, int total, int abusive) {
        for (int i = 0; i < total; ++i) add(channel, make_timestamp(y, mo, 1 + static_cast<unsigned>(i % 27), i % 24), i < abusive);
    }
};

} // namespace

TEST(Trend, MonthlyShares) {
    Corpus c;
    c.add_month("x", 2020, 1, 4, 1);
    c.add_month("x", 2020, 2, 10, 0);
    c.add_month("y", 2020, 3, 5, 2);
    auto s = monthly_series(c.archive, c.labels, {{2020, 1}, {2020, 4}});
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].share, 0.25);
    EXPECT_EQ(s[1].share, 0.0);
    EXPECT_EQ(s[2].share, 0.4);
    EXPECT_EQ(s[2].total, 5);
}

TEST(Trend, PooledVersusMonthAveraged) {
    Corpus c;
    c.add_month("x", 2021, 5, 100, 10);
    c.add_month("x", 2021, 6, 300, 6);
    auto s = monthly_series(c.archive, c.labels, {{2021, 5}, {2021, 7}});
    EXPECT_DOUBLE_EQ(overall_prevalence(s), 0.04);
    EXPECT_DOUBLE_EQ((s[0].share + s[1].share) / 2.0, 0.06);
}

TEST(Trend, UtcMonthBoundariesAndEmptyMonths) {
    Corpus c;
    c.add("x", make_timestamp(2020, 1, 31, 23, 59, 59), true);
    c.add("x", make_timestamp(2020, 2, 1, 0, 0, 0), false);
    c.add("x", make_timestamp(2020, 4, 15), false);
    auto s = monthly_series(c.archive, c.labels, {{2020, 1}, {2020, 5}});
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s[0].total, 1);
    EXPECT_EQ(s[1].total, 1);
    EXPECT_EQ(s[2].total, 0);
    EXPECT_EQ(s[2].share, 0.0);
    EXPECT_EQ(to_string(s[3].month), "2020-04");
}

TEST(Trend, WindowCrossesYearAndSubsetFilters) {
    Corpus c;
    c.add_month("x", 2020, 12, 3, 3);
    c.add_month("y", 2021, 1, 2, 0);
    c.add_month("x", 2021, 3, 1, 0); // outside the window
    std::set<std::string> only_x{"x"};
    auto s = monthly_series(c.archive, c.labels, {{2020, 12}, {2021, 2}}, &only_x);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].share, 1.0);
    EXPECT_EQ(s[1].total, 0);
    EXPECT_THROW(overall_prevalence(monthly_series(c.archive, c.labels, {{2019, 1}, {2019, 3}})), Error);
    EXPECT_TRUE(monthly_series(c.archive, c.labels, {{2020, 5}, {2020, 5}}).empty());
}

TEST(Trend, AbusiveNeverExceedsTotal) {
    Rng rng(4);
    Corpus c;
    for (int i = 0; i < 2000; ++i)
        c.add(gen::channel_name(rng.index(10)), make_timestamp(2020, 1, 1) + std::chrono::seconds(rng.index(86400 * 700)),
              rng.bernoulli(0.1));
    auto s = monthly_series(c.archive, c.labels, {{2020, 1}, {2022, 1}});
    std::int64_t total = 0;
    for (const auto& b : s) {
        EXPECT_LE(b.abusive, b.total);
        EXPECT_GE(b.share, 0.0);
        EXPECT_LE(b.share, 1.0);
        total += b.total;
    }
    EXPECT_EQ(total, 2000);
}

TEST(Trend, MissingLabelIsAnError) {
    Corpus c;
    c.add("x", make_timestamp(2020, 1, 2), false);
    c.labels.clear();
    EXPECT_THROW(monthly_series(c.archive, c.labels, {{2020, 1}, {2020, 2}}), Error);
}
