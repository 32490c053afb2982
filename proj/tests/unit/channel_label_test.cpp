#include <chanscope/channel_label.hpp>

#include "../support/oracles.hpp"

#include <chanscope/rng.hpp>

#include <gtest/gtest.h>

using namespace chanscope;

namespace {
ConfusionMatrix cm(std::int64_t tn, std::int64_t fp, std::int64_t fn, std::int64_t tp) {
    ConfusionMatrix m;
    m.counts = {{{tn, fp}, {fn, tp}}};
    return m;
}
} // namespace

TEST(Reweight, BayesExample) {
    auto r = reweight_conditional_rates(cm(90, 10, 5, 45), 0.062);
    EXPECT_DOUBLE_EQ(r.fpr, 0.1);
    EXPECT_DOUBLE_EQ(r.tpr, 0.9);
    EXPECT_NEAR(r.p_false, 0.938 * 0.1 / (0.938 * 0.1 + 0.062 * 0.9), 1e-15);
    EXPECT_NEAR(r.p_false, 0.6270, 5e-5);
}

TEST(Reweight, PerfectClassifierAndErrors) {
    EXPECT_EQ(reweight_conditional(cm(10, 0, 1, 9), 0.3), 0.0);
    EXPECT_THROW(reweight_conditional(cm(10, 0, 5, 0), 0.3), Error);
    EXPECT_THROW(reweight_conditional(cm(0, 0, 5, 5), 0.3), Error);
    EXPECT_THROW(reweight_conditional(cm(5, 5, 5, 5), 0.0), Error);
    EXPECT_THROW(reweight_conditional(cm(5, 5, 5, 5), 1.0), Error);
}

TEST(Reweight, RowScalingInvariantAndMonotoneInPi) {
    Rng rng(31);
    for (int i = 0; i < 300; ++i) {
        auto m = cm(1 + rng.index(100), 1 + rng.index(100), rng.index(100), 1 + rng.index(100));
        double pi = 0.01 + 0.98 * rng.uniform();
        double base = reweight_conditional(m, pi);
        auto k = static_cast<std::int64_t>(2 + rng.index(5));
        auto scaled = cm(m.counts[0][0] * k, m.counts[0][1] * k, m.counts[1][0], m.counts[1][1]);
        EXPECT_NEAR(reweight_conditional(scaled, pi), base, 1e-12);
        EXPECT_LT(reweight_conditional(m, std::min(0.999, pi + 0.01)), base + 1e-15);
        EXPECT_NEAR(base,
                    static_cast<double>(oracle::p_false_odds(m.counts[0][0], m.counts[0][1], m.counts[1][0], m.counts[1][1], pi)),
                    1e-12);
    }
}

TEST(MinCount, ReportedAndHandExamples) {
    EXPECT_EQ(min_abusive_count(0.768, 0.01), 18);
    EXPECT_EQ(min_abusive_count(0.0, 0.2), 1);
    EXPECT_EQ(min_abusive_count(0.5, 0.01), 7);
    EXPECT_THROW(min_abusive_count(1.0, 0.01), Error);
    EXPECT_THROW(min_abusive_count(0.5, 0.0), Error);
    EXPECT_THROW(min_abusive_count(0.5, 1.0), Error);
}

TEST(MinCount, ExactPowerBoundaries) {
    // p^k == eps exactly in binary floating point
    EXPECT_EQ(min_abusive_count(0.5, 0.125), 3);
    EXPECT_EQ(min_abusive_count(0.25, 0.0625), 2);
    EXPECT_EQ(min_abusive_count(0.5, 0.5), 1);
}

TEST(MinCount, ClosedFormMatchesSearchAndMonotone) {
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        double p = 0.999 * rng.uniform();
        double eps = 1e-6 + (1.0 - 2e-6) * rng.uniform();
        auto k = min_abusive_count(p, eps);
        EXPECT_EQ(k, oracle::min_k_search(p, eps));
        EXPECT_LE(min_abusive_count(p, std::min(0.999999, eps * 1.5)), k);
        EXPECT_GE(min_abusive_count(std::min(0.9999, p + 0.01), eps), k);
    }
}

TEST(ThresholdDerivation, CombinesSteps) {
    auto d = derive_threshold(cm(90, 10, 5, 45), kDefaultPrevalence, kDefaultMaxError);
    EXPECT_EQ(d.k, min_abusive_count(d.rates.p_false, 0.01));
    EXPECT_EQ(d.k, 10); // 0.627^10 = 0.0094 <= 0.01 < 0.627^9
}

TEST(LabelChannels, CountsAgainstK) {
    std::map<std::string, std::int64_t> counts{{"a", 0}, {"b", 3}, {"c", 18}, {"d", 25}, {"e", 17}};
    auto labels = label_channels(counts, 18);
    int haters = 0;
    for (const auto& l : labels) haters += l.label == ChannelClass::hater;
    EXPECT_EQ(haters, 2);
    EXPECT_EQ(labels[2].label, ChannelClass::hater);
    EXPECT_EQ(labels[0].label, ChannelClass::neutral);
    EXPECT_THROW(label_channels(counts, 0), Error);
}

TEST(LabelChannels, RaisingKNeverCreatesHaters) {
    Rng rng(2);
    std::map<std::string, std::int64_t> counts;
    for (int i = 0; i < 200; ++i) counts["c" + std::to_string(i)] = static_cast<std::int64_t>(rng.index(40));
    auto lo = label_channels(counts, 10), hi = label_channels(counts, 11);
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (lo[i].label == ChannelClass::neutral) EXPECT_EQ(hi[i].label, ChannelClass::neutral);
}
