#include <chanscope/metrics.hpp>

#include "../support/oracles.hpp"

#include <chanscope/rng.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace chanscope;

namespace {
constexpr Label A = Label::abusive;
constexpr Label N = Label::neutral;

ConfusionMatrix cm(std::int64_t tn, std::int64_t fp, std::int64_t fn, std::int64_t tp) {
    ConfusionMatrix m;
    m.counts = {{{tn, fp}, {fn, tp}}};
    return m;
}
} // namespace

TEST(Confusion, CountsPairs) {
    std::vector<Label> t{A, A, N}, p{A, A, N};
    auto c = confusion(t, p);
    EXPECT_EQ(c.at(N, A) + c.at(A, N), 0);
    std::vector<Label> t2{N, N, A, A}, p2{N, A, A, N};
    EXPECT_EQ(confusion(t2, p2), cm(1, 1, 1, 1));
    EXPECT_THROW(confusion(std::vector<Label>{}, std::vector<Label>{}), Error);
    EXPECT_THROW(confusion(t, p2), Error);
}

TEST(Prf1, ArithmeticExample) {
    auto r = prf1(cm(90, 10, 30, 70), A);
    EXPECT_DOUBLE_EQ(r.precision, 0.875);
    EXPECT_DOUBLE_EQ(r.recall, 0.7);
    EXPECT_NEAR(r.f1, 2 * 0.875 * 0.7 / (0.875 + 0.7), 1e-15);
    EXPECT_NEAR(r.f1, 0.7778, 5e-5);
}

TEST(Prf1, PerfectAndDegenerate) {
    auto perfect = cm(5, 0, 0, 5);
    EXPECT_EQ(prf1(perfect, A).f1, 1.0);
    EXPECT_EQ(macro_f1(perfect), 1.0);
    auto all_neutral = cm(5, 0, 3, 0);
    EXPECT_EQ(prf1(all_neutral, A).precision, 0.0);
    EXPECT_EQ(prf1(all_neutral, A).f1, 0.0);
    EXPECT_THROW(prf1(ConfusionMatrix{}, A), Error);
}

TEST(Prf1, MacroF1SymmetricUnderClassSwap) {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        auto m = cm(rng.index(50), rng.index(50), rng.index(50), 1 + rng.index(50));
        auto swapped = cm(m.counts[1][1], m.counts[1][0], m.counts[0][1], m.counts[0][0]);
        EXPECT_NEAR(macro_f1(m), macro_f1(swapped), 1e-15);
    }
}

TEST(Prf1, PermutationInvariantOverPairs) {
    Rng rng(9);
    std::vector<Label> t, p;
    for (int i = 0; i < 200; ++i) {
        t.push_back(rng.bernoulli(0.3) ? A : N);
        p.push_back(rng.bernoulli(0.4) ? A : N);
    }
    auto before = prf1(confusion(t, p), A);
    auto perm = rng.permutation(t.size());
    std::vector<Label> t2, p2;
    for (auto i : perm) {
        t2.push_back(t[i]);
        p2.push_back(p[i]);
    }
    auto after = prf1(confusion(t2, p2), A);
    EXPECT_EQ(before.f1, after.f1);
}

TEST(Alpha, PerfectAgreement) {
    std::vector<std::vector<int>> units;
    for (int i = 0; i < 10; ++i) units.push_back({i % 2, i % 2});
    EXPECT_EQ(krippendorff_alpha(units), 1.0);
}

TEST(Alpha, SmallTableMatchesOracle) {
    std::vector<std::vector<int>> units{{1, 1}, {0, 0}, {1, 0}};
    double a = krippendorff_alpha(units);
    EXPECT_NEAR(a, oracle::krippendorff_pairwise(units), 1e-12);
    // n = 6 pairable values, o_01 = o_10 = 1, n_0 = n_1 = 3
    EXPECT_NEAR(a, 1.0 - 5.0 * 2.0 / 18.0, 1e-12);
}

TEST(Alpha, SingleRatingsAreExcluded) {
    std::vector<std::vector<int>> with{{1, 1}, {0, 0}, {1, 0}, {1}, {0}};
    std::vector<std::vector<int>> without{{1, 1}, {0, 0}, {1, 0}};
    EXPECT_EQ(krippendorff_alpha(with), krippendorff_alpha(without));
    EXPECT_THROW(krippendorff_alpha(std::vector<std::vector<int>>{{1}, {0}}), Error);
}

TEST(Alpha, RandomTablesMatchOracleAndInvariances) {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t annotators = 2 + rng.index(4), items = 2 + rng.index(49);
        std::vector<std::vector<int>> units;
        for (std::size_t i = 0; i < items; ++i) {
            std::vector<int> u;
            for (std::size_t a = 0; a < annotators; ++a)
                if (rng.bernoulli(0.8)) u.push_back(rng.bernoulli(0.5) ? 1 : 0);
            units.push_back(u);
        }
        bool pairable = false;
        for (const auto& u : units) pairable |= u.size() >= 2;
        if (!pairable) continue;
        double a = krippendorff_alpha(units);
        EXPECT_NEAR(a, oracle::krippendorff_pairwise(units), 1e-9);
        auto swapped = units;
        for (auto& u : swapped)
            for (auto& v : u) v = 1 - v;
        EXPECT_NEAR(krippendorff_alpha(swapped), a, 1e-12);
        auto permuted = units;
        for (auto& u : permuted) rng.shuffle(u);
        EXPECT_NEAR(krippendorff_alpha(permuted), a, 1e-12);
    }
}

TEST(Alpha, RandomLabelsNearZero) {
    Rng rng(77);
    std::vector<std::vector<int>> units;
    for (int i = 0; i < 1000; ++i) units.push_back({rng.bernoulli(0.5) ? 1 : 0, rng.bernoulli(0.5) ? 1 : 0});
    double a = krippendorff_alpha(units);
    EXPECT_GT(a, -0.1);
    EXPECT_LT(a, 0.1);
}

TEST(Annotations, ReadAndResolve) {
    std::istringstream in("message_key,annotator_id,label\n"
                          "a:1,x,abusive\n"
                          "a:1,y,abusive\n"
                          "a:2,x,neutral\n"
                          "a:2,y,abusive\n");
    auto t = read_annotations(in);
    ASSERT_EQ(t.items.size(), 2u);
    EXPECT_EQ(t.ratings[1].size(), 2u);
    EXPECT_NEAR(krippendorff_alpha(t), oracle::krippendorff_pairwise({{1, 1}, {0, 1}}), 1e-12);
    std::istringstream dup("message_key,annotator_id,label\na:1,x,abusive\na:1,x,neutral\n");
    EXPECT_THROW(read_annotations(dup), ParseError);
}

TEST(Majority, TieIsUnresolved) {
    EXPECT_EQ(resolve_majority(std::vector<Label>{A, A}), A);
    EXPECT_FALSE(resolve_majority(std::vector<Label>{A, N}));
    EXPECT_EQ(resolve_majority(std::vector<Label>{A, N, A}), A);
    EXPECT_EQ(resolve_majority(std::vector<Label>{N}), N);
    EXPECT_THROW(resolve_majority(std::vector<Label>{}), Error);
}
