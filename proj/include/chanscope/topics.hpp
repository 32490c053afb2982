#pragma once

// Per-channel topic distributions over the nine hate-proxy topics, and Jensen-Shannon divergence.

#include <chanscope/core.hpp>
#include <chanscope/io.hpp>

#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chanscope {

inline constexpr std::size_t kTopicCount = 9;

inline constexpr std::array<std::string_view, kTopicCount> kTopicNames = {
    "Vaccinations", "Police", "Covid-19", "Migration", "Extremism",
    "Racism",       "Islamophobia", "Violence", "Antisemitism"};

inline std::size_t topic_index(std::string_view name) {
    for (std::size_t i = 0; i < kTopicCount; ++i)
        if (kTopicNames[i] == name) return i;
    throw Error("unknown topic '" + std::string(name) + "'");
}

struct TopicVector {
    std::string topic_id;
    std::vector<double> vector; // unit norm
    std::vector<std::string> descriptive_terms;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Reads topics.json; requires the nine named topics with unit-norm vectors of a common dimension.
/// The result is ordered as `kTopicNames`.
inline std::vector<TopicVector> read_topics(std::istream& in) {
    io::json j;
    try {
        in >> j;
    } catch (const io::json::exception& e) {
        throw ParseError(1, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_array()) throw Error("topics.json must be an array");
    std::vector<TopicVector> out(kTopicCount);
    std::vector<bool> present(kTopicCount, false);
    std::size_t dim = 0;
    for (const auto& t : j) {
        TopicVector tv;
        tv.topic_id = io::require<std::string>(t, "topic_id");
        auto idx = topic_index(tv.topic_id);
        if (present[idx]) throw Error("topic '" + tv.topic_id + "' listed twice");
        if (auto terms = t.find("terms"); terms != t.end()) tv.descriptive_terms = terms->get<std::vector<std::string>>();
        tv.vector = io::require_vector(t, "vector");
        if (tv.vector.empty()) throw Error("topic '" + tv.topic_id + "' has an empty vector");
        if (dim == 0) dim = tv.vector.size();
        if (tv.vector.size() != dim) throw Error("topic vectors differ in dimension");
        if (std::abs(norm2(tv.vector) - 1.0) > 1e-6) throw Error("topic '" + tv.topic_id + "' vector is not unit norm");
        present[idx] = true;
        out[idx] = std::move(tv);
    }
    for (std::size_t i = 0; i < kTopicCount; ++i)
        if (!present[i]) throw Error("topics.json lacks topic '" + std::string(kTopicNames[i]) + "'");
    return out;
}

struct DocEmbedding {
    MessageKey key;
    std::vector<double> vector;
};

inline std::vector<DocEmbedding> read_doc_embeddings(std::istream& in) {
    std::vector<DocEmbedding> out;
    std::set<MessageKey> seen;
    io::for_each_jsonl(in, [&](std::size_t, const io::json& j) {
        DocEmbedding d;
        d.key = {io::require<std::string>(j, "channel_id"), io::require<std::int64_t>(j, "message_id")};
        d.vector = io::require_vector(j, "vector");
        if (!seen.insert(d.key).second) throw Error("duplicate embedding for " + to_string(d.key));
        out.push_back(std::move(d));
    });
    return out;
}

struct TopicAssignment {
    std::vector<std::size_t> topics; // indices into kTopicNames, ascending
    bool zero_norm = false;
};

/// Topics whose cosine similarity with the document is strictly above `theta`.
inline TopicAssignment assign_topics(std::span<const double> doc, const std::vector<TopicVector>& topics,
                                     double theta = 0.5) {
    TopicAssignment a;
    double n = norm2(doc);
    if (n == 0.0) {
        a.zero_norm = true;
        return a;
    }
    for (std::size_t i = 0; i < topics.size(); ++i) {
        const auto& t = topics[i].vector;
        if (t.size() != doc.size()) throw Error("assign_topics: embedding and topic dimensions differ");
        double cos = dot(doc, t) / (n * norm2(t));
        if (cos > theta) a.topics.push_back(i);
    }
    return a;
}

struct TopicDistribution {
    std::string channel_id;
    std::array<double, kTopicCount> probs{};
    std::int64_t hit_count = 0;
};

/// Counts every (document, topic) hit and normalises; channels without hits get an all-zero vector.
inline TopicDistribution channel_topic_distribution(const std::vector<std::vector<std::size_t>>& hits,
                                                    const std::string& channel_id = {}) {
    TopicDistribution d;
    d.channel_id = channel_id;
    std::array<std::int64_t, kTopicCount> counts{};
    for (const auto& doc : hits)
        for (auto t : doc) {
            if (t >= kTopicCount) throw Error("topic index out of range");
            ++counts[t];
            ++d.hit_count;
        }
    if (d.hit_count > 0)
        for (std::size_t i = 0; i < kTopicCount; ++i)
            d.probs[i] = static_cast<double>(counts[i]) / static_cast<double>(d.hit_count);
    return d;
}

inline void write_topic_distributions(std::ostream& out, const std::vector<TopicDistribution>& dists) {
    std::vector<std::string> header{"channel_id"};
    for (auto n : kTopicNames) header.emplace_back(n);
    header.emplace_back("hit_count");
    io::write_csv_row(out, header);
    for (const auto& d : dists) {
        std::vector<std::string> row{d.channel_id};
        for (double p : d.probs) row.push_back(format_double(p));
        row.push_back(std::to_string(d.hit_count));
        io::write_csv_row(out, row);
    }
}

inline std::vector<TopicDistribution> read_topic_distributions(std::istream& in) {
    std::vector<std::string> header{"channel_id"};
    for (auto n : kTopicNames) header.emplace_back(n);
    header.emplace_back("hit_count");
    std::vector<TopicDistribution> out;
    io::for_each_csv_row(in, header, [&](std::size_t, const auto& f) {
        TopicDistribution d;
        d.channel_id = f[0];
        for (std::size_t i = 0; i < kTopicCount; ++i) d.probs[i] = io::parse_real(f[i + 1]);
        d.hit_count = io::parse_int(f[kTopicCount + 1]);
        out.push_back(d);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Jensen-Shannon divergence

inline void validate_distribution(std::span<const double> p) {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error("distribution has a negative or non-finite entry");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error("distribution does not sum to 1");
}

/// Base-2 JSD in [0, 1], with 0 log 0 = 0.
inline double js_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty()) throw Error("js_divergence: distributions differ in length");
    validate_distribution(p);
    validate_distribution(q);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double m = 0.5 * (p[i] + q[i]);
        double a = p[i] > 0.0 ? p[i] * std::log2(p[i] / m) : 0.0;
        double b = q[i] > 0.0 ? q[i] * std::log2(q[i] / m) : 0.0;
        acc += a + b; // pairwise sum keeps the result exactly symmetric
    }
    double v = 0.5 * acc;
    // rounding can leave tiny excursions outside the range
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

using DistanceMatrix = std::vector<std::vector<double>>;

/// Pairwise JSD over channels with at least one topic hit; `kept` receives their indices.
inline DistanceMatrix similarity_matrix(const std::vector<TopicDistribution>& dists,
                                        std::vector<std::size_t>* kept = nullptr) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dists.size(); ++i)
        if (dists[i].hit_count > 0) idx.push_back(i);
    if (idx.size() < 2) throw Error("similarity_matrix: need at least two channels with topic hits");
    DistanceMatrix m(idx.size(), std::vector<double>(idx.size(), 0.0));
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b)
            m[a][b] = m[b][a] = js_divergence(dists[idx[a]].probs, dists[idx[b]].probs);
    if (kept) *kept = idx;
    return m;
}

} // namespace chanscope
