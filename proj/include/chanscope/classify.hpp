#pragma once

// Score ingestion, chunk aggregation, thresholding and ensemble voting.

#include <chanscope/core.hpp>
#include <chanscope/io.hpp>

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace chanscope {

inline constexpr double kDefaultToxicityThreshold = 0.5;
inline constexpr int kDefaultEnsembleThreshold = 3;

/// Message score: the maximum abusive probability over its chunks.
inline double aggregate_chunk_scores(std::span<const double> chunk_scores) {
    if (chunk_scores.empty()) throw Error("aggregate_chunk_scores: message has no scored chunks");
    double best = 0.0;
    for (double p : chunk_scores) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error("aggregate_chunk_scores: score outside [0,1]");
        best = std::max(best, p);
    }
    return best;
}

/// Abusive iff p >= tau.
inline Label apply_threshold(double p_abusive, double tau = kDefaultToxicityThreshold) {
    if (!(tau > 0.0 && tau <= 1.0)) throw Error("apply_threshold: tau must lie in (0,1]");
    if (!(p_abusive >= 0.0 && p_abusive <= 1.0)) throw Error("apply_threshold: p outside [0,1]");
    return p_abusive >= tau ? Label::abusive : Label::neutral;
}

struct EnsembleVote {
    MessageKey message_key;
    std::map<std::string, Label> votes;
    int threshold = kDefaultEnsembleThreshold;
    Label final_label = Label::neutral;

    int abusive_votes() const {
        return static_cast<int>(std::count_if(votes.begin(), votes.end(),
                                              [](const auto& kv) { return kv.second == Label::abusive; }));
    }
};

/// Labels a message abusive when at least `t` classifiers vote abusive.
inline EnsembleVote ensemble_vote(const std::map<std::string, Label>& votes, int t, const MessageKey& key = {}) {
    if (votes.empty()) throw Error("ensemble_vote: no votes");
    if (t < 1 || t > static_cast<int>(votes.size()))
        throw Error("ensemble_vote: threshold must lie in [1, number of classifiers]");
    EnsembleVote v;
    v.message_key = key;
    v.votes = votes;
    v.threshold = t;
    v.final_label = v.abusive_votes() >= t ? Label::abusive : Label::neutral;
    return v;
}

// ---------------------------------------------------------------------------
// Score tables

struct ScoreRecord {
    MessageKey message_key;
    std::string classifier_id;
    double p_abusive = 0.0;
};

/// Message-level scores keyed by (message, classifier). Duplicates are rejected.
class ScoreTable {
public:
    void add(const MessageKey& key, const std::string& classifier, double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error("p_abusive outside [0,1] for " + to_string(key));
        if (!scores_[key].emplace(classifier, p).second)
            throw Error("duplicate score for " + to_string(key) + " / " + classifier);
        classifiers_.insert(classifier);
    }

    std::optional<double> get(const MessageKey& key, const std::string& classifier) const {
        auto it = scores_.find(key);
        if (it == scores_.end()) return std::nullopt;
        auto jt = it->second.find(classifier);
        if (jt == it->second.end()) return std::nullopt;
        return jt->second;
    }

    const std::set<std::string>& classifiers() const { return classifiers_; }
    const std::map<MessageKey, std::map<std::string, double>>& rows() const { return scores_; }
    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [_, m] : scores_) n += m.size();
        return n;
    }

private:
    std::map<MessageKey, std::map<std::string, double>> scores_;
    std::set<std::string> classifiers_;
};

/// Per-chunk scores as produced by external scorers; aggregated with `aggregate_chunk_scores`.
class ChunkScoreTable {
public:
    void add(const MessageKey& key, std::size_t chunk_index, const std::string& classifier, double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error("p_abusive outside [0,1] for " + to_string(key));
        if (!scores_[{key, classifier}].emplace(chunk_index, p).second)
            throw Error("duplicate chunk score for " + to_string(key) + " chunk " + std::to_string(chunk_index) +
                        " / " + classifier);
    }

    ScoreTable aggregate() const {
        ScoreTable t;
        for (const auto& [k, chunks] : scores_) {
            std::vector<double> v;
            v.reserve(chunks.size());
            for (const auto& [_, p] : chunks) v.push_back(p);
            t.add(k.first, k.second, aggregate_chunk_scores(v));
        }
        return t;
    }

    std::size_t size() const { return scores_.size(); }

private:
    std::map<std::pair<MessageKey, std::string>, std::map<std::size_t, double>> scores_;
};

/// Reads scores.jsonl. Records carrying "chunk_index" go to `chunked`, others to `messages`.
inline void read_scores(std::istream& in, ScoreTable& messages, ChunkScoreTable& chunked) {
    io::for_each_jsonl(in, [&](std::size_t, const io::json& j) {
        MessageKey key{io::require<std::string>(j, "channel_id"), io::require<std::int64_t>(j, "message_id")};
        auto classifier = io::require<std::string>(j, "classifier_id");
        if (classifier.empty()) throw Error("classifier_id must be non-empty");
        auto p = io::require<double>(j, "p_abusive");
        if (auto it = j.find("chunk_index"); it != j.end() && !it->is_null()) {
            if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
                throw Error("chunk_index must be a non-negative integer");
            chunked.add(key, it->get<std::size_t>(), classifier, p);
        } else {
            messages.add(key, classifier, p);
        }
    });
}

inline void write_scores(std::ostream& out, const ScoreTable& t) {
    for (const auto& [key, row] : t.rows())
        for (const auto& [classifier, p] : row) {
            io::ordered_json j;
            j["channel_id"] = key.channel_id;
            j["message_id"] = key.message_id;
            j["classifier_id"] = classifier;
            j["p_abusive"] = p;
            out << j.dump() << '\n';
        }
}

struct EnsembleResult {
    std::vector<EnsembleVote> votes;
    /// Number of (message, classifier) pairs without a score; they were counted as neutral.
    std::size_t missing_scores = 0;
};

/// Votes over every message in `keys` with the classifier set `classifiers`.
inline EnsembleResult label_messages(const std::vector<MessageKey>& keys, const ScoreTable& scores,
                                     const std::vector<std::string>& classifiers, int t,
                                     double tau = kDefaultToxicityThreshold) {
    if (classifiers.empty()) throw Error("label_messages: no classifiers");
    EnsembleResult r;
    r.votes.reserve(keys.size());
    for (const auto& key : keys) {
        std::map<std::string, Label> votes;
        for (const auto& c : classifiers) {
            auto p = scores.get(key, c);
            if (!p) {
                ++r.missing_scores;
                votes[c] = Label::neutral;
            } else {
                votes[c] = apply_threshold(*p, tau);
            }
        }
        r.votes.push_back(ensemble_vote(votes, t, key));
    }
    return r;
}

struct MessageLabel {
    MessageKey key;
    Label label = Label::neutral;
    int votes = 0;
};

inline void write_labels(std::ostream& out, const std::vector<EnsembleVote>& votes) {
    for (const auto& v : votes) {
        io::ordered_json j;
        j["channel_id"] = v.message_key.channel_id;
        j["message_id"] = v.message_key.message_id;
        j["label"] = std::string(to_string(v.final_label));
        j["votes"] = v.abusive_votes();
        out << j.dump() << '\n';
    }
}

inline std::map<MessageKey, MessageLabel> read_labels(std::istream& in) {
    std::map<MessageKey, MessageLabel> out;
    io::for_each_jsonl(in, [&](std::size_t, const io::json& j) {
        MessageLabel l;
        l.key = {io::require<std::string>(j, "channel_id"), io::require<std::int64_t>(j, "message_id")};
        l.label = parse_label(io::require<std::string>(j, "label"));
        l.votes = static_cast<int>(io::require<std::int64_t>(j, "votes"));
        if (!out.emplace(l.key, l).second) throw Error("duplicate label for " + to_string(l.key));
    });
    return out;
}

} // namespace chanscope
