#pragma once

// Confusion matrices, F1 scores, Krippendorff's alpha and majority resolution of annotations.

#include <chanscope/core.hpp>
#include <chanscope/io.hpp>

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chanscope {

/// counts[true][predicted], indices per `index_of(Label)`.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, 2>, 2> counts{};

    std::int64_t at(Label truth, Label predicted) const { return counts[index_of(truth)][index_of(predicted)]; }
    std::int64_t& at(Label truth, Label predicted) { return counts[index_of(truth)][index_of(predicted)]; }

    std::int64_t total() const { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }

    std::int64_t row_total(Label truth) const { return counts[index_of(truth)][0] + counts[index_of(truth)][1]; }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred) {
    if (y_true.size() != y_pred.size()) throw Error("confusion: label lists differ in length");
    if (y_true.empty()) throw Error("confusion: empty label lists");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) ++cm.at(y_true[i], y_pred[i]);
    return cm;
}

struct PrecisionRecallF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Zero denominators yield 0 (precision, recall) and F1 = 0 when p + r = 0.
inline PrecisionRecallF1 prf1(const ConfusionMatrix& cm, Label positive) {
    if (cm.total() <= 0) throw Error("prf1: empty confusion matrix");
    Label negative = positive == Label::abusive ? Label::neutral : Label::abusive;
    double tp = static_cast<double>(cm.at(positive, positive));
    double fp = static_cast<double>(cm.at(negative, positive));
    double fn = static_cast<double>(cm.at(positive, negative));
    PrecisionRecallF1 r;
    r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    r.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

inline double macro_f1(const ConfusionMatrix& cm) {
    return 0.5 * (prf1(cm, Label::neutral).f1 + prf1(cm, Label::abusive).f1);
}

inline io::ordered_json to_json(const ConfusionMatrix& cm) {
    return io::ordered_json::array({io::ordered_json::array({cm.counts[0][0], cm.counts[0][1]}),
                                    io::ordered_json::array({cm.counts[1][0], cm.counts[1][1]})});
}

inline ConfusionMatrix confusion_from_json(const io::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 || !j[1].is_array() ||
        j[1].size() != 2)
        throw Error("confusion matrix must be a 2x2 array");
    ConfusionMatrix cm;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            cm.counts[r][c] = j[r][c].get<std::int64_t>();
            if (cm.counts[r][c] < 0) throw Error("confusion counts must be non-negative");
        }
    return cm;
}

// ---------------------------------------------------------------------------
// Annotations

/// Sparse item x annotator rating table over categorical values.
struct AnnotationTable {
    std::vector<MessageKey> items;
    /// ratings[i] maps annotator id -> category for items[i]
    std::vector<std::map<std::string, int>> ratings;

    void add(const MessageKey& item, const std::string& annotator, int category) {
        auto it = index_.find(item);
        std::size_t idx;
        if (it == index_.end()) {
            idx = items.size();
            index_.emplace(item, idx);
            items.push_back(item);
            ratings.emplace_back();
        } else {
            idx = it->second;
        }
        if (!ratings[idx].emplace(annotator, category).second)
            throw Error("annotator '" + annotator + "' rated " + to_string(item) + " twice");
    }

private:
    std::map<MessageKey, std::size_t> index_;
};

/// Reads annotations.csv (message_key,annotator_id,label).
inline AnnotationTable read_annotations(std::istream& in) {
    AnnotationTable t;
    io::for_each_csv_row(in, {"message_key", "annotator_id", "label"}, [&](std::size_t, const auto& f) {
        t.add(parse_message_key(f[0]), f[1], index_of(parse_label(f[2])));
    });
    return t;
}

/// Nominal Krippendorff's alpha from the coincidence matrix. Items with fewer than two ratings
/// are not pairable and are skipped. Returns exactly 1 when no pairable values disagree.
inline double krippendorff_alpha(const std::vector<std::vector<int>>& units) {
    std::map<int, std::size_t> category_index;
    for (const auto& u : units)
        if (u.size() >= 2)
            for (int v : u) category_index.emplace(v, 0);
    if (category_index.empty()) throw Error("krippendorff_alpha: no item has two or more ratings");
    std::size_t k = 0;
    for (auto& [_, idx] : category_index) idx = k++;

    std::vector<std::vector<double>> o(k, std::vector<double>(k, 0.0));
    for (const auto& u : units) {
        if (u.size() < 2) continue;
        std::vector<double> n_u(k, 0.0);
        for (int v : u) n_u[category_index[v]] += 1.0;
        double m = static_cast<double>(u.size());
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t d = 0; d < k; ++d)
                o[c][d] += n_u[c] * (n_u[d] - (c == d ? 1.0 : 0.0)) / (m - 1.0);
    }
    std::vector<double> n_c(k, 0.0);
    double n = 0.0, disagree = 0.0;
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t d = 0; d < k; ++d) {
            n_c[c] += o[c][d];
            n += o[c][d];
            if (c != d) disagree += o[c][d];
        }
    if (disagree == 0.0) return 1.0;
    double expected = 0.0;
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t d = 0; d < k; ++d)
            if (c != d) expected += n_c[c] * n_c[d];
    return 1.0 - (n - 1.0) * disagree / expected;
}

inline double krippendorff_alpha(const AnnotationTable& table) {
    std::vector<std::vector<int>> units;
    units.reserve(table.ratings.size());
    for (const auto& r : table.ratings) {
        std::vector<int> u;
        for (const auto& [_, v] : r) u.push_back(v);
        units.push_back(std::move(u));
    }
    return krippendorff_alpha(units);
}

/// Strict majority over the ratings of one item; ties are unresolved.
inline std::optional<Label> resolve_majority(std::span<const Label> ratings) {
    if (ratings.empty()) throw Error("resolve_majority: no ratings");
    std::size_t abusive = 0;
    for (auto l : ratings) abusive += l == Label::abusive;
    std::size_t neutral = ratings.size() - abusive;
    if (abusive > neutral) return Label::abusive;
    if (neutral > abusive) return Label::neutral;
    return std::nullopt;
}

} // namespace chanscope
