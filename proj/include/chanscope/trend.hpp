#pragma once

// Monthly prevalence of abusive messages.

#include <chanscope/archive.hpp>
#include <chanscope/classify.hpp>
#include <chanscope/core.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace chanscope {

struct MonthlyBucket {
    YearMonth month;
    std::int64_t total = 0;
    std::int64_t abusive = 0;
    double share = 0.0;
};

using MonthlySeries = std::vector<MonthlyBucket>;

/// Months [first, end_exclusive).
struct MonthWindow {
    YearMonth first;
    YearMonth end_exclusive;
};

/// Buckets messages of the (optionally restricted) channel set by UTC calendar month. Every
/// month of the window is emitted, including empty ones.
inline MonthlySeries monthly_series(const Archive& archive, const std::map<MessageKey, MessageLabel>& labels,
                                    const MonthWindow& window, const std::set<std::string>* subset = nullptr) {
    MonthlySeries series;
    if (!(window.first < window.end_exclusive)) return series;
    std::map<YearMonth, std::size_t> slot;
    for (YearMonth m = window.first; m < window.end_exclusive; m = m.next()) {
        slot.emplace(m, series.size());
        series.push_back({m, 0, 0, 0.0});
    }
    for (const auto& [id, msgs] : archive.messages) {
        if (subset && !subset->count(id)) continue;
        for (const auto& m : msgs) {
            auto it = slot.find(YearMonth::of(m.timestamp));
            if (it == slot.end()) continue;
            auto lt = labels.find(m.key());
            if (lt == labels.end()) throw Error("monthly_series: message " + to_string(m.key()) + " has no label");
            auto& b = series[it->second];
            ++b.total;
            b.abusive += lt->second.label == Label::abusive;
        }
    }
    for (auto& b : series) b.share = b.total ? static_cast<double>(b.abusive) / static_cast<double>(b.total) : 0.0;
    return series;
}

/// Message-weighted share over the whole series.
inline double overall_prevalence(const MonthlySeries& series) {
    if (series.empty()) throw Error("overall_prevalence: empty series");
    std::int64_t total = 0, abusive = 0;
    for (const auto& b : series) {
        total += b.total;
        abusive += b.abusive;
    }
    if (total == 0) throw Error("overall_prevalence: series has no messages");
    return static_cast<double>(abusive) / static_cast<double>(total);
}

} // namespace chanscope
