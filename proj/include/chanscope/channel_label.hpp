#pragma once

// Minimum abusive-message count for calling a channel a hater, derived from a
// prevalence-reweighted confusion matrix.

#include <chanscope/core.hpp>
#include <chanscope/metrics.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace chanscope {

inline constexpr double kDefaultPrevalence = 0.062;
inline constexpr double kDefaultMaxError = 0.01;

struct ConditionalRates {
    double fpr = 0.0;     // P(pred abusive | true neutral)
    double tpr = 0.0;     // P(pred abusive | true abusive)
    double p_false = 0.0; // P(true neutral | pred abusive) under prevalence pi
};

/// Bayes' rule with the evaluation set's class priors replaced by (1 - pi, pi).
inline ConditionalRates reweight_conditional_rates(const ConfusionMatrix& cm, double pi) {
    if (!(pi > 0.0 && pi < 1.0)) throw Error("reweight_conditional: prevalence must lie in (0,1)");
    auto neutral_total = cm.row_total(Label::neutral);
    auto abusive_total = cm.row_total(Label::abusive);
    if (neutral_total <= 0 || abusive_total <= 0)
        throw Error("reweight_conditional: both true-class rows must be non-empty");
    ConditionalRates r;
    r.fpr = static_cast<double>(cm.at(Label::neutral, Label::abusive)) / static_cast<double>(neutral_total);
    r.tpr = static_cast<double>(cm.at(Label::abusive, Label::abusive)) / static_cast<double>(abusive_total);
    if (r.fpr == 0.0 && r.tpr == 0.0)
        throw Error("reweight_conditional: classifier never predicts abusive; p_false undefined");
    double false_mass = (1.0 - pi) * r.fpr;
    r.p_false = false_mass / (false_mass + pi * r.tpr);
    return r;
}

inline double reweight_conditional(const ConfusionMatrix& cm, double pi) {
    return reweight_conditional_rates(cm, pi).p_false;
}

/// Smallest k >= 1 with p_false^k <= epsilon.
inline std::int64_t min_abusive_count(double p_false, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("min_abusive_count: epsilon must lie in (0,1)");
    if (!(p_false >= 0.0)) throw Error("min_abusive_count: p_false must be >= 0");
    if (p_false >= 1.0) throw Error("min_abusive_count: p_false >= 1 admits no finite count");
    if (p_false == 0.0) return 1;
    auto k = static_cast<std::int64_t>(std::ceil(std::log(epsilon) / std::log(p_false)));
    if (k < 1) k = 1;
    // closed form can drift by one at exact boundaries
    while (k > 1 && std::pow(p_false, static_cast<double>(k - 1)) <= epsilon) --k;
    while (std::pow(p_false, static_cast<double>(k)) > epsilon) ++k;
    return k;
}

struct ThresholdDerivation {
    ConfusionMatrix evaluation_cm;
    double pi = kDefaultPrevalence;
    ConditionalRates rates;
    double epsilon = kDefaultMaxError;
    std::int64_t k = 1;
};

inline ThresholdDerivation derive_threshold(const ConfusionMatrix& cm, double pi, double epsilon) {
    ThresholdDerivation d;
    d.evaluation_cm = cm;
    d.pi = pi;
    d.rates = reweight_conditional_rates(cm, pi);
    d.epsilon = epsilon;
    d.k = min_abusive_count(d.rates.p_false, epsilon);
    return d;
}

enum class ChannelClass { neutral = 0, hater = 1 };

inline std::string_view to_string(ChannelClass c) { return c == ChannelClass::hater ? "hater" : "neutral"; }

inline ChannelClass parse_channel_class(std::string_view s) {
    if (s == "hater") return ChannelClass::hater;
    if (s == "neutral") return ChannelClass::neutral;
    throw Error("unknown channel label '" + std::string(s) + "'");
}

struct ChannelLabel {
    std::string channel_id;
    std::int64_t abusive_count = 0;
    ChannelClass label = ChannelClass::neutral;
};

/// Hater iff the channel posted or forwarded at least k abusive-classified messages.
inline std::vector<ChannelLabel> label_channels(const std::map<std::string, std::int64_t>& abusive_counts,
                                                std::int64_t k) {
    if (k < 1) throw Error("label_channels: k must be >= 1");
    std::vector<ChannelLabel> out;
    out.reserve(abusive_counts.size());
    for (const auto& [id, n] : abusive_counts) {
        if (n < 0) throw Error("label_channels: negative count for '" + id + "'");
        out.push_back({id, n, n >= k ? ChannelClass::hater : ChannelClass::neutral});
    }
    return out;
}

} // namespace chanscope
