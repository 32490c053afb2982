#pragma once

// Character n-gram logistic regression: a self-contained stand-in scorer.

#include <chanscope/core.hpp>
#include <chanscope/rng.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chanscope {

struct BaselineConfig {
    int min_n = 3;
    int max_n = 5;
    int hash_bits = 18;
    int epochs = 40;
    double learning_rate = 0.5;
    double l2 = 1e-6;
    std::uint64_t seed = 7;
};

using SparseFeatures = std::vector<std::pair<std::uint32_t, double>>;

class BaselineModel {
public:
    BaselineModel() = default;

    explicit BaselineModel(BaselineConfig cfg) : cfg_(cfg), weights_(std::size_t{1} << cfg.hash_bits, 0.0) {}

    /// L2-normalised hashed counts of the lower-cased, space-padded text's byte n-grams.
    SparseFeatures features(std::string_view text) const {
        std::string padded = " ";
        for (char c : text) {
            auto u = static_cast<unsigned char>(c);
            padded += u < 0x80 ? static_cast<char>(std::tolower(u)) : c;
        }
        padded += ' ';
        std::map<std::uint32_t, double> counts;
        const std::uint32_t mask = (1u << cfg_.hash_bits) - 1u;
        for (int n = cfg_.min_n; n <= cfg_.max_n; ++n) {
            if (padded.size() < static_cast<std::size_t>(n)) break;
            for (std::size_t i = 0; i + n <= padded.size(); ++i) {
                std::uint64_t h = 1469598103934665603ULL ^ static_cast<std::uint64_t>(n);
                for (int k = 0; k < n; ++k) {
                    h ^= static_cast<unsigned char>(padded[i + k]);
                    h *= 1099511628211ULL;
                }
                counts[static_cast<std::uint32_t>(h ^ (h >> 32)) & mask] += 1.0;
            }
        }
        double norm = 0.0;
        for (const auto& [_, v] : counts) norm += v * v;
        norm = std::sqrt(norm);
        SparseFeatures f;
        f.reserve(counts.size());
        for (const auto& [i, v] : counts) f.emplace_back(i, v / norm);
        return f;
    }

    double predict(std::string_view text) const {
        if (weights_.empty()) throw Error("baseline model is untrained");
        double z = bias_;
        for (const auto& [i, v] : features(text)) z += weights_[i] * v;
        return 1.0 / (1.0 + std::exp(-z));
    }

    const BaselineConfig& config() const { return cfg_; }

    friend BaselineModel baseline_train(const std::vector<std::pair<std::string, Label>>&, const BaselineConfig&);

private:
    BaselineConfig cfg_;
    std::vector<double> weights_;
    double bias_ = 0.0;
};

/// Trains with seeded SGD on the logistic loss. Requires both classes.
inline BaselineModel baseline_train(const std::vector<std::pair<std::string, Label>>& labeled,
                                    const BaselineConfig& cfg = {}) {
    if (labeled.size() < 2) throw Error("baseline_train: need at least two examples");
    bool has_abusive = false, has_neutral = false;
    for (const auto& [_, l] : labeled) (l == Label::abusive ? has_abusive : has_neutral) = true;
    if (!has_abusive || !has_neutral) throw Error("baseline_train: both classes must be present");
    if (cfg.min_n < 1 || cfg.max_n < cfg.min_n || cfg.hash_bits < 4 || cfg.hash_bits > 26)
        throw Error("baseline_train: invalid n-gram configuration");

    BaselineModel model(cfg);
    std::vector<SparseFeatures> xs;
    xs.reserve(labeled.size());
    for (const auto& [text, _] : labeled) xs.push_back(model.features(text));

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(labeled.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double lr = cfg.learning_rate / (1.0 + 0.05 * epoch);
        for (auto idx : order) {
            double z = model.bias_;
            for (const auto& [i, v] : xs[idx]) z += model.weights_[i] * v;
            double p = 1.0 / (1.0 + std::exp(-z));
            double g = p - (labeled[idx].second == Label::abusive ? 1.0 : 0.0);
            for (const auto& [i, v] : xs[idx]) model.weights_[i] -= lr * (g * v + cfg.l2 * model.weights_[i]);
            model.bias_ -= lr * g;
        }
    }
    return model;
}

} // namespace chanscope
