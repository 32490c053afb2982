#pragma once

// Two-layer dense classifier (ReLU hidden layer, softmax output) over node embeddings.

#include <chanscope/channel_label.hpp>
#include <chanscope/io.hpp>
#include <chanscope/metrics.hpp>
#include <chanscope/nn.hpp>
#include <chanscope/rng.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace chanscope {

struct HeadParams {
    nn::Matrix w1; // d x h
    nn::Matrix b1; // 1 x h
    nn::Matrix w2; // h x 2
    nn::Matrix b2; // 1 x 2

    Eigen::Index input_dim() const { return w1.rows(); }

    void register_with(nn::ParameterPacker& p) {
        p.add(&w1);
        p.add(&b1);
        p.add(&w2);
        p.add(&b2);
    }

    HeadParams zeros_like() const {
        return {nn::Matrix::Zero(w1.rows(), w1.cols()), nn::Matrix::Zero(1, b1.cols()),
                nn::Matrix::Zero(w2.rows(), w2.cols()), nn::Matrix::Zero(1, 2)};
    }
};

inline HeadParams init_head(Eigen::Index input_dim, Eigen::Index hidden, Rng& rng) {
    return {nn::glorot_uniform(input_dim, hidden, rng), nn::Matrix::Zero(1, hidden), nn::glorot_uniform(hidden, 2, rng),
            nn::Matrix::Zero(1, 2)};
}

inline nn::Matrix head_logits(const HeadParams& p, const nn::Matrix& x, nn::Matrix* hidden_pre = nullptr,
                              nn::Matrix* hidden = nullptr) {
    if (x.cols() != p.input_dim()) throw Error("head: embedding dimension mismatch");
    nn::Matrix z1 = x * p.w1;
    z1.rowwise() += p.b1.row(0);
    nn::Matrix h = z1.cwiseMax(0.0);
    nn::Matrix logits = h * p.w2;
    logits.rowwise() += p.b2.row(0);
    if (hidden_pre) *hidden_pre = std::move(z1);
    if (hidden) *hidden = std::move(h);
    return logits;
}

inline nn::Matrix head_predict_proba(const HeadParams& p, const nn::Matrix& x) {
    return nn::softmax_rows(head_logits(p, x));
}

/// Mean categorical cross-entropy over rows of `x`; adds gradients to `grad` when given.
inline double head_objective(const HeadParams& p, const nn::Matrix& x, const std::vector<ChannelClass>& y,
                             HeadParams* grad = nullptr) {
    const auto n = x.rows();
    if (static_cast<std::size_t>(n) != y.size() || n == 0) throw Error("head: label count mismatch");
    nn::Matrix z1, h;
    nn::Matrix logits = head_logits(p, x, &z1, &h);
    double loss = 0.0;
    nn::Matrix dlogits(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        double m = logits.row(i).maxCoeff();
        double lse = m + std::log((logits.row(i).array() - m).exp().sum());
        int t = static_cast<int>(y[static_cast<std::size_t>(i)]);
        loss += lse - logits(i, t);
        for (int c = 0; c < 2; ++c) dlogits(i, c) = std::exp(logits(i, c) - lse) - (c == t ? 1.0 : 0.0);
    }
    loss /= static_cast<double>(n);
    if (!grad) return loss;
    dlogits /= static_cast<double>(n);
    grad->w2 += h.transpose() * dlogits;
    grad->b2 += dlogits.colwise().sum();
    nn::Matrix dz1 = (dlogits * p.w2.transpose()).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    grad->w1 += x.transpose() * dz1;
    grad->b1 += dz1.colwise().sum();
    return loss;
}

struct ChannelPrediction {
    ChannelClass label = ChannelClass::neutral;
    std::array<double, 2> probabilities{}; // {neutral, hater}
};

/// Argmax of the softmax output; exact ties go to neutral.
inline ChannelPrediction predict_channel(const nn::Vector& embedding, const HeadParams& head) {
    if (embedding.size() != head.input_dim()) throw Error("predict_channel: embedding dimension mismatch");
    nn::Matrix x = embedding.transpose();
    nn::Matrix p = head_predict_proba(head, x);
    ChannelPrediction r;
    r.probabilities = {p(0, 0), p(0, 1)};
    r.label = p(0, 1) > p(0, 0) ? ChannelClass::hater : ChannelClass::neutral;
    return r;
}

// ---------------------------------------------------------------------------
// Training

struct DataSplit {
    std::vector<std::size_t> train, validation, test;
};

/// Stratified split with exact target sizes round(f_train n), round(f_val n) and the remainder;
/// each class is apportioned across the parts by largest remainder and every part receives at
/// least one member of each class.
inline DataSplit stratified_split(const std::vector<ChannelClass>& labels, Rng& rng, double f_train = 0.70,
                                  double f_val = 0.15) {
    const std::size_t n = labels.size();
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<int>(labels[i])].push_back(i);
    for (auto& c : by_class) {
        if (c.size() < 3) throw Error("stratified_split: every class needs at least three members");
        rng.shuffle(c);
    }
    std::array<std::size_t, 3> target{static_cast<std::size_t>(std::llround(f_train * static_cast<double>(n))),
                                      static_cast<std::size_t>(std::llround(f_val * static_cast<double>(n))), 0};
    if (target[0] + target[1] > n) throw Error("stratified_split: fractions exceed the data");
    target[2] = n - target[0] - target[1];
    for (auto t : target)
        if (t < 2) throw Error("stratified_split: every part needs at least two members");

    // class-1 counts per part; class 0 fills the rest
    const auto n1 = by_class[1].size();
    std::array<std::size_t, 3> c1{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
        double exact = static_cast<double>(n1) * static_cast<double>(target[s]) / static_cast<double>(n);
        c1[s] = static_cast<std::size_t>(std::floor(exact));
        rem[s] = exact - std::floor(exact);
        assigned += c1[s];
    }
    while (assigned < n1) {
        int best = 0;
        for (int s = 1; s < 3; ++s)
            if (rem[s] > rem[best]) best = s;
        ++c1[best];
        rem[best] = -1.0;
        ++assigned;
    }
    // every part needs 1 <= c1 <= size - 1; move class-1 slots between parts until it holds
    for (int guard = 0; guard < 16; ++guard) {
        bool changed = false;
        for (int s = 0; s < 3; ++s) {
            if (c1[s] < 1) {
                int donor = -1;
                for (int t = 0; t < 3; ++t)
                    if (c1[t] > 1 && (donor < 0 || c1[t] > c1[donor])) donor = t;
                if (donor < 0) throw Error("stratified_split: cannot place every class in every part");
                --c1[donor];
                ++c1[s];
                changed = true;
            } else if (c1[s] + 1 > target[s]) {
                int taker = -1;
                for (int t = 0; t < 3; ++t)
                    if (c1[t] + 1 < target[t] && (taker < 0 || target[t] - c1[t] > target[taker] - c1[taker])) taker = t;
                if (taker < 0) throw Error("stratified_split: cannot place every class in every part");
                --c1[s];
                ++c1[taker];
                changed = true;
            }
        }
        if (!changed) break;
    }

    DataSplit split;
    std::array<std::vector<std::size_t>*, 3> parts{&split.train, &split.validation, &split.test};
    std::size_t o0 = 0, o1 = 0;
    for (int s = 0; s < 3; ++s) {
        for (std::size_t i = 0; i < c1[s]; ++i) parts[s]->push_back(by_class[1][o1++]);
        for (std::size_t i = 0; i < target[s] - c1[s]; ++i) parts[s]->push_back(by_class[0][o0++]);
        std::sort(parts[s]->begin(), parts[s]->end());
    }
    return split;
}

struct HeadConfig {
    int epochs_max = 150;
    int patience = 60;
    double min_delta = 0.05;
    Eigen::Index hidden = 16;
    double learning_rate = 1e-2;
    std::size_t batch_size = 32;
    double train_fraction = 0.70;
    double validation_fraction = 0.15;
    std::uint64_t seed = 42;
};

struct TrainReport {
    DataSplit split;
    std::vector<double> epoch_losses;
    std::vector<double> validation_accuracy;
    int stopping_epoch = 0;
    int best_epoch = 0;
    ConfusionMatrix test_confusion; // neutral/hater mapped onto neutral/abusive
    double f1_neutral = 0.0;
    double f1_hater = 0.0;
    double macro_f1 = 0.0;
    double test_accuracy = 0.0;
};

struct HeadResult {
    HeadParams params;
    TrainReport report;
};

namespace detail {

inline nn::Matrix gather_rows(const nn::Matrix& x, const std::vector<std::size_t>& idx) {
    nn::Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

inline std::vector<ChannelClass> gather(const std::vector<ChannelClass>& y, const std::vector<std::size_t>& idx) {
    std::vector<ChannelClass> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(y[i]);
    return out;
}

inline std::vector<ChannelClass> argmax_labels(const nn::Matrix& logits) {
    std::vector<ChannelClass> out;
    out.reserve(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
        out.push_back(logits(i, 1) > logits(i, 0) ? ChannelClass::hater : ChannelClass::neutral);
    return out;
}

inline double accuracy(const std::vector<ChannelClass>& a, const std::vector<ChannelClass>& b) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return a.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(a.size());
}

inline Label as_label(ChannelClass c) { return c == ChannelClass::hater ? Label::abusive : Label::neutral; }

} // namespace detail

inline ConfusionMatrix channel_confusion(const std::vector<ChannelClass>& truth, const std::vector<ChannelClass>& pred) {
    std::vector<Label> t, p;
    for (auto c : truth) t.push_back(detail::as_label(c));
    for (auto c : pred) p.push_back(detail::as_label(c));
    return confusion(t, p);
}

/// Mini-batch Adam on the cross-entropy; early stopping on validation accuracy (an epoch improves
/// when it beats the best so far by more than `min_delta`). Returns the best-validation weights.
inline HeadResult train_head(const nn::Matrix& embeddings, const std::vector<ChannelClass>& labels, const HeadConfig& cfg) {
    const auto n = static_cast<std::size_t>(embeddings.rows());
    if (labels.size() != n) throw Error("train_head: one label per embedding required");
    if (n < 10) throw Error("train_head: need at least 10 labelled nodes");
    bool has[2] = {false, false};
    for (auto c : labels) has[static_cast<int>(c)] = true;
    if (!has[0] || !has[1]) throw Error("train_head: labels contain a single class");
    if (cfg.epochs_max < 1 || cfg.patience < 1 || cfg.batch_size < 1 || cfg.hidden < 1)
        throw Error("train_head: invalid configuration");

    Rng rng(cfg.seed);
    Rng split_rng = rng.fork(1), init_rng = rng.fork(2), batch_rng = rng.fork(3);
    HeadResult result;
    auto& rep = result.report;
    rep.split = stratified_split(labels, split_rng, cfg.train_fraction, cfg.validation_fraction);

    nn::Matrix x_train = detail::gather_rows(embeddings, rep.split.train);
    nn::Matrix x_val = detail::gather_rows(embeddings, rep.split.validation);
    nn::Matrix x_test = detail::gather_rows(embeddings, rep.split.test);
    auto y_train = detail::gather(labels, rep.split.train);
    auto y_val = detail::gather(labels, rep.split.validation);
    auto y_test = detail::gather(labels, rep.split.test);

    HeadParams head = init_head(embeddings.cols(), cfg.hidden, init_rng);
    nn::ParameterPacker packer;
    head.register_with(packer);
    nn::Vector params = packer.pack();
    nn::Adam adam(params.size(), {cfg.learning_rate});

    double best = -std::numeric_limits<double>::infinity();
    nn::Vector best_params = params;
    int wait = 0;
    std::vector<std::size_t> order(rep.split.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < cfg.epochs_max; ++epoch) {
        batch_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + cfg.batch_size)));
            nn::Matrix xb = detail::gather_rows(x_train, batch);
            auto yb = detail::gather(y_train, batch);
            HeadParams grad = head.zeros_like();
            double loss = head_objective(head, xb, yb, &grad);
            if (!std::isfinite(loss)) throw Error("train_head: non-finite loss at epoch " + std::to_string(epoch));
            epoch_loss += loss * static_cast<double>(batch.size());
            nn::ParameterPacker gp;
            grad.register_with(gp);
            adam.step(params, gp.pack());
            packer.unpack(params);
        }
        rep.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
        double acc = detail::accuracy(detail::argmax_labels(head_logits(head, x_val)), y_val);
        rep.validation_accuracy.push_back(acc);
        rep.stopping_epoch = epoch + 1;
        if (acc - cfg.min_delta > best) {
            best = acc;
            best_params = params;
            rep.best_epoch = epoch;
            wait = 0;
        } else if (++wait >= cfg.patience) {
            break;
        }
    }
    packer.unpack(best_params);
    result.params = head;

    auto pred = detail::argmax_labels(head_logits(result.params, x_test));
    rep.test_confusion = channel_confusion(y_test, pred);
    rep.f1_neutral = prf1(rep.test_confusion, Label::neutral).f1;
    rep.f1_hater = prf1(rep.test_confusion, Label::abusive).f1;
    rep.macro_f1 = macro_f1(rep.test_confusion);
    rep.test_accuracy = detail::accuracy(pred, y_test);
    return result;
}

// ---------------------------------------------------------------------------
// Serialisation

namespace detail {

inline io::ordered_json matrix_to_json(const nn::Matrix& m) {
    io::ordered_json rows = io::ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        io::ordered_json row = io::ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nn::Matrix matrix_from_json(const io::json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw Error(std::string("head model: '") + name + "' has the wrong shape");
    nn::Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw Error(std::string("head model: '") + name + "' has the wrong shape");
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
            if (!std::isfinite(m(r, c))) throw Error(std::string("head model: '") + name + "' is not finite");
        }
    }
    return m;
}

} // namespace detail

inline io::ordered_json to_json(const HeadParams& p) {
    io::ordered_json j;
    j["input_dim"] = p.w1.rows();
    j["hidden"] = p.w1.cols();
    j["w1"] = detail::matrix_to_json(p.w1);
    j["b1"] = detail::matrix_to_json(p.b1);
    j["w2"] = detail::matrix_to_json(p.w2);
    j["b2"] = detail::matrix_to_json(p.b2);
    return j;
}

inline HeadParams head_from_json(const io::json& j) {
    auto d = io::require<std::int64_t>(j, "input_dim");
    auto h = io::require<std::int64_t>(j, "hidden");
    if (d < 1 || h < 1) throw Error("head model: invalid dimensions");
    return {detail::matrix_from_json(j.at("w1"), d, h, "w1"), detail::matrix_from_json(j.at("b1"), 1, h, "b1"),
            detail::matrix_from_json(j.at("w2"), h, 2, "w2"), detail::matrix_from_json(j.at("b2"), 1, 2, "b2")};
}

} // namespace chanscope
