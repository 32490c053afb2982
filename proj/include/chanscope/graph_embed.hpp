#pragma once

// Directed GraphSAGE-style encoder trained with a corrupted-sample contrastive (Deep Graph
// Infomax) objective. Gradients are derived by hand; see `dgi_objective`.

#include <chanscope/graph.hpp>
#include <chanscope/nn.hpp>
#include <chanscope/rng.hpp>

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chanscope {

using nn::Matrix;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// h' = act(h W_self + mean_in(h) W_in + mean_out(h) W_out + b), one row per node.
struct SageLayer {
    Matrix w_self, w_in, w_out;
    Matrix bias; // 1 x out
    nn::Activation activation = nn::Activation::relu;

    Eigen::Index input_dim() const { return w_self.rows(); }
    Eigen::Index output_dim() const { return w_self.cols(); }
};

struct EncoderParams {
    std::vector<SageLayer> layers;

    Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().input_dim(); }
    Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().output_dim(); }

    EncoderParams zeros_like() const {
        EncoderParams z = *this;
        for (auto& l : z.layers) {
            l.w_self.setZero();
            l.w_in.setZero();
            l.w_out.setZero();
            l.bias.setZero();
        }
        return z;
    }

    void register_with(nn::ParameterPacker& p) {
        for (auto& l : layers) {
            p.add(&l.w_self);
            p.add(&l.w_in);
            p.add(&l.w_out);
            p.add(&l.bias);
        }
    }
};

inline EncoderParams init_encoder(Eigen::Index input_dim, const std::vector<Eigen::Index>& layer_dims,
                                  const std::vector<nn::Activation>& activations, Rng& rng) {
    if (layer_dims.empty() || layer_dims.size() != activations.size())
        throw Error("init_encoder: layer dimensions and activations must match");
    EncoderParams p;
    Eigen::Index in = input_dim;
    for (std::size_t i = 0; i < layer_dims.size(); ++i) {
        SageLayer l;
        l.w_self = nn::glorot_uniform(in, layer_dims[i], rng);
        l.w_in = nn::glorot_uniform(in, layer_dims[i], rng);
        l.w_out = nn::glorot_uniform(in, layer_dims[i], rng);
        l.bias = Matrix::Zero(1, layer_dims[i]);
        l.activation = activations[i];
        p.layers.push_back(std::move(l));
        in = layer_dims[i];
    }
    return p;
}

// ---------------------------------------------------------------------------
// Neighbourhood aggregation operators

struct Neighborhoods {
    std::vector<std::vector<std::size_t>> in;  // sources of edges into the node
    std::vector<std::vector<std::size_t>> out; // targets of edges leaving the node

    static Neighborhoods of(const ChannelGraph& g) { return {g.in_neighbors(), g.out_neighbors()}; }

    std::size_t size() const { return in.size(); }
};

/// Row-normalised mean operators for one layer.
struct LayerOperators {
    SparseMatrix in_mean;
    SparseMatrix out_mean;
};

struct SampleSizes {
    std::size_t in = 10;
    std::size_t out = 10;
};

namespace detail {

/// Mean operator over `adj`; with a sample size, at most that many neighbours are drawn
/// uniformly without replacement per node.
inline SparseMatrix mean_operator(const std::vector<std::vector<std::size_t>>& adj, std::optional<std::size_t> sample,
                                  Rng* rng) {
    const auto n = static_cast<Eigen::Index>(adj.size());
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<std::size_t> buf;
    for (std::size_t v = 0; v < adj.size(); ++v) {
        const auto& nb = adj[v];
        if (nb.empty()) continue;
        if (sample && nb.size() > *sample) {
            buf = nb;
            // partial Fisher-Yates: the first `sample` slots become the draw
            for (std::size_t i = 0; i < *sample; ++i) std::swap(buf[i], buf[i + rng->index(buf.size() - i)]);
            buf.resize(*sample);
            std::sort(buf.begin(), buf.end());
        } else {
            buf = nb;
        }
        double w = 1.0 / static_cast<double>(buf.size());
        for (auto u : buf) trips.emplace_back(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u), w);
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

} // namespace detail

/// All neighbours, every layer: the deterministic full-batch mode.
inline std::vector<LayerOperators> full_batch_operators(const Neighborhoods& nb, std::size_t layers) {
    LayerOperators op{detail::mean_operator(nb.in, std::nullopt, nullptr), detail::mean_operator(nb.out, std::nullopt, nullptr)};
    return std::vector<LayerOperators>(layers, op);
}

/// Independent neighbour samples per layer and direction.
inline std::vector<LayerOperators> sampled_operators(const Neighborhoods& nb, const std::vector<SampleSizes>& sizes,
                                                     Rng& rng) {
    std::vector<LayerOperators> ops;
    for (const auto& s : sizes) {
        if (s.in < 1 || s.out < 1) throw Error("neighbour sample sizes must be >= 1");
        LayerOperators op;
        op.in_mean = detail::mean_operator(nb.in, s.in, &rng);
        op.out_mean = detail::mean_operator(nb.out, s.out, &rng);
        ops.push_back(std::move(op));
    }
    return ops;
}

// ---------------------------------------------------------------------------
// Encoder forward / backward

struct EncoderCache {
    std::vector<Matrix> input, agg_in, agg_out, pre, output;
};

inline Matrix encoder_forward(const EncoderParams& p, const Matrix& features, const std::vector<LayerOperators>& ops,
                              EncoderCache* cache = nullptr) {
    if (ops.size() != p.layers.size()) throw Error("encoder: one operator set per layer required");
    if (features.cols() != p.input_dim()) throw Error("encoder: feature dimension mismatch");
    if (cache) *cache = EncoderCache{};
    Matrix h = features;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& L = p.layers[l];
        Matrix ai = ops[l].in_mean * h;
        Matrix ao = ops[l].out_mean * h;
        Matrix z = h * L.w_self + ai * L.w_in + ao * L.w_out;
        z.rowwise() += L.bias.row(0);
        Matrix out = nn::activate(z, L.activation);
        if (cache) {
            cache->input.push_back(h);
            cache->agg_in.push_back(std::move(ai));
            cache->agg_out.push_back(std::move(ao));
            cache->pre.push_back(z);
            cache->output.push_back(out);
        }
        h = std::move(out);
    }
    return h;
}

/// Accumulates parameter gradients into `grad` given dLoss/dOutput.
inline void encoder_backward(const EncoderParams& p, const std::vector<LayerOperators>& ops, const EncoderCache& cache,
                             Matrix d_out, EncoderParams& grad) {
    for (std::size_t li = p.layers.size(); li-- > 0;) {
        const auto& L = p.layers[li];
        auto& G = grad.layers[li];
        Matrix dz = d_out.cwiseProduct(nn::activation_grad(cache.pre[li], cache.output[li], L.activation));
        G.w_self += cache.input[li].transpose() * dz;
        G.w_in += cache.agg_in[li].transpose() * dz;
        G.w_out += cache.agg_out[li].transpose() * dz;
        G.bias += dz.colwise().sum();
        if (li == 0) break;
        Matrix dh = dz * L.w_self.transpose();
        dh += ops[li].in_mean.transpose() * (dz * L.w_in.transpose());
        dh += ops[li].out_mean.transpose() * (dz * L.w_out.transpose());
        d_out = std::move(dh);
    }
}

/// Embedding of every node. Without sampling sizes the full neighbourhoods are used.
inline Matrix encode_all(const ChannelGraph& g, const Matrix& features, const EncoderParams& p,
                         const std::vector<SampleSizes>* sampling = nullptr, std::uint64_t sampler_seed = 0) {
    if (static_cast<std::size_t>(features.rows()) != g.node_count())
        throw Error("encode: one feature row per node required");
    auto nb = Neighborhoods::of(g);
    if (sampling) {
        Rng rng(sampler_seed);
        return encoder_forward(p, features, sampled_operators(nb, *sampling, rng));
    }
    return encoder_forward(p, features, full_batch_operators(nb, p.layers.size()));
}

inline nn::Vector encode(const ChannelGraph& g, const Matrix& features, const EncoderParams& p, const std::string& node,
                         const std::vector<SampleSizes>* sampling = nullptr, std::uint64_t sampler_seed = 0) {
    auto idx = g.index_of(node);
    return encode_all(g, features, p, sampling, sampler_seed).row(static_cast<Eigen::Index>(idx)).transpose();
}

// ---------------------------------------------------------------------------
// Contrastive objective

struct DgiModel {
    EncoderParams encoder;
    Matrix discriminator;      // d x d bilinear weight
    Matrix discriminator_bias; // 1 x 1

    DgiModel zeros_like() const {
        return {encoder.zeros_like(), Matrix::Zero(discriminator.rows(), discriminator.cols()), Matrix::Zero(1, 1)};
    }

    void register_with(nn::ParameterPacker& p) {
        encoder.register_with(p);
        p.add(&discriminator);
        p.add(&discriminator_bias);
    }
};

inline DgiModel init_dgi_model(Eigen::Index input_dim, const std::vector<Eigen::Index>& layer_dims,
                               const std::vector<nn::Activation>& activations, Rng& rng) {
    DgiModel m;
    m.encoder = init_encoder(input_dim, layer_dims, activations, rng);
    auto d = m.encoder.output_dim();
    m.discriminator = nn::glorot_uniform(d, d, rng);
    m.discriminator_bias = Matrix::Zero(1, 1);
    return m;
}

/// Binary cross-entropy of the bilinear discriminator D(h, s) = h^T W s + b separating true node
/// embeddings (label 1) from embeddings of the row-permuted feature matrix (label 0), where
/// s = sigmoid(mean of true embeddings). Averaged over the 2n samples. Adds gradients to `grad`.
inline double dgi_objective(const DgiModel& m, const Matrix& features, const std::vector<std::size_t>& permutation,
                            const std::vector<LayerOperators>& ops, DgiModel* grad = nullptr) {
    const auto n = features.rows();
    if (static_cast<std::size_t>(n) != permutation.size()) throw Error("dgi: permutation size mismatch");
    Matrix corrupted(n, features.cols());
    for (Eigen::Index i = 0; i < n; ++i) corrupted.row(i) = features.row(static_cast<Eigen::Index>(permutation[i]));

    EncoderCache cache_true, cache_fake;
    Matrix h = encoder_forward(m.encoder, features, ops, grad ? &cache_true : nullptr);
    Matrix hc = encoder_forward(m.encoder, corrupted, ops, grad ? &cache_fake : nullptr);

    nn::RowVector mean = h.colwise().mean();
    nn::RowVector s = mean.unaryExpr([](double x) { return nn::sigmoid(x); });
    nn::Vector ws = m.discriminator * s.transpose();
    const double b = m.discriminator_bias(0, 0);
    nn::Vector logit_true = (h * ws).array() + b;
    nn::Vector logit_fake = (hc * ws).array() + b;

    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += nn::softplus(-logit_true(i)) + nn::softplus(logit_fake(i));
    loss *= scale;
    if (!grad) return loss;

    nn::Vector dl_true(n), dl_fake(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dl_true(i) = (nn::sigmoid(logit_true(i)) - 1.0) * scale;
        dl_fake(i) = nn::sigmoid(logit_fake(i)) * scale;
    }
    // logits = H W s + b
    nn::RowVector weighted = dl_true.transpose() * h + dl_fake.transpose() * hc; // sum_i dl_i h_i
    grad->discriminator += weighted.transpose() * s;
    grad->discriminator_bias(0, 0) += dl_true.sum() + dl_fake.sum();
    Matrix dh = dl_true * ws.transpose();
    Matrix dhc = dl_fake * ws.transpose();
    nn::RowVector ds = weighted * m.discriminator;
    nn::RowVector dmean = ds.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix()));
    dh.rowwise() += dmean / static_cast<double>(n);

    encoder_backward(m.encoder, ops, cache_true, std::move(dh), grad->encoder);
    encoder_backward(m.encoder, ops, cache_fake, std::move(dhc), grad->encoder);
    return loss;
}

struct DgiConfig {
    int epochs_max = 500;
    int patience = 20;
    double learning_rate = 1e-3;
    std::vector<Eigen::Index> layer_dims{32, 32};
    std::vector<nn::Activation> activations{nn::Activation::relu, nn::Activation::relu};
    std::vector<SampleSizes> sample_sizes{{10, 10}, {10, 10}};
    bool full_batch = false;
    std::uint64_t seed = 42;

    void validate() const {
        if (epochs_max < 1) throw Error("dgi: epochs_max must be >= 1");
        if (patience < 1) throw Error("dgi: patience must be >= 1");
        if (!(learning_rate > 0.0)) throw Error("dgi: learning_rate must be positive");
        if (layer_dims.empty() || layer_dims.size() != activations.size())
            throw Error("dgi: layer dimensions and activations must match");
        if (!full_batch && sample_sizes.size() != layer_dims.size())
            throw Error("dgi: one neighbour sample size per layer required");
        for (const auto& s : sample_sizes)
            if (s.in < 1 || s.out < 1) throw Error("dgi: neighbour sample sizes must be >= 1");
    }
};

struct DgiResult {
    DgiModel model;           // parameters of the lowest-loss epoch
    std::vector<double> losses;
    int stopping_epoch = 0;   // number of epochs run
    int best_epoch = 0;
};

/// Adam on the contrastive objective; early stopping on the training loss with `patience`.
inline DgiResult dgi_train(const ChannelGraph& g, const Matrix& features, const DgiConfig& cfg) {
    cfg.validate();
    if (g.node_count() == 0) throw Error("dgi: graph is empty");
    if (static_cast<std::size_t>(features.rows()) != g.node_count())
        throw Error("dgi: one feature row per node required");
    Rng rng(cfg.seed);
    Rng init_rng = rng.fork(1), sample_rng = rng.fork(2), corrupt_rng = rng.fork(3);

    DgiResult result;
    DgiModel model = init_dgi_model(features.cols(), cfg.layer_dims, cfg.activations, init_rng);
    nn::ParameterPacker packer;
    model.register_with(packer);
    nn::Vector params = packer.pack();
    nn::Adam adam(params.size(), {cfg.learning_rate});

    auto nb = Neighborhoods::of(g);
    auto full_ops = full_batch_operators(nb, cfg.layer_dims.size());

    double best = std::numeric_limits<double>::infinity();
    nn::Vector best_params = params;
    int wait = 0;
    for (int epoch = 0; epoch < cfg.epochs_max; ++epoch) {
        auto ops = cfg.full_batch ? full_ops : sampled_operators(nb, cfg.sample_sizes, sample_rng);
        auto perm = corrupt_rng.permutation(g.node_count());
        DgiModel grad = model.zeros_like();
        double loss = dgi_objective(model, features, perm, ops, &grad);
        if (!std::isfinite(loss)) throw Error("dgi: non-finite loss at epoch " + std::to_string(epoch));
        result.losses.push_back(loss);
        result.stopping_epoch = epoch + 1;
        if (loss < best) {
            best = loss;
            best_params = params;
            result.best_epoch = epoch;
            wait = 0;
        } else if (++wait >= cfg.patience) {
            break;
        }
        nn::ParameterPacker gp;
        grad.register_with(gp);
        adam.step(params, gp.pack());
        packer.unpack(params);
    }
    packer.unpack(best_params);
    result.model = model;
    return result;
}

} // namespace chanscope
