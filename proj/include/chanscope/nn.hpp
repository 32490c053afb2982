#pragma once

// Small dense-network toolkit: activations, initialisation and the Adam optimiser.

#include <chanscope/core.hpp>
#include <chanscope/rng.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <string_view>
#include <vector>

namespace chanscope::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class Activation { relu, tanh, identity };

inline std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
    }
    return "relu";
}

inline Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "identity" || s == "linear") return Activation::identity;
    throw Error("unknown activation '" + std::string(s) + "'");
}

inline Matrix activate(const Matrix& z, Activation a) {
    switch (a) {
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::identity: return z;
    }
    return z;
}

/// Derivative of the activation expressed through its pre-activation `z` and output `h`.
inline Matrix activation_grad(const Matrix& z, const Matrix& h, Activation a) {
    switch (a) {
    case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::tanh: return (1.0 - h.array().square()).matrix();
    case Activation::identity: return Matrix::Ones(z.rows(), z.cols());
    }
    return Matrix::Ones(z.rows(), z.cols());
}

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// Row-wise softmax.
inline Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        double m = logits.row(r).maxCoeff();
        RowVector e = (logits.row(r).array() - m).exp().matrix();
        out.row(r) = e / e.sum();
    }
    return out;
}

/// Glorot/Xavier uniform initialisation.
inline Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-limit, limit);
    return m;
}

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam over a flat parameter vector.
class Adam {
public:
    Adam(Eigen::Index size, AdamConfig cfg) : cfg_(cfg), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {}

    void step(Vector& params, const Vector& grad) {
        ++t_;
        m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
        v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
        double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        params.array() -= cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
    }

    std::int64_t steps() const { return t_; }

private:
    AdamConfig cfg_;
    Vector m_, v_;
    std::int64_t t_ = 0;
};

/// Packs a list of matrices into one vector and back, in a fixed order.
class ParameterPacker {
public:
    void add(Matrix* m) { parts_.push_back(m); }

    Eigen::Index size() const {
        Eigen::Index n = 0;
        for (auto* m : parts_) n += m->size();
        return n;
    }

    Vector pack() const {
        Vector v(size());
        Eigen::Index off = 0;
        for (auto* m : parts_) {
            v.segment(off, m->size()) = Eigen::Map<const Vector>(m->data(), m->size());
            off += m->size();
        }
        return v;
    }

    void unpack(const Vector& v) const {
        Eigen::Index off = 0;
        for (auto* m : parts_) {
            Eigen::Map<Vector>(m->data(), m->size()) = v.segment(off, m->size());
            off += m->size();
        }
    }

private:
    std::vector<Matrix*> parts_;
};

/// Norm-wise relative error ||a - b|| / max(||a|| + ||b||, tiny).
inline double relative_error(const Vector& a, const Vector& b) {
    double denom = a.norm() + b.norm();
    return denom < 1e-300 ? 0.0 : (a - b).norm() / denom;
}

} // namespace chanscope::nn
