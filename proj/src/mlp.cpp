#include "dyshift/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "dyshift/rng.hpp"

namespace dyshift {

namespace {

void check_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw std::invalid_argument("mlp needs at least input and output widths");
    for (int s : sizes) {
        if (s < 1) throw std::invalid_argument("mlp layer widths must be >= 1");
    }
}

} // namespace

Mlp::Mlp(std::vector<int> layer_sizes, uint64_t seed) : sizes_(std::move(layer_sizes)) {
    check_sizes(sizes_);
    std::mt19937_64 rng(seed);
    for (size_t k = 0; k + 1 < sizes_.size(); ++k) {
        const int in = sizes_[k], out = sizes_[k + 1];
        Matrix w(in, out);
        const double scale = std::sqrt(2.0 / static_cast<double>(in));
        for (int c = 0; c < out; ++c) {
            for (int r = 0; r < in; ++r) w(r, c) = scale * standard_normal(rng);
        }
        weights_.push_back(std::move(w));
        biases_.push_back(Vector::Zero(out));
    }
}

Mlp Mlp::zeros(std::vector<int> layer_sizes) {
    check_sizes(layer_sizes);
    Mlp mlp;
    mlp.sizes_ = std::move(layer_sizes);
    for (size_t k = 0; k + 1 < mlp.sizes_.size(); ++k) {
        mlp.weights_.push_back(Matrix::Zero(mlp.sizes_[k], mlp.sizes_[k + 1]));
        mlp.biases_.push_back(Vector::Zero(mlp.sizes_[k + 1]));
    }
    return mlp;
}

Matrix Mlp::forward(const Matrix& input) const {
    Cache cache;
    return forward(input, cache);
}

Matrix Mlp::forward(const Matrix& input, Cache& cache) const {
    if (input.cols() != sizes_.front()) {
        throw std::invalid_argument("mlp forward: feature width " + std::to_string(input.cols()) +
                                    " does not match input width " + std::to_string(sizes_.front()));
    }
    cache.activations.clear();
    cache.activations.push_back(input);
    Matrix a = input;
    for (size_t k = 0; k < weights_.size(); ++k) {
        Matrix z = (a * weights_[k]).rowwise() + biases_[k].transpose();
        if (k + 1 < weights_.size()) z = z.cwiseMax(0.0);
        cache.activations.push_back(z);
        a = std::move(z);
    }
    return a;
}

Mlp::Gradients Mlp::backward(const Cache& cache, const Matrix& d_output, Matrix* d_input) const {
    if (cache.activations.size() != weights_.size() + 1) {
        throw std::invalid_argument("mlp backward: cache does not match network depth");
    }
    if (d_output.rows() != cache.activations.back().rows() ||
        d_output.cols() != cache.activations.back().cols()) {
        throw std::invalid_argument("mlp backward: upstream gradient shape mismatch");
    }
    Gradients grads;
    grads.weights.resize(weights_.size());
    grads.biases.resize(weights_.size());

    Matrix delta = d_output;
    for (size_t k = weights_.size(); k-- > 0;) {
        const Matrix& a_prev = cache.activations[k];
        grads.weights[k] = a_prev.transpose() * delta;
        grads.biases[k] = delta.colwise().sum();
        if (k > 0) {
            delta = delta * weights_[k].transpose();
            // ReLU mask: post-activation > 0 iff pre-activation > 0.
            delta = delta.cwiseProduct((cache.activations[k].array() > 0.0).cast<double>().matrix());
        } else if (d_input) {
            *d_input = delta * weights_[0].transpose();
        }
    }
    return grads;
}

Vector Mlp::Gradients::flat() const {
    Eigen::Index n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    Vector out(n);
    Eigen::Index pos = 0;
    for (size_t k = 0; k < weights.size(); ++k) {
        out.segment(pos, weights[k].size()) =
            Eigen::Map<const Vector>(weights[k].data(), weights[k].size());
        pos += weights[k].size();
        out.segment(pos, biases[k].size()) = biases[k];
        pos += biases[k].size();
    }
    return out;
}

Eigen::Index Mlp::parameter_count() const {
    Eigen::Index n = 0;
    for (size_t k = 0; k < weights_.size(); ++k) n += weights_[k].size() + biases_[k].size();
    return n;
}

Vector Mlp::parameters() const {
    Vector out(parameter_count());
    Eigen::Index pos = 0;
    for (size_t k = 0; k < weights_.size(); ++k) {
        out.segment(pos, weights_[k].size()) =
            Eigen::Map<const Vector>(weights_[k].data(), weights_[k].size());
        pos += weights_[k].size();
        out.segment(pos, biases_[k].size()) = biases_[k];
        pos += biases_[k].size();
    }
    return out;
}

void Mlp::set_parameters(const Vector& flat) {
    if (flat.size() != parameter_count()) {
        throw std::invalid_argument("set_parameters: expected " + std::to_string(parameter_count()) +
                                    " values, got " + std::to_string(flat.size()));
    }
    Eigen::Index pos = 0;
    for (size_t k = 0; k < weights_.size(); ++k) {
        Eigen::Map<Vector>(weights_[k].data(), weights_[k].size()) =
            flat.segment(pos, weights_[k].size());
        pos += weights_[k].size();
        biases_[k] = flat.segment(pos, biases_[k].size());
        pos += biases_[k].size();
    }
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::RowVectorXd row = logits.row(r);
        row.array() -= row.maxCoeff();
        Eigen::RowVectorXd e = row.array().exp();
        out.row(r) = e / e.sum();
    }
    return out;
}

Matrix WeightHead::forward(const Matrix& features) const {
    return softmax_rows(mlp.forward(features));
}

Matrix weight_head_forward(const Matrix& features, const WeightHead& head) {
    return head.forward(features);
}

Vector DirectRegressionHead::bandwidths(const Matrix& features) const {
    if (mlp.output_width() != 1) {
        throw std::invalid_argument("direct regression head must have output width 1");
    }
    Vector raw = mlp.forward(features).col(0);
    Vector out(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        // Numerically stable softplus.
        double r = raw(i);
        out(i) = std::max(r, 0.0) + std::log1p(std::exp(-std::abs(r))) + min_bandwidth;
    }
    return out;
}

} // namespace dyshift
