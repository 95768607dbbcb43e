#pragma once

#include <cstdint>
#include <vector>

#include "dyshift/types.hpp"

namespace dyshift {

// Fully connected network with rectified-linear hidden activations and a
// linear output layer. Parameters flatten to a single vector (layer by
// layer, weights column-major then biases) for the optimizer and for
// serialization.
class Mlp {
public:
    struct Cache {
        std::vector<Matrix> activations; // activations[0] = input, back() = linear output
    };

    struct Gradients {
        std::vector<Matrix> weights;
        std::vector<Vector> biases;
        Vector flat() const;
    };

    Mlp() = default;
    Mlp(std::vector<int> layer_sizes, uint64_t seed); // He-style init, zero biases
    static Mlp zeros(std::vector<int> layer_sizes);

    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_width() const { return sizes_.front(); }
    int output_width() const { return sizes_.back(); }

    Matrix forward(const Matrix& input) const;
    Matrix forward(const Matrix& input, Cache& cache) const;

    // Backpropagates d_output (N x out) through the cached forward pass.
    // When d_input is non-null it receives the gradient w.r.t. the input.
    Gradients backward(const Cache& cache, const Matrix& d_output, Matrix* d_input = nullptr) const;

    Eigen::Index parameter_count() const;
    Vector parameters() const;
    void set_parameters(const Vector& flat);

    const std::vector<Matrix>& weights() const { return weights_; }
    const std::vector<Vector>& biases() const { return biases_; }

private:
    std::vector<int> sizes_;
    std::vector<Matrix> weights_; // layer k: sizes[k] x sizes[k+1]
    std::vector<Vector> biases_;  // layer k: sizes[k+1]
};

Matrix softmax_rows(const Matrix& logits);

// MLP + row-wise softmax producing per-point candidate weights that sum to 1.
struct WeightHead {
    Mlp mlp;

    Matrix forward(const Matrix& features) const;
    int candidate_count() const { return mlp.output_width(); }
};

Matrix weight_head_forward(const Matrix& features, const WeightHead& head);

// MLP emitting one raw value per point, mapped to a strictly positive
// bandwidth through softplus plus a floor.
struct DirectRegressionHead {
    Mlp mlp;
    double min_bandwidth = 0.05;

    Vector bandwidths(const Matrix& features) const;
};

} // namespace dyshift
