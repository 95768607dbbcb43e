#pragma once

#include "dyshift/types.hpp"

namespace dyshift {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    Vector m;
    Vector v;

    AdamState() = default;
    explicit AdamState(Eigen::Index n) : m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

// One bias-corrected Adam update, in place. t is the 1-based step count.
void adam_step(Vector& params, const Vector& grads, AdamState& state, const AdamConfig& config,
               int t);

} // namespace dyshift
