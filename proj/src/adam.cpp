#include "dyshift/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace dyshift {

void adam_step(Vector& params, const Vector& grads, AdamState& state, const AdamConfig& config,
               int t) {
    if (grads.size() != params.size()) {
        throw std::invalid_argument("adam_step: gradient size does not match parameters");
    }
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw std::invalid_argument("adam_step: state size does not match parameters");
    }
    if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");

    state.m = config.beta1 * state.m + (1.0 - config.beta1) * grads;
    state.v = config.beta2 * state.v + (1.0 - config.beta2) * grads.cwiseProduct(grads);
    const double m_corr = 1.0 - std::pow(config.beta1, t);
    const double v_corr = 1.0 - std::pow(config.beta2, t);
    params -= (config.lr / m_corr) * state.m.cwiseQuotient(
                  ((state.v / v_corr).cwiseSqrt().array() + config.epsilon).matrix());
}

} // namespace dyshift
