#include "adaloss/adam.hpp"

#include <cmath>
#include <string>

#include "adaloss/errors.hpp"

namespace adaloss {

void AdamConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) {
        throw ContractViolation("Adam learning rate must be finite and > 0");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ContractViolation("Adam betas must lie in [0, 1)");
    }
    if (!(eps > 0.0)) {
        throw ContractViolation("Adam eps must be > 0");
    }
}

AdamState::AdamState(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
    config_.validate();
}

void AdamState::step(std::span<double> weights, std::span<const double> grads) {
    if (weights.size() != m_.size() || grads.size() != m_.size()) {
        throw ContractViolation("AdamState::step: expected " + std::to_string(m_.size()) +
                                " weights and gradients");
    }
    ++t_;
    const double t = static_cast<double>(t_);
    const double correction1 = 1.0 - std::pow(config_.beta1, t);
    const double correction2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double g = grads[i];
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g * g;
        const double m_hat = m_[i] / correction1;
        const double v_hat = v_[i] / correction2;
        weights[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
}

} // namespace adaloss
