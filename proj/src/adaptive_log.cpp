#include "adaloss/adaptive_log.hpp"

#include <cmath>
#include <string>

namespace adaloss {
namespace {

void check_params(double gamma, double omega, double epsilon) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ContractViolation("ALL gamma must lie in (0, 1), got " + std::to_string(gamma));
    }
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw ContractViolation("ALL omega must be finite and > 0, got " + std::to_string(omega));
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw ContractViolation("ALL epsilon must be finite and > 0, got " +
                                std::to_string(epsilon));
    }
}

void check_base(double x) {
    // A base loss outside [0, 1] means the upstream loss is broken (or is not
    // a bounded overlap loss); the wrapper is only defined on [0, 1].
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ContractViolation("ALL base loss value " + std::to_string(x) + " outside [0, 1]");
    }
}

} // namespace

double AllParams::all_constant_unchecked(double gamma, double omega, double epsilon) noexcept {
    return gamma - omega * std::log1p(gamma / epsilon);
}

double all_constant(double gamma, double omega, double epsilon) {
    check_params(gamma, omega, epsilon);
    return gamma - omega * std::log1p(gamma / epsilon);
}

AllParams::AllParams(double gamma, double omega, double epsilon)
    : gamma_(gamma), omega_(omega), epsilon_(epsilon) {
    check_params(gamma, omega, epsilon);
}

double all_log_branch(double x, const AllParams& params) {
    return params.omega() * std::log1p(std::abs(x) / params.epsilon());
}

double all_linear_branch(double x, const AllParams& params) { return std::abs(x) - params.c(); }

double all_forward(double base_loss_value, const AllParams& params) {
    check_base(base_loss_value);
    // |DL| is kept as written even though DL is never negative here.
    if (std::abs(base_loss_value) < params.gamma()) {
        return all_log_branch(base_loss_value, params);
    }
    return all_linear_branch(base_loss_value, params);
}

double all_derivative(double base_loss_value, const AllParams& params) {
    check_base(base_loss_value);
    const double x = std::abs(base_loss_value);
    if (x < params.gamma()) {
        return params.omega() / (params.epsilon() + x);
    }
    return 1.0;
}

LossEval all_wrap(const LossEval& base, const AllParams& params) {
    LossEval out;
    out.value = all_forward(base.value, params);
    const double slope = all_derivative(base.value, params);
    out.grad.resize(base.grad.size());
    for (std::size_t i = 0; i < base.grad.size(); ++i) {
        out.grad[i] = slope * base.grad[i];
    }
    return out;
}

} // namespace adaloss
