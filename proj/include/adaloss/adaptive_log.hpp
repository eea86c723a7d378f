#pragma once

#include "adaloss/losses.hpp"

namespace adaloss {

/// Join constant C = gamma - omega * ln(1 + gamma / epsilon). It makes the
/// log branch and the shifted linear branch meet in value at x = gamma.
/// The slopes do not meet unless omega == epsilon + gamma.
double all_constant(double gamma, double omega, double epsilon);

/// Hyperparameters of the adaptive logarithmic wrapper. The join constant is
/// always derived from the other three, never stored on its own.
class AllParams {
public:
    static constexpr double kDefaultGamma = 0.1;
    static constexpr double kDefaultOmega = 10.0;
    static constexpr double kDefaultEpsilon = 0.5;

    /// Throws ContractViolation unless 0 < gamma < 1, omega > 0, epsilon > 0.
    explicit AllParams(double gamma = kDefaultGamma, double omega = kDefaultOmega,
                       double epsilon = kDefaultEpsilon);

    double gamma() const noexcept { return gamma_; }
    double omega() const noexcept { return omega_; }
    double epsilon() const noexcept { return epsilon_; }
    double c() const noexcept { return all_constant_unchecked(gamma_, omega_, epsilon_); }

    /// Left slope minus right slope at x = gamma: omega / (epsilon + gamma) - 1.
    double derivative_jump() const noexcept { return omega_ / (epsilon_ + gamma_) - 1.0; }

    friend bool operator==(const AllParams&, const AllParams&) = default;

private:
    static double all_constant_unchecked(double gamma, double omega, double epsilon) noexcept;

    double gamma_;
    double omega_;
    double epsilon_;
};

/// omega * ln(1 + |x| / epsilon) below gamma, |x| - C from gamma upwards.
/// x is a base loss value and must lie in [0, 1].
double all_forward(double base_loss_value, const AllParams& params);

/// d ALL / dx: omega / (epsilon + |x|) below gamma, 1 from gamma upwards.
double all_derivative(double base_loss_value, const AllParams& params);

/// The two branch formulas evaluated separately, regardless of which one
/// applies at x. Used to check continuity at the join.
double all_log_branch(double x, const AllParams& params);
double all_linear_branch(double x, const AllParams& params);

/// Chain rule: value = ALL(base.value), grad_i = ALL'(base.value) * base.grad_i.
LossEval all_wrap(const LossEval& base, const AllParams& params);

} // namespace adaloss
