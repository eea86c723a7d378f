#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace adaloss {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

/// Adam with bias correction:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
///   w <- w - lr * m_hat / (sqrt(v_hat) + eps),
/// with m_hat = m / (1 - b1^t), v_hat = v / (1 - b2^t).
class AdamState {
public:
    AdamState(std::size_t parameter_count, AdamConfig config);

    void step(std::span<double> weights, std::span<const double> grads);

    std::uint64_t step_count() const noexcept { return t_; }
    const AdamConfig& config() const noexcept { return config_; }
    std::span<const double> first_moment() const noexcept { return m_; }
    std::span<const double> second_moment() const noexcept { return v_; }

private:
    AdamConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::uint64_t t_ = 0;
};

} // namespace adaloss
