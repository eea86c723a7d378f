#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "adaloss/rng.hpp"
#include "adaloss/types.hpp"

namespace adaloss {

/// Two-layer pixel-wise segmenter:
///   conv 3x3 (1 -> 8, zero same-padding) -> ReLU -> conv 3x3 (8 -> 1) -> sigmoid.
/// All 153 parameters live in one flat vector so optimisers and gradient
/// checks can treat them uniformly. Layout:
///   [conv1 weights 8x3x3 | conv1 bias 8 | conv2 weights 8x3x3 | conv2 bias 1],
/// kernels indexed (channel, ky, kx).
class TinyNet {
public:
    static constexpr std::size_t kHidden = 8;
    static constexpr std::size_t kKernel = 3;
    static constexpr std::size_t kTaps = kKernel * kKernel;
    static constexpr std::size_t kConv1Weights = 0;
    static constexpr std::size_t kConv1Bias = kConv1Weights + kHidden * kTaps;
    static constexpr std::size_t kConv2Weights = kConv1Bias + kHidden;
    static constexpr std::size_t kConv2Bias = kConv2Weights + kHidden * kTaps;
    static constexpr std::size_t kParameterCount = kConv2Bias + 1;

    /// All weights and biases zero; every output pixel is then 0.5.
    TinyNet();

    /// He-style uniform init: weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in))
    /// drawn in layout order, biases zero.
    static TinyNet he_uniform(Rng& rng);

    std::span<double> parameters() noexcept { return params_; }
    std::span<const double> parameters() const noexcept { return params_; }

    double& conv1_weight(std::size_t c, std::size_t ky, std::size_t kx) {
        return params_[kConv1Weights + c * kTaps + ky * kKernel + kx];
    }
    double& conv1_bias(std::size_t c) { return params_[kConv1Bias + c]; }
    double& conv2_weight(std::size_t c, std::size_t ky, std::size_t kx) {
        return params_[kConv2Weights + c * kTaps + ky * kKernel + kx];
    }
    double& conv2_bias() { return params_[kConv2Bias]; }

    friend bool operator==(const TinyNet&, const TinyNet&) = default;

private:
    std::array<double, kParameterCount> params_{};
};

/// Intermediate values kept for the backward pass.
struct Activations {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> hidden_pre; ///< kHidden x H x W, before ReLU
    std::vector<double> hidden;     ///< after ReLU
    std::vector<double> probs;      ///< sigmoid output, H x W

    ProbMap output() const { return ProbMap(width, height, probs); }
};

Activations forward_with_cache(const TinyNet& net, const Image& image);
ProbMap forward(const TinyNet& net, const Image& image);

/// Gradient of the loss w.r.t. every parameter (same layout as
/// TinyNet::parameters()), given d(loss)/d(p_i) for each output pixel.
std::vector<double> backward(const TinyNet& net, const Image& image, const Activations& acts,
                             std::span<const double> upstream_grad);
/// Same, recomputing the forward pass.
std::vector<double> backward(const TinyNet& net, const Image& image,
                             std::span<const double> upstream_grad);

/// Plain-text checkpoint: "tinynet 1" then one %.17g value per line.
void save_checkpoint(const std::filesystem::path& path, const TinyNet& net);
TinyNet load_checkpoint(const std::filesystem::path& path);

} // namespace adaloss
