#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "adaloss/types.hpp"

namespace adaloss {

/// Recipe for a synthetic binary-segmentation dataset made of axis-aligned
/// elliptical blobs on a noisy background.
struct SynthSpec {
    std::size_t width = 48;
    std::size_t height = 48;
    double fg_fraction = 0.05;
    std::size_t n_images = 64;
    double noise_sigma = 0.1;
    std::size_t blobs_min = 1;
    std::size_t blobs_max = 3;
    std::uint64_t seed = 1;

    /// Throws ContractViolation: sizes >= 16, fg_fraction in (0, 0.5],
    /// n_images >= 1, noise_sigma >= 0, 1 <= blobs_min <= blobs_max.
    void validate() const;
};

struct Sample {
    Image image;
    BinMask mask;
};

inline constexpr double kBackgroundIntensity = 0.2;
inline constexpr double kForegroundContrast = 0.6;
/// A mask is accepted once its foreground fraction is within this relative
/// distance of the target.
inline constexpr double kFractionTolerance = 0.2;
inline constexpr std::size_t kMaxPlacementAttempts = 500;

/// Sample `index` of the dataset, drawn from its own stream
/// Rng::derive(spec.seed, {index}); independent of every other sample.
Sample generate_sample(const SynthSpec& spec, std::size_t index);

/// All n_images samples. Throws GenerationFailure if a sample cannot reach
/// the target fraction within kMaxPlacementAttempts blob layouts.
std::vector<Sample> generate(const SynthSpec& spec);

inline constexpr double kDefaultSplitRatio = 0.8;

/// Seeded Fisher-Yates shuffle, then the first floor(n * ratio) samples go to
/// training. Throws ContractViolation if either side would be empty.
std::pair<std::vector<Sample>, std::vector<Sample>>
train_val_split(std::vector<Sample> samples, double ratio, std::uint64_t seed);

} // namespace adaloss
