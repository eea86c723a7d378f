#include "adaloss/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "adaloss/rng.hpp"

namespace adaloss {
namespace {

constexpr std::uint64_t kSplitStream = 0x53504C4954ULL; // "SPLIT"

struct Ellipse {
    double cx, cy; // centre, pixel units
    double rx, ry; // semi-axes
};

Ellipse draw_ellipse(Rng& rng, const SynthSpec& spec, double target_area) {
    const double area = target_area * rng.uniform(0.6, 1.4);
    const double aspect = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    Ellipse e{};
    e.rx = std::sqrt(area * aspect / std::numbers::pi);
    e.ry = std::sqrt(area / (aspect * std::numbers::pi));
    e.cx = rng.uniform(0.0, static_cast<double>(spec.width));
    e.cy = rng.uniform(0.0, static_cast<double>(spec.height));
    return e;
}

// Pixel (x, y) is covered when its centre lies inside the ellipse.
void rasterize(const Ellipse& e, std::size_t width, std::size_t height,
               std::vector<std::uint8_t>& mask) {
    const auto lo_x = static_cast<std::ptrdiff_t>(std::floor(e.cx - e.rx - 1.0));
    const auto hi_x = static_cast<std::ptrdiff_t>(std::ceil(e.cx + e.rx + 1.0));
    const auto lo_y = static_cast<std::ptrdiff_t>(std::floor(e.cy - e.ry - 1.0));
    const auto hi_y = static_cast<std::ptrdiff_t>(std::ceil(e.cy + e.ry + 1.0));
    const auto w = static_cast<std::ptrdiff_t>(width);
    const auto h = static_cast<std::ptrdiff_t>(height);
    for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(lo_y, 0); y < std::min(hi_y, h); ++y) {
        const double dy = (static_cast<double>(y) + 0.5 - e.cy) / e.ry;
        for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(lo_x, 0); x < std::min(hi_x, w); ++x) {
            const double dx = (static_cast<double>(x) + 0.5 - e.cx) / e.rx;
            if (dx * dx + dy * dy <= 1.0) {
                mask[static_cast<std::size_t>(y * w + x)] = 1;
            }
        }
    }
}

} // namespace

void SynthSpec::validate() const {
    if (width < 16 || height < 16) {
        throw ContractViolation("SynthSpec: width and height must be >= 16");
    }
    if (!(fg_fraction > 0.0 && fg_fraction <= 0.5)) {
        throw ContractViolation("SynthSpec: fg_fraction must lie in (0, 0.5]");
    }
    if (n_images == 0) {
        throw ContractViolation("SynthSpec: n_images must be >= 1");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ContractViolation("SynthSpec: noise_sigma must be finite and >= 0");
    }
    if (blobs_min == 0 || blobs_max < blobs_min) {
        throw ContractViolation("SynthSpec: need 1 <= blobs_min <= blobs_max");
    }
}

Sample generate_sample(const SynthSpec& spec, std::size_t index) {
    spec.validate();
    Rng rng = Rng::derive(spec.seed, {static_cast<std::uint64_t>(index)});

    const std::size_t n = spec.width * spec.height;
    const double target_px = spec.fg_fraction * static_cast<double>(n);
    const double lo = (1.0 - kFractionTolerance) * target_px;
    const double hi = (1.0 + kFractionTolerance) * target_px;

    std::vector<std::uint8_t> mask(n, 0);
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < kMaxPlacementAttempts && !accepted; ++attempt) {
        std::fill(mask.begin(), mask.end(), std::uint8_t{0});
        const auto blobs = static_cast<std::size_t>(rng.between(
            static_cast<std::int64_t>(spec.blobs_min), static_cast<std::int64_t>(spec.blobs_max)));
        const double per_blob = target_px / static_cast<double>(blobs);
        for (std::size_t b = 0; b < blobs; ++b) {
            rasterize(draw_ellipse(rng, spec, per_blob), spec.width, spec.height, mask);
        }
        const auto fg = static_cast<double>(std::count(mask.begin(), mask.end(), 1));
        accepted = fg >= 1.0 && fg < static_cast<double>(n) && fg >= lo && fg <= hi;
    }
    if (!accepted) {
        throw GenerationFailure("sample " + std::to_string(index) + ": no layout of " +
                                std::to_string(spec.blobs_min) + ".." +
                                std::to_string(spec.blobs_max) +
                                " blobs reached foreground fraction " +
                                std::to_string(spec.fg_fraction) + " on a " +
                                std::to_string(spec.width) + "x" + std::to_string(spec.height) +
                                " grid");
    }

    std::vector<double> pixels(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = kBackgroundIntensity + kForegroundContrast * mask[i];
        if (spec.noise_sigma > 0.0) {
            v += spec.noise_sigma * rng.normal();
        }
        pixels[i] = std::clamp(v, 0.0, 1.0);
    }
    return Sample{Image(spec.width, spec.height, std::move(pixels)),
                  BinMask(spec.width, spec.height, std::move(mask))};
}

std::vector<Sample> generate(const SynthSpec& spec) {
    spec.validate();
    std::vector<Sample> out;
    out.reserve(spec.n_images);
    for (std::size_t i = 0; i < spec.n_images; ++i) {
        out.push_back(generate_sample(spec, i));
    }
    return out;
}

std::pair<std::vector<Sample>, std::vector<Sample>>
train_val_split(std::vector<Sample> samples, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw ContractViolation("train_val_split: ratio must lie in (0, 1]");
    }
    const std::size_t n = samples.size();
    const auto n_train =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
    if (n_train == 0) {
        throw ContractViolation("train_val_split: empty training set");
    }
    if (n_train >= n) {
        throw ContractViolation("train_val_split: empty validation set");
    }

    Rng rng = Rng::derive(seed, {kSplitStream});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(samples[i - 1], samples[j]);
    }
    std::vector<Sample> val(std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train)),
                            std::make_move_iterator(samples.end()));
    samples.erase(samples.begin() + static_cast<std::ptrdiff_t>(n_train), samples.end());
    return {std::move(samples), std::move(val)};
}

} // namespace adaloss
