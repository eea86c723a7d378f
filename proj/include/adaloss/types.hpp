#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adaloss/errors.hpp"

namespace adaloss {

namespace detail {
void check_shape(std::size_t width, std::size_t height, std::size_t length, const char* what);
void check_unit_interval(std::span<const double> values, const char* what);
} // namespace detail

/// Row-major grid of reals confined to [0, 1]. The tag distinguishes
/// predicted probabilities from input intensities at the type level.
template <class Tag>
class UnitGrid {
public:
    UnitGrid(std::size_t width, std::size_t height, std::vector<double> values)
        : width_(width), height_(height), values_(std::move(values)) {
        detail::check_shape(width_, height_, values_.size(), Tag::name);
        detail::check_unit_interval(values_, Tag::name);
    }

    static UnitGrid filled(std::size_t width, std::size_t height, double value) {
        return UnitGrid(width, height, std::vector<double>(width * height, value));
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double at(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const UnitGrid&, const UnitGrid&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> values_;
};

struct ProbTag {
    static constexpr const char* name = "ProbMap";
};
struct ImageTag {
    static constexpr const char* name = "Image";
};

/// Per-pixel predicted foreground probability.
using ProbMap = UnitGrid<ProbTag>;
/// Grayscale input intensities scaled to [0, 1].
using Image = UnitGrid<ImageTag>;

/// Binary ground truth, one byte per pixel, each exactly 0 or 1.
class BinMask {
public:
    BinMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> values);

    static BinMask filled(std::size_t width, std::size_t height, std::uint8_t value) {
        return BinMask(width, height, std::vector<std::uint8_t>(width * height, value));
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::uint8_t operator[](std::size_t i) const { return values_[i]; }
    std::span<const std::uint8_t> values() const noexcept { return values_; }

    std::size_t foreground_count() const noexcept;
    double foreground_fraction() const noexcept;

    friend bool operator==(const BinMask&, const BinMask&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> values_;
};

template <class A, class B>
void require_same_shape(const A& a, const B& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw ContractViolation("dimension mismatch: " + std::to_string(a.width()) + "x" +
                                std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                "x" + std::to_string(b.height()));
    }
}

} // namespace adaloss
