#include "adaloss/types.hpp"

#include <algorithm>
#include <cmath>

namespace adaloss {
namespace detail {

void check_shape(std::size_t width, std::size_t height, std::size_t length, const char* what) {
    if (width == 0 || height == 0) {
        throw ContractViolation(std::string(what) + ": width and height must be positive");
    }
    if (width * height != length) {
        throw ContractViolation(std::string(what) + ": " + std::to_string(length) +
                                " values for a " + std::to_string(width) + "x" +
                                std::to_string(height) + " grid");
    }
}

void check_unit_interval(std::span<const double> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ContractViolation(std::string(what) + ": value " + std::to_string(v) +
                                    " at index " + std::to_string(i) + " outside [0, 1]");
        }
    }
}

} // namespace detail

BinMask::BinMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
    detail::check_shape(width_, height_, values_.size(), "BinMask");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] > 1) {
            throw ContractViolation("BinMask: label " + std::to_string(values_[i]) +
                                    " at index " + std::to_string(i) + " is not 0 or 1");
        }
    }
}

std::size_t BinMask::foreground_count() const noexcept {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

double BinMask::foreground_fraction() const noexcept {
    return static_cast<double>(foreground_count()) / static_cast<double>(values_.size());
}

} // namespace adaloss
