#pragma once

#include <functional>
#include <span>
#include <vector>

#include "adaloss/types.hpp"

namespace adaloss {

using LossFn = std::function<double(const ProbMap&, const BinMask&)>;

/// Central-difference estimate of d(loss)/d(p_i) for every pixel. Pixels
/// closer than `step` to 0 or 1 fall back to a one-sided difference so the
/// perturbed map stays inside [0, 1].
std::vector<double> finite_difference_grad(const LossFn& loss, const ProbMap& p,
                                           const BinMask& g, double step);

/// Central differences of a scalar function of a parameter vector, one
/// coordinate at a time. `params` is restored before returning.
double finite_difference_partial(const std::function<double(std::span<const double>)>& f,
                                 std::vector<double>& params, std::size_t index, double step);

/// |a - b| / max(|a|, |b|, floor), or 0 when that denominator is zero.
/// A floor proportional to the loss magnitude keeps components far below the
/// difference quotient's rounding noise from dominating the comparison.
double relative_error(double a, double b, double floor = 0.0);

} // namespace adaloss
