#include "adaloss/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace adaloss {

std::vector<double> finite_difference_grad(const LossFn& loss, const ProbMap& p,
                                           const BinMask& g, double step) {
    if (!(step > 0.0)) {
        throw ContractViolation("finite_difference_grad: step must be > 0");
    }
    require_same_shape(p, g);
    std::vector<double> values(p.values().begin(), p.values().end());
    std::vector<double> grad(p.size());

    auto eval_at = [&](std::size_t i, double v) {
        const double saved = values[i];
        values[i] = v;
        const double out = loss(ProbMap(p.width(), p.height(), values), g);
        values[i] = saved;
        return out;
    };

    for (std::size_t i = 0; i < p.size(); ++i) {
        const double x = values[i];
        const bool room_below = x - step >= 0.0;
        const bool room_above = x + step <= 1.0;
        if (room_below && room_above) {
            grad[i] = (eval_at(i, x + step) - eval_at(i, x - step)) / (2.0 * step);
        } else if (room_above) {
            grad[i] = (eval_at(i, x + step) - eval_at(i, x)) / step;
        } else {
            grad[i] = (eval_at(i, x) - eval_at(i, x - step)) / step;
        }
    }
    return grad;
}

double finite_difference_partial(const std::function<double(std::span<const double>)>& f,
                                 std::vector<double>& params, std::size_t index, double step) {
    if (!(step > 0.0)) {
        throw ContractViolation("finite_difference_partial: step must be > 0");
    }
    const double saved = params[index];
    params[index] = saved + step;
    const double up = f(params);
    params[index] = saved - step;
    const double down = f(params);
    params[index] = saved;
    return (up - down) / (2.0 * step);
}

double relative_error(double a, double b, double floor) {
    const double scale = std::max({std::abs(a), std::abs(b), floor});
    if (scale == 0.0) {
        return 0.0;
    }
    return std::abs(a - b) / scale;
}

} // namespace adaloss
