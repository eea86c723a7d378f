#include "adaloss/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace adaloss {
namespace {

struct OverlapSums {
    double intersection = 0.0; // sum g_i p_i
    double truth = 0.0;        // sum g_i
    double predicted = 0.0;    // sum p_i
};

OverlapSums overlap_sums(const ProbMap& p, const BinMask& g, double smooth, const char* who) {
    require_same_shape(p, g);
    if (!(smooth >= 0.0) || !std::isfinite(smooth)) {
        throw ContractViolation(std::string(who) + ": smooth must be a finite non-negative value");
    }
    OverlapSums s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i];
        s.intersection += gi * p[i];
        s.truth += gi;
        s.predicted += p[i];
    }
    if (smooth == 0.0 && s.truth == 0.0) {
        throw DegenerateInput(std::string(who) + ": empty ground truth with smooth = 0");
    }
    return s;
}

double clip(double p) { return std::clamp(p, kProbClip, 1.0 - kProbClip); }

} // namespace

void TverskyParams::validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0)) {
        throw ContractViolation("Tversky weights need alpha >= 0, beta >= 0, alpha + beta > 0");
    }
}

void FocalParams::validate() const {
    if (!(alpha_balance > 0.0 && alpha_balance <= 1.0)) {
        throw ContractViolation("focal alpha_balance must lie in (0, 1]");
    }
    if (!(gamma_focus >= 0.0) || !std::isfinite(gamma_focus)) {
        throw ContractViolation("focal gamma_focus must be finite and >= 0");
    }
}

void ComboParams::validate() const {
    if (!(mix >= 0.0 && mix <= 1.0)) {
        throw ContractViolation("combo mix must lie in [0, 1]");
    }
}

LossEval soft_dice_loss(const ProbMap& p, const BinMask& g, double smooth) {
    const auto s = overlap_sums(p, g, smooth, "soft_dice_loss");
    const double num = 2.0 * s.intersection + smooth;
    const double den = s.truth + s.predicted + smooth;
    if (den == 0.0) {
        throw DegenerateInput("soft_dice_loss: zero denominator");
    }

    LossEval out;
    out.value = 1.0 - num / den;
    out.grad.resize(p.size());
    const double den2 = den * den;
    for (std::size_t i = 0; i < p.size(); ++i) {
        out.grad[i] = -(2.0 * g[i] * den - num) / den2;
    }
    return out;
}

LossEval soft_jaccard_loss(const ProbMap& p, const BinMask& g, double smooth) {
    const auto s = overlap_sums(p, g, smooth, "soft_jaccard_loss");
    const double num = s.intersection + smooth;
    const double den = s.truth + s.predicted - s.intersection + smooth;
    if (den == 0.0) {
        throw DegenerateInput("soft_jaccard_loss: zero denominator");
    }

    LossEval out;
    out.value = 1.0 - num / den;
    out.grad.resize(p.size());
    const double den2 = den * den;
    for (std::size_t i = 0; i < p.size(); ++i) {
        // d(union)/dp_i = 1 - g_i
        out.grad[i] = -(g[i] * den - num * (1.0 - g[i])) / den2;
    }
    return out;
}

LossEval tversky_loss(const ProbMap& p, const BinMask& g, const TverskyParams& params,
                      double smooth) {
    params.validate();
    const auto s = overlap_sums(p, g, smooth, "tversky_loss");
    const double false_neg = s.truth - s.intersection;
    const double false_pos = s.predicted - s.intersection;
    // Doubled so that smoothing enters exactly as in soft_dice_loss and
    // alpha = beta = 0.5 reproduces it for any smooth.
    const double num = 2.0 * s.intersection + smooth;
    const double den =
        2.0 * (s.intersection + params.alpha * false_neg + params.beta * false_pos) + smooth;
    if (den == 0.0) {
        throw DegenerateInput("tversky_loss: zero denominator");
    }

    LossEval out;
    out.value = 1.0 - num / den;
    out.grad.resize(p.size());
    const double den2 = den * den;
    const double dden_fg = 2.0 * (1.0 - params.alpha);
    const double dden_bg = 2.0 * params.beta;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double dden = g[i] ? dden_fg : dden_bg;
        out.grad[i] = -(2.0 * g[i] * den - num * dden) / den2;
    }
    return out;
}

LossEval focal_loss(const ProbMap& p, const BinMask& g, const FocalParams& params) {
    params.validate();
    require_same_shape(p, g);
    const double n = static_cast<double>(p.size());
    const double a = params.alpha_balance;
    const double gf = params.gamma_focus;

    LossEval out;
    out.grad.resize(p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = clip(p[i]);
        const bool fg = g[i] != 0;
        const double pt = fg ? pc : 1.0 - pc;
        const double q = 1.0 - pt;
        const double log_pt = std::log(pt);
        const double modulator = std::pow(q, gf);
        total += -a * modulator * log_pt;

        if (p[i] != pc) {
            out.grad[i] = 0.0; // clamped: flat in p
            continue;
        }
        // d/dpt [-(1-pt)^gf ln pt] = gf (1-pt)^(gf-1) ln pt - (1-pt)^gf / pt
        const double dmod = gf == 0.0 ? 0.0 : gf * std::pow(q, gf - 1.0);
        const double dpt = a * (dmod * log_pt - modulator / pt);
        out.grad[i] = (fg ? dpt : -dpt) / n;
    }
    out.value = total / n;
    return out;
}

LossEval bce_loss(const ProbMap& p, const BinMask& g) {
    require_same_shape(p, g);
    const double n = static_cast<double>(p.size());

    LossEval out;
    out.grad.resize(p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = clip(p[i]);
        const bool fg = g[i] != 0;
        const double pt = fg ? pc : 1.0 - pc;
        total += -std::log(pt);
        if (p[i] != pc) {
            out.grad[i] = 0.0;
            continue;
        }
        out.grad[i] = (fg ? -1.0 / pt : 1.0 / pt) / n;
    }
    out.value = total / n;
    return out;
}

LossEval combo_loss(const ProbMap& p, const BinMask& g, const ComboParams& params,
                    double smooth) {
    params.validate();
    const LossEval ce = bce_loss(p, g);
    const LossEval dice = soft_dice_loss(p, g, smooth);
    const double w = params.mix;

    LossEval out;
    out.value = w * ce.value + (1.0 - w) * dice.value;
    out.grad.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        out.grad[i] = w * ce.grad[i] + (1.0 - w) * dice.grad[i];
    }
    return out;
}

LossEval focal_tversky_loss(const ProbMap& p, const BinMask& g, const TverskyParams& params,
                            double ft_gamma, double smooth) {
    if (!(ft_gamma > 0.0) || !std::isfinite(ft_gamma)) {
        throw ContractViolation("focal_tversky_loss: ft_gamma must be finite and > 0");
    }
    LossEval tl = tversky_loss(p, g, params, smooth);
    const double exponent = 1.0 / ft_gamma;
    // Rounding can leave a hair below zero on a perfect prediction.
    const double base = std::max(tl.value, 0.0);

    LossEval out;
    out.value = std::pow(base, exponent);
    out.grad.resize(p.size());
    const double outer = base > 0.0 ? exponent * std::pow(base, exponent - 1.0) : 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        out.grad[i] = outer * tl.grad[i];
    }
    return out;
}

} // namespace adaloss
