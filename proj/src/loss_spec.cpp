#include "adaloss/loss_spec.hpp"

#include <string>

namespace adaloss {

std::string_view to_string(BaseLoss loss) {
    switch (loss) {
    case BaseLoss::jaccard: return "jaccard";
    case BaseLoss::dice: return "dice";
    case BaseLoss::tversky: return "tversky";
    case BaseLoss::focal: return "focal";
    case BaseLoss::combo: return "combo";
    case BaseLoss::focal_tversky: return "focal-tversky";
    }
    return "?";
}

BaseLoss parse_base_loss(std::string_view name) {
    for (BaseLoss loss : kAllBaseLosses) {
        if (to_string(loss) == name) {
            return loss;
        }
    }
    throw ContractViolation("unknown loss '" + std::string(name) + "'");
}

LossEval evaluate(const LossSpec& spec, const ProbMap& p, const BinMask& g) {
    LossEval base = [&] {
        switch (spec.base) {
        case BaseLoss::jaccard: return soft_jaccard_loss(p, g, spec.smooth);
        case BaseLoss::dice: return soft_dice_loss(p, g, spec.smooth);
        case BaseLoss::tversky: return tversky_loss(p, g, spec.tversky, spec.smooth);
        case BaseLoss::focal: return focal_loss(p, g, spec.focal);
        case BaseLoss::combo: return combo_loss(p, g, spec.combo, spec.smooth);
        case BaseLoss::focal_tversky:
            return focal_tversky_loss(p, g, spec.tversky, spec.ft_gamma, spec.smooth);
        }
        throw ContractViolation("unhandled loss selector");
    }();
    if (!spec.all_wrap) {
        return base;
    }
    return all_wrap(base, spec.all);
}

std::string label(const LossSpec& spec) {
    const char* short_name = "";
    switch (spec.base) {
    case BaseLoss::jaccard: short_name = "JL"; break;
    case BaseLoss::dice: short_name = "DL"; break;
    case BaseLoss::tversky: short_name = "TL"; break;
    case BaseLoss::focal: short_name = "FL"; break;
    case BaseLoss::combo: short_name = "CL"; break;
    case BaseLoss::focal_tversky: short_name = "FTL"; break;
    }
    if (!spec.all_wrap) {
        return short_name;
    }
    if (spec.base == BaseLoss::dice) {
        return "ALL";
    }
    return std::string("ALL(") + short_name + ")";
}

LossSpec parse_loss_token(std::string_view token, const LossSpec& defaults) {
    LossSpec spec = defaults;
    if (token == "all") {
        spec.base = BaseLoss::dice;
        spec.all_wrap = true;
        return spec;
    }
    constexpr std::string_view prefix = "all-";
    if (token.starts_with(prefix)) {
        spec.base = parse_base_loss(token.substr(prefix.size()));
        spec.all_wrap = true;
        return spec;
    }
    spec.base = parse_base_loss(token);
    spec.all_wrap = false;
    return spec;
}

} // namespace adaloss
