#pragma once

#include <string>
#include <string_view>

#include "adaloss/adaptive_log.hpp"
#include "adaloss/losses.hpp"

namespace adaloss {

enum class BaseLoss { jaccard, dice, tversky, focal, combo, focal_tversky };

inline constexpr BaseLoss kAllBaseLosses[] = {BaseLoss::jaccard, BaseLoss::dice,
                                              BaseLoss::tversky, BaseLoss::focal,
                                              BaseLoss::combo,   BaseLoss::focal_tversky};

/// Command-line name: jaccard, dice, tversky, focal, combo, focal-tversky.
std::string_view to_string(BaseLoss loss);
/// Throws ContractViolation for unknown names.
BaseLoss parse_base_loss(std::string_view name);

/// A fully parameterised training loss: a base loss, optionally wrapped in ALL.
struct LossSpec {
    BaseLoss base = BaseLoss::dice;
    bool all_wrap = false;
    AllParams all{};
    TverskyParams tversky{};
    FocalParams focal{};
    ComboParams combo{};
    double ft_gamma = kDefaultFocalTverskyGamma;
    double smooth = kDefaultSmooth;
};

/// Per-image loss value and gradient w.r.t. the predicted probabilities.
LossEval evaluate(const LossSpec& spec, const ProbMap& p, const BinMask& g);

/// Short report label: JL, DL, TL, FL, CL, FTL; ALL for the wrapped Dice loss
/// and ALL(<label>) for any other wrapped base.
std::string label(const LossSpec& spec);

/// Parses a comparison token: a base name, "all" (ALL over Dice) or
/// "all-<base>". Parameters other than base/all_wrap come from `defaults`.
LossSpec parse_loss_token(std::string_view token, const LossSpec& defaults);

} // namespace adaloss
