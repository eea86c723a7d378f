#pragma once

#include <vector>

#include "adaloss/types.hpp"

namespace adaloss {

/// Scalar loss for one image together with d(loss)/d(p_i) for every pixel.
struct LossEval {
    double value = 0.0;
    std::vector<double> grad;
};

inline constexpr double kDefaultSmooth = 1e-6;
/// Probabilities are clamped to [kProbClip, 1 - kProbClip] before any log.
inline constexpr double kProbClip = 1e-7;

struct TverskyParams {
    double alpha = 0.7; ///< weight on false negatives
    double beta = 0.3;  ///< weight on false positives

    void validate() const;
};

struct FocalParams {
    double alpha_balance = 1.0;
    double gamma_focus = 2.0;

    void validate() const;
};

struct ComboParams {
    double mix = 0.5; ///< weight of the cross-entropy term; 1 - mix goes to Dice

    void validate() const;
};

inline constexpr double kDefaultFocalTverskyGamma = 4.0 / 3.0;

// Overlap losses use the soft relaxation |G ∩ P| -> sum(g_i * p_i). With
// smooth == 0 an all-background mask has no meaningful overlap and throws
// DegenerateInput.

LossEval soft_dice_loss(const ProbMap& p, const BinMask& g, double smooth = kDefaultSmooth);

LossEval soft_jaccard_loss(const ProbMap& p, const BinMask& g, double smooth = kDefaultSmooth);

LossEval tversky_loss(const ProbMap& p, const BinMask& g, const TverskyParams& params = {},
                      double smooth = kDefaultSmooth);

/// Mean over pixels of -alpha * (1 - p_t)^gamma * ln(p_t). The balance weight
/// scales both classes, so gamma = 0, alpha = 1 is exactly mean BCE.
LossEval focal_loss(const ProbMap& p, const BinMask& g, const FocalParams& params = {});

/// Mean binary cross-entropy with the same clipping as focal_loss.
LossEval bce_loss(const ProbMap& p, const BinMask& g);

LossEval combo_loss(const ProbMap& p, const BinMask& g, const ComboParams& params = {},
                    double smooth = kDefaultSmooth);

/// (1 - TI)^(1 / ft_gamma). The gradient is taken as zero where the Tversky
/// loss is exactly zero, since the power has an infinite slope there for
/// ft_gamma > 1.
LossEval focal_tversky_loss(const ProbMap& p, const BinMask& g, const TverskyParams& params = {},
                            double ft_gamma = kDefaultFocalTverskyGamma,
                            double smooth = kDefaultSmooth);

} // namespace adaloss
