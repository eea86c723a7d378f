#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adaloss/types.hpp"

namespace adaloss {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }

    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A pixel counts as positive iff p_i >= threshold.
ConfusionCounts confusion(const ProbMap& p, const BinMask& g, double threshold = 0.5);

// Ratios below return 1.0 (and log a warning) when their denominator is zero.

double jaccard_index(const ConfusionCounts& c); ///< tp / (tp + fp + fn)
double dice_index(const ConfusionCounts& c);    ///< 2tp / (2tp + fp + fn)
double recall(const ConfusionCounts& c);        ///< tp / (tp + fn)
double specificity(const ConfusionCounts& c);   ///< tn / (tn + fp)
double precision(const ConfusionCounts& c);     ///< tp / (tp + fp)
/// Harmonic mean of precision and recall; 0 when both are 0.
double f_measure(const ConfusionCounts& c);

struct RocPoint {
    double threshold = 0.0; ///< +inf for the leading (0, 0) point
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    /// Ordered by decreasing threshold, i.e. from (0, 0) towards (1, 1).
    std::vector<RocPoint> points;
    double auc = 0.0;
};

inline constexpr std::size_t kDefaultRocThresholds = 256;

/// Micro-averaged ROC: all pixels of all maps are pooled, thresholds
/// k / (n - 1) for k = 0..n-1 are swept and TPR over FPR is integrated with
/// the trapezoid rule. Throws UndefinedAuc if the pooled labels hold a
/// single class.
RocCurve roc_auc(std::span<const ProbMap> p, std::span<const BinMask> g,
                 std::size_t n_thresholds = kDefaultRocThresholds);

/// Mann-Whitney form of the AUC: probability that a random positive outscores
/// a random negative, ties counting one half. Computed by ranking.
double rank_auc(std::span<const ProbMap> p, std::span<const BinMask> g);

} // namespace adaloss
