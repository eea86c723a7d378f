#include "adaloss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "adaloss/logging.hpp"

namespace adaloss {
namespace {

double ratio_or_one(double num, double den, const char* name) {
    if (den == 0.0) {
        log::warn(std::string(name) + ": zero denominator, reporting 1.0");
        return 1.0;
    }
    return num / den;
}

double as_real(std::uint64_t v) { return static_cast<double>(v); }

void check_dataset(std::span<const ProbMap> p, std::span<const BinMask> g) {
    if (p.size() != g.size()) {
        throw ContractViolation("ROC: " + std::to_string(p.size()) + " maps vs " +
                                std::to_string(g.size()) + " masks");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        require_same_shape(p[i], g[i]);
    }
}

} // namespace

ConfusionCounts confusion(const ProbMap& p, const BinMask& g, double threshold) {
    require_same_shape(p, g);
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ContractViolation("confusion: threshold must lie in [0, 1]");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool predicted = p[i] >= threshold;
        const bool truth = g[i] != 0;
        if (predicted) {
            truth ? ++c.tp : ++c.fp;
        } else {
            truth ? ++c.fn : ++c.tn;
        }
    }
    return c;
}

double jaccard_index(const ConfusionCounts& c) {
    return ratio_or_one(as_real(c.tp), as_real(c.tp + c.fp + c.fn), "jaccard_index");
}

double dice_index(const ConfusionCounts& c) {
    return ratio_or_one(2.0 * as_real(c.tp), as_real(2 * c.tp + c.fp + c.fn), "dice_index");
}

double recall(const ConfusionCounts& c) {
    return ratio_or_one(as_real(c.tp), as_real(c.tp + c.fn), "recall");
}

double specificity(const ConfusionCounts& c) {
    return ratio_or_one(as_real(c.tn), as_real(c.tn + c.fp), "specificity");
}

double precision(const ConfusionCounts& c) {
    return ratio_or_one(as_real(c.tp), as_real(c.tp + c.fp), "precision");
}

double f_measure(const ConfusionCounts& c) {
    const double pr = precision(c);
    const double rc = recall(c);
    if (pr + rc == 0.0) {
        return 0.0;
    }
    return 2.0 * pr * rc / (pr + rc);
}

RocCurve roc_auc(std::span<const ProbMap> p, std::span<const BinMask> g,
                 std::size_t n_thresholds) {
    if (n_thresholds < 2) {
        throw ContractViolation("roc_auc: need at least 2 thresholds");
    }
    check_dataset(p, g);

    const std::size_t steps = n_thresholds - 1;
    auto threshold_at = [steps](std::size_t k) {
        return static_cast<double>(k) / static_cast<double>(steps);
    };

    // Bucket each score by the largest threshold index it reaches, then the
    // positives at threshold k are a suffix sum over buckets >= k.
    std::vector<std::uint64_t> pos_at(n_thresholds, 0);
    std::vector<std::uint64_t> neg_at(n_thresholds, 0);
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;
    for (std::size_t m = 0; m < p.size(); ++m) {
        for (std::size_t i = 0; i < p[m].size(); ++i) {
            const double s = p[m][i];
            auto k = static_cast<std::ptrdiff_t>(std::floor(s * static_cast<double>(steps)));
            k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(steps));
            while (k < static_cast<std::ptrdiff_t>(steps) &&
                   s >= threshold_at(static_cast<std::size_t>(k + 1))) {
                ++k;
            }
            while (k > 0 && s < threshold_at(static_cast<std::size_t>(k))) {
                --k;
            }
            if (g[m][i]) {
                ++pos_at[static_cast<std::size_t>(k)];
                ++positives;
            } else {
                ++neg_at[static_cast<std::size_t>(k)];
                ++negatives;
            }
        }
    }
    if (positives == 0 || negatives == 0) {
        throw UndefinedAuc("roc_auc: pooled labels contain a single class");
    }

    RocCurve curve;
    curve.points.reserve(n_thresholds + 1);
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    for (std::size_t j = n_thresholds; j-- > 0;) {
        tp += pos_at[j];
        fp += neg_at[j];
        curve.points.push_back(
            {threshold_at(j), as_real(fp) / as_real(negatives), as_real(tp) / as_real(positives)});
    }

    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    curve.auc = area;
    return curve;
}

double rank_auc(std::span<const ProbMap> p, std::span<const BinMask> g) {
    check_dataset(p, g);
    struct Scored {
        double score;
        bool positive;
    };
    std::vector<Scored> all;
    for (std::size_t m = 0; m < p.size(); ++m) {
        for (std::size_t i = 0; i < p[m].size(); ++i) {
            all.push_back({p[m][i], g[m][i] != 0});
        }
    }
    std::sort(all.begin(), all.end(),
              [](const Scored& a, const Scored& b) { return a.score < b.score; });

    // Sum of (mid-)ranks of the positives, ties sharing the average rank.
    double positive_rank_sum = 0.0;
    std::uint64_t positives = 0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        std::uint64_t tied_pos = 0;
        while (j < all.size() && all[j].score == all[i].score) {
            tied_pos += all[j].positive ? 1 : 0;
            ++j;
        }
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) * 0.5;
        positive_rank_sum += mid_rank * as_real(tied_pos);
        positives += tied_pos;
        i = j;
    }
    const std::uint64_t negatives = all.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw UndefinedAuc("rank_auc: pooled labels contain a single class");
    }
    const double np = as_real(positives);
    const double u = positive_rank_sum - np * (np + 1.0) * 0.5;
    return u / (np * as_real(negatives));
}

} // namespace adaloss
