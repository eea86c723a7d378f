#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "adaloss/adam.hpp"
#include "adaloss/loss_spec.hpp"
#include "adaloss/metrics.hpp"
#include "adaloss/segmodel.hpp"
#include "adaloss/synthdata.hpp"

namespace adaloss {

struct TrainConfig {
    AdamConfig adam{};             ///< lr defaults to 1e-4
    std::size_t batch_size = 16;
    std::size_t max_epochs = 50;
    LossSpec loss{};
    std::uint64_t seed = 1;        ///< weight init and per-epoch shuffles
    double threshold = 0.5;        ///< validation binarisation
    std::size_t roc_thresholds = kDefaultRocThresholds;

    void validate() const;
};

/// Validation summary for one epoch. The val_* ratios are macro averages
/// over validation images; val_jaccard_micro pools all validation pixels.
struct EpochRow {
    std::size_t epoch = 0; ///< 1-based
    double train_loss = 0.0;
    double val_jaccard = 0.0;
    double val_dice = 0.0;
    double val_recall = 0.0;
    double val_specificity = 0.0;
    double val_f1 = 0.0;
    double val_jaccard_micro = 0.0;

    friend bool operator==(const EpochRow&, const EpochRow&) = default;
};

struct RunRecord {
    std::vector<EpochRow> rows;
    double final_auc = 0.0; ///< NaN when the validation labels hold one class
    std::uint64_t optimizer_steps = 0;

    const EpochRow& final_row() const { return rows.back(); }
};

struct TrainResult {
    TinyNet net;
    RunRecord record;
};

/// Validation metrics of `net` over `samples` (macro and micro averages).
struct EvalSummary {
    double jaccard = 0.0;
    double dice = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    double jaccard_micro = 0.0;
};

EvalSummary evaluate_model(const TinyNet& net, const std::vector<Sample>& samples,
                           double threshold);

std::vector<ProbMap> predict(const TinyNet& net, const std::vector<Sample>& samples);

/// Mini-batch training with Adam. The loss of a batch is the mean of the
/// per-image losses. Epoch e visits the training set in the order of a
/// Fisher-Yates shuffle drawn from Rng::derive(seed, {shuffle stream, e}).
/// Throws Divergence on a non-finite loss or gradient.
TrainResult train(const TrainConfig& config, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set);

/// epoch,train_loss,val_jaccard,val_dice,val_recall,val_specificity,val_f1
void write_run_csv(std::ostream& out, const RunRecord& record);

} // namespace adaloss
