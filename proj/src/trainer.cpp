#include "adaloss/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "adaloss/csv.hpp"

namespace adaloss {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

bool all_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

} // namespace

void TrainConfig::validate() const {
    adam.validate();
    if (batch_size == 0) {
        throw ContractViolation("TrainConfig: batch_size must be >= 1");
    }
    if (max_epochs == 0) {
        throw ContractViolation("TrainConfig: max_epochs must be >= 1");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ContractViolation("TrainConfig: threshold must lie in [0, 1]");
    }
    if (roc_thresholds < 2) {
        throw ContractViolation("TrainConfig: roc_thresholds must be >= 2");
    }
}

std::vector<ProbMap> predict(const TinyNet& net, const std::vector<Sample>& samples) {
    std::vector<ProbMap> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(forward(net, s.image));
    }
    return out;
}

EvalSummary evaluate_model(const TinyNet& net, const std::vector<Sample>& samples,
                           double threshold) {
    if (samples.empty()) {
        throw ContractViolation("evaluate_model: empty sample set");
    }
    EvalSummary sum;
    ConfusionCounts pooled;
    for (const auto& s : samples) {
        const ConfusionCounts c = confusion(forward(net, s.image), s.mask, threshold);
        pooled += c;
        sum.jaccard += jaccard_index(c);
        sum.dice += dice_index(c);
        sum.recall += recall(c);
        sum.specificity += specificity(c);
        sum.f1 += f_measure(c);
    }
    const double n = static_cast<double>(samples.size());
    sum.jaccard /= n;
    sum.dice /= n;
    sum.recall /= n;
    sum.specificity /= n;
    sum.f1 /= n;
    sum.jaccard_micro = jaccard_index(pooled);
    return sum;
}

TrainResult train(const TrainConfig& config, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set) {
    config.validate();
    if (train_set.empty()) {
        throw ContractViolation("train: empty training set");
    }
    if (val_set.empty()) {
        throw ContractViolation("train: empty validation set");
    }

    Rng init_rng = Rng::derive(config.seed, {kInitStream});
    TrainResult result{TinyNet::he_uniform(init_rng), {}};
    TinyNet& net = result.net;
    AdamState adam(TinyNet::kParameterCount, config.adam);

    const std::size_t n = train_set.size();
    std::vector<std::size_t> order(n);
    std::vector<double> batch_grad(TinyNet::kParameterCount);

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle = Rng::derive(config.seed, {kShuffleStream, epoch});
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle.below(i))]);
        }

        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(n, start + config.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            std::fill(batch_grad.begin(), batch_grad.end(), 0.0);

            for (std::size_t k = start; k < end; ++k) {
                const Sample& s = train_set[order[k]];
                const Activations acts = forward_with_cache(net, s.image);
                LossEval eval = evaluate(config.loss, acts.output(), s.mask);
                if (!std::isfinite(eval.value) || !all_finite(eval.grad)) {
                    throw Divergence(epoch, batch_index, "non-finite loss");
                }
                loss_sum += eval.value;
                for (double& gi : eval.grad) {
                    gi *= inv_batch;
                }
                const auto g = backward(net, s.image, acts, eval.grad);
                for (std::size_t j = 0; j < g.size(); ++j) {
                    batch_grad[j] += g[j];
                }
            }
            if (!all_finite(batch_grad)) {
                throw Divergence(epoch, batch_index, "non-finite weight gradient");
            }
            adam.step(net.parameters(), batch_grad);
            if (!all_finite(net.parameters())) {
                throw Divergence(epoch, batch_index, "non-finite weights");
            }
        }

        const EvalSummary val = evaluate_model(net, val_set, config.threshold);
        result.record.rows.push_back({epoch, loss_sum / static_cast<double>(n), val.jaccard,
                                      val.dice, val.recall, val.specificity, val.f1,
                                      val.jaccard_micro});
    }
    result.record.optimizer_steps = adam.step_count();

    std::vector<ProbMap> probs = predict(net, val_set);
    std::vector<BinMask> masks;
    masks.reserve(val_set.size());
    for (const auto& s : val_set) {
        masks.push_back(s.mask);
    }
    try {
        result.record.final_auc = roc_auc(probs, masks, config.roc_thresholds).auc;
    } catch (const UndefinedAuc&) {
        result.record.final_auc = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
    CsvTable table({"epoch", "train_loss", "val_jaccard", "val_dice", "val_recall",
                    "val_specificity", "val_f1"});
    for (const auto& r : record.rows) {
        table.add_row({format_count(r.epoch), format_real(r.train_loss),
                       format_real(r.val_jaccard), format_real(r.val_dice),
                       format_real(r.val_recall), format_real(r.val_specificity),
                       format_real(r.val_f1)});
    }
    write_csv(out, table);
}

} // namespace adaloss
