#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adaloss/csv.hpp"
#include "adaloss/pgm.hpp"
#include "adaloss/trainer.hpp"

namespace adaloss::bench {

// ---------------------------------------------------------------- datasets

struct DataOptions {
    SynthSpec synth{};
    double split_ratio = kDefaultSplitRatio;
    /// When set, samples come from this manifest instead of the generator.
    std::optional<std::filesystem::path> manifest;
};

struct Dataset {
    std::vector<Sample> train;
    std::vector<Sample> val;
};

/// Generates (or loads) the samples, then splits with `split_seed`.
Dataset prepare_dataset(const DataOptions& options, std::uint64_t split_seed);

/// Writes the PGM pairs and manifest.csv; identical spec -> identical bytes.
std::vector<ManifestRow> gendata(const SynthSpec& spec, const std::filesystem::path& out_dir);

// ------------------------------------------------------------- scheduling

/// Seed of the run_index-th repetition. Depends only on the global seed and
/// the repetition number, so every grid cell / loss sees the same weight
/// initialisation and batch order for a given repetition.
std::uint64_t run_seed(std::uint64_t global_seed, std::size_t run_index);

/// Runs task(0..count-1) on up to `jobs` threads. Tasks write only to their
/// own slot, so results do not depend on scheduling. The first exception
/// thrown by any task is rethrown after all threads finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task);

// ------------------------------------------------------------------ curve

struct CurveRow {
    double x = 0.0;
    double forward = 0.0;
    double derivative = 0.0;
};

/// n_points evenly spaced x in [0, 1], plus x = gamma inserted in order if it
/// is not already on the grid.
std::vector<CurveRow> derivative_curve(const AllParams& params, std::size_t n_points);
CsvTable curve_table(const std::vector<CurveRow>& rows);

// ------------------------------------------------------------------- grid

struct GridSpec {
    std::vector<double> gammas{AllParams::kDefaultGamma};
    std::vector<double> omegas{AllParams::kDefaultOmega};
    std::vector<double> epsilons{AllParams::kDefaultEpsilon};
    std::size_t seeds = 3;
    /// Base loss and training settings; the ALL wrap is forced on per cell.
    TrainConfig train{};
    std::uint64_t seed = 1;
    std::size_t jobs = 1;

    std::size_t cell_count() const { return gammas.size() * omegas.size() * epsilons.size(); }
    void validate() const;
};

/// omega in {6..16} x epsilon in {0.3, 0.5, 1, 2} at gamma = 0.1.
GridSpec table1_grid();
/// gamma in {0.08 .. 0.30} at omega = 10, epsilon = 0.5.
GridSpec table2_grid();

inline constexpr const char* kStatusOk = "ok";
inline constexpr const char* kStatusDiverged = "diverged";

struct GridRun {
    std::size_t cell = 0;
    double gamma = 0.0;
    double omega = 0.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double val_jaccard = 0.0;
    double val_dice = 0.0;
    std::size_t epochs_run = 0;
    std::string status = kStatusOk;
};

struct GridCellMean {
    std::size_t cell = 0;
    double gamma = 0.0;
    double omega = 0.0;
    double epsilon = 0.0;
    double val_jaccard = 0.0;
    double val_dice = 0.0;
    double epochs_run = 0.0;
    std::size_t runs = 0;
    std::string status = kStatusOk;
};

struct GridReport {
    std::vector<GridRun> runs;       ///< cells x seeds, cell-major
    std::vector<GridCellMean> means; ///< one per cell
};

/// Cells are enumerated gamma-major, then epsilon, then omega. A diverging
/// run is recorded with status "diverged" and NaN metrics.
GridReport run_grid(const GridSpec& spec, const Dataset& data);

/// row_type,gamma,omega,epsilon,seed,val_jaccard,val_dice,epochs_run,status
/// with each cell's run rows followed by its mean row (empty seed).
CsvTable grid_table(const GridReport& report);

// ---------------------------------------------------------------- compare

struct CompareSpec {
    std::vector<LossSpec> losses;
    std::size_t seeds = 5;
    TrainConfig train{}; ///< loss field ignored
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    double convergence_fraction = 0.95;

    void validate() const;
};

struct CompareRun {
    std::size_t loss_index = 0;
    std::string loss;
    std::size_t seed_index = 0;
    std::uint64_t seed = 0;
    std::string status = kStatusOk;
    RunRecord record;
    double recall = 0.0;
    double specificity = 0.0;
    double jaccard = 0.0;
    double dice = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    double jaccard_micro = 0.0;
    std::size_t epochs_to_converge = 0;
};

struct CompareMean {
    std::string loss;
    std::size_t runs = 0;
    std::string status = kStatusOk;
    double recall = 0.0;
    double specificity = 0.0;
    double jaccard = 0.0;
    double dice = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    double jaccard_micro = 0.0;
    double epochs_to_converge = 0.0;
};

struct CompareReport {
    std::vector<CompareRun> runs;   ///< loss-major, then seed
    std::vector<CompareMean> means; ///< one per listed loss
    double convergence_fraction = 0.95;
};

/// First epoch (1-based) whose validation Jaccard reaches fraction x the
/// final epoch's value.
std::size_t epochs_to_reach(const RunRecord& record, double fraction);

CompareReport run_compare(const CompareSpec& spec, const Dataset& data);

/// row_type,loss,seed,status,recall,specificity,jaccard,dice,f1,auc,jaccard_micro,epochs_to_converge
CsvTable compare_table(const CompareReport& report);
/// loss,seed,epoch,train_loss,val_jaccard,val_dice,val_recall,val_specificity,val_f1
CsvTable compare_trace_table(const CompareReport& report);

// -------------------------------------------------------------------- roc

RocCurve model_roc(const TinyNet& net, const std::vector<Sample>& samples,
                   std::size_t n_thresholds);
double model_rank_auc(const TinyNet& net, const std::vector<Sample>& samples);
/// threshold,fpr,tpr
CsvTable roc_table(const RocCurve& curve);

// -------------------------------------------------------------- gradcheck

struct GradcheckOptions {
    std::vector<LossSpec> losses;
    std::size_t trials = 100;
    double tolerance = 1e-6;      ///< loss-level max relative error
    double net_tolerance = 1e-4;  ///< through TinyNet
    double loss_step = 1e-6;
    double net_step = 1e-5;
    std::size_t net_weights = 20; ///< parameters probed per network trial
    std::uint64_t seed = 1;
    /// Negative control: perturbs every analytic gradient before comparison.
    bool corrupt = false;
};

/// Every base loss, plain and ALL-wrapped with default parameters.
std::vector<LossSpec> all_loss_variants(const LossSpec& defaults = {});

struct GradcheckLine {
    std::string loss;
    std::string level; ///< "loss" or "net"
    std::size_t trials = 0;
    std::size_t compared = 0;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct GradcheckReport {
    std::vector<GradcheckLine> lines;
    bool pass() const;
};

/// Random (p, g) pairs of 4..256 pixels compared against central differences,
/// plus random 8x8 images through a He-initialised TinyNet. Errors are
/// relative_error(analytic, numeric, 1e-3 * |loss|). Pixels within
/// 1e-4 of 0 or 1 are not compared; draws whose base loss falls outside
/// [0, 1] or within 1e-4 of gamma (wrapped losses), or that put a ReLU input
/// within 1e-3 of its kink, are redrawn.
GradcheckReport run_gradcheck(const GradcheckOptions& options);
/// loss,level,trials,compared,max_rel_error,tolerance,result
CsvTable gradcheck_table(const GradcheckReport& report);

} // namespace adaloss::bench
