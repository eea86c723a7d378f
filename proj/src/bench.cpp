#include "adaloss/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "adaloss/gradcheck.hpp"
#include "adaloss/rng.hpp"

namespace adaloss::bench {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kRunStream = 0x52554EULL;      // "RUN"
constexpr std::uint64_t kGradcheckStream = 0x4743ULL;  // "GC"

std::vector<std::string> run_header() {
    return {"row_type", "gamma", "omega", "epsilon", "seed", "val_jaccard", "val_dice",
            "epochs_run", "status"};
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) {
        return kNaN;
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

// ---------------------------------------------------------------- datasets

Dataset prepare_dataset(const DataOptions& options, std::uint64_t split_seed) {
    std::vector<Sample> samples =
        options.manifest ? load_dataset(*options.manifest) : generate(options.synth);
    auto [train, val] = train_val_split(std::move(samples), options.split_ratio, split_seed);
    return Dataset{std::move(train), std::move(val)};
}

std::vector<ManifestRow> gendata(const SynthSpec& spec, const std::filesystem::path& out_dir) {
    return write_dataset(out_dir, generate(spec));
}

// ------------------------------------------------------------- scheduling

std::uint64_t run_seed(std::uint64_t global_seed, std::size_t run_index) {
    return Rng::derive_seed(global_seed, {kRunStream, static_cast<std::uint64_t>(run_index)});
}

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::min(std::max<std::size_t>(jobs, 1), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    try {
                        task(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) {
                            first_error = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

// ------------------------------------------------------------------ curve

std::vector<CurveRow> derivative_curve(const AllParams& params, std::size_t n_points) {
    if (n_points < 2) {
        throw ContractViolation("derivative_curve: need at least 2 points");
    }
    std::vector<double> xs(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        xs[k] = static_cast<double>(k) / static_cast<double>(n_points - 1);
    }
    if (std::find(xs.begin(), xs.end(), params.gamma()) == xs.end()) {
        xs.insert(std::upper_bound(xs.begin(), xs.end(), params.gamma()), params.gamma());
    }
    std::vector<CurveRow> rows;
    rows.reserve(xs.size());
    for (double x : xs) {
        rows.push_back({x, all_forward(x, params), all_derivative(x, params)});
    }
    return rows;
}

CsvTable curve_table(const std::vector<CurveRow>& rows) {
    CsvTable table({"x", "forward", "derivative"});
    for (const auto& r : rows) {
        table.add_row({format_real(r.x), format_real(r.forward), format_real(r.derivative)});
    }
    return table;
}

// ------------------------------------------------------------------- grid

void GridSpec::validate() const {
    if (cell_count() == 0) {
        throw ContractViolation("grid: every swept list needs at least one value");
    }
    if (seeds == 0) {
        throw ContractViolation("grid: seeds must be >= 1");
    }
    for (double g : gammas) {
        for (double o : omegas) {
            for (double e : epsilons) {
                (void)AllParams(g, o, e);
            }
        }
    }
    train.validate();
}

GridSpec table1_grid() {
    GridSpec spec;
    spec.gammas = {0.1};
    spec.omegas = {6, 8, 10, 12, 14, 16};
    spec.epsilons = {0.3, 0.5, 1.0, 2.0};
    return spec;
}

GridSpec table2_grid() {
    GridSpec spec;
    spec.gammas = {0.08, 0.10, 0.12, 0.15, 0.20, 0.30};
    spec.omegas = {10};
    spec.epsilons = {0.5};
    return spec;
}

GridReport run_grid(const GridSpec& spec, const Dataset& data) {
    spec.validate();

    struct Cell {
        double gamma, omega, epsilon;
    };
    std::vector<Cell> cells;
    for (double g : spec.gammas) {
        for (double e : spec.epsilons) {
            for (double o : spec.omegas) {
                cells.push_back({g, o, e});
            }
        }
    }

    GridReport report;
    report.runs.resize(cells.size() * spec.seeds);
    parallel_for(report.runs.size(), spec.jobs, [&](std::size_t task) {
        const std::size_t cell = task / spec.seeds;
        const std::size_t rep = task % spec.seeds;
        const Cell& c = cells[cell];

        TrainConfig cfg = spec.train;
        cfg.loss.all_wrap = true;
        cfg.loss.all = AllParams(c.gamma, c.omega, c.epsilon);
        cfg.seed = run_seed(spec.seed, rep);

        GridRun& run = report.runs[task];
        run.cell = cell;
        run.gamma = c.gamma;
        run.omega = c.omega;
        run.epsilon = c.epsilon;
        run.seed = cfg.seed;
        try {
            const TrainResult r = train(cfg, data.train, data.val);
            run.val_jaccard = r.record.final_row().val_jaccard;
            run.val_dice = r.record.final_row().val_dice;
            run.epochs_run = r.record.rows.size();
        } catch (const Divergence& d) {
            run.status = kStatusDiverged;
            run.val_jaccard = kNaN;
            run.val_dice = kNaN;
            run.epochs_run = d.epoch();
        }
    });

    for (std::size_t cell = 0; cell < cells.size(); ++cell) {
        GridCellMean mean;
        mean.cell = cell;
        mean.gamma = cells[cell].gamma;
        mean.omega = cells[cell].omega;
        mean.epsilon = cells[cell].epsilon;
        std::vector<double> jac, dice, epochs;
        for (std::size_t rep = 0; rep < spec.seeds; ++rep) {
            const GridRun& run = report.runs[cell * spec.seeds + rep];
            if (run.status != kStatusOk) {
                mean.status = kStatusDiverged;
                continue;
            }
            jac.push_back(run.val_jaccard);
            dice.push_back(run.val_dice);
            epochs.push_back(static_cast<double>(run.epochs_run));
        }
        mean.runs = jac.size();
        mean.val_jaccard = mean_of(jac);
        mean.val_dice = mean_of(dice);
        mean.epochs_run = mean_of(epochs);
        report.means.push_back(mean);
    }
    return report;
}

CsvTable grid_table(const GridReport& report) {
    CsvTable table(run_header());
    for (const auto& mean : report.means) {
        for (const auto& run : report.runs) {
            if (run.cell != mean.cell) {
                continue;
            }
            table.add_row({"run", format_real(run.gamma), format_real(run.omega),
                           format_real(run.epsilon), std::to_string(run.seed),
                           format_real(run.val_jaccard), format_real(run.val_dice),
                           format_count(run.epochs_run), run.status});
        }
        table.add_row({"mean", format_real(mean.gamma), format_real(mean.omega),
                       format_real(mean.epsilon), "", format_real(mean.val_jaccard),
                       format_real(mean.val_dice), format_real(mean.epochs_run), mean.status});
    }
    return table;
}

// ---------------------------------------------------------------- compare

void CompareSpec::validate() const {
    if (losses.empty()) {
        throw ContractViolation("compare: at least one loss is required");
    }
    if (seeds == 0) {
        throw ContractViolation("compare: seeds must be >= 1");
    }
    if (!(convergence_fraction > 0.0 && convergence_fraction <= 1.0)) {
        throw ContractViolation("compare: convergence fraction must lie in (0, 1]");
    }
    train.validate();
}

std::size_t epochs_to_reach(const RunRecord& record, double fraction) {
    if (record.rows.empty()) {
        throw ContractViolation("epochs_to_reach: empty run record");
    }
    const double target = fraction * record.final_row().val_jaccard;
    for (const auto& row : record.rows) {
        if (row.val_jaccard >= target) {
            return row.epoch;
        }
    }
    return record.final_row().epoch;
}

CompareReport run_compare(const CompareSpec& spec, const Dataset& data) {
    spec.validate();
    CompareReport report;
    report.convergence_fraction = spec.convergence_fraction;
    report.runs.resize(spec.losses.size() * spec.seeds);

    parallel_for(report.runs.size(), spec.jobs, [&](std::size_t task) {
        const std::size_t li = task / spec.seeds;
        const std::size_t rep = task % spec.seeds;
        TrainConfig cfg = spec.train;
        cfg.loss = spec.losses[li];
        cfg.seed = run_seed(spec.seed, rep);

        CompareRun& run = report.runs[task];
        run.loss_index = li;
        run.loss = label(spec.losses[li]);
        run.seed_index = rep;
        run.seed = cfg.seed;
        try {
            TrainResult r = train(cfg, data.train, data.val);
            const EpochRow& last = r.record.final_row();
            run.recall = last.val_recall;
            run.specificity = last.val_specificity;
            run.jaccard = last.val_jaccard;
            run.dice = last.val_dice;
            run.f1 = last.val_f1;
            run.jaccard_micro = last.val_jaccard_micro;
            run.auc = r.record.final_auc;
            run.epochs_to_converge = epochs_to_reach(r.record, spec.convergence_fraction);
            run.record = std::move(r.record);
        } catch (const Divergence&) {
            run.status = kStatusDiverged;
            run.recall = run.specificity = run.jaccard = run.dice = run.f1 = run.auc =
                run.jaccard_micro = kNaN;
        }
    });

    for (std::size_t li = 0; li < spec.losses.size(); ++li) {
        CompareMean mean;
        mean.loss = label(spec.losses[li]);
        std::vector<double> rc, sp, ja, di, f1, auc, jm, ep;
        for (std::size_t rep = 0; rep < spec.seeds; ++rep) {
            const CompareRun& run = report.runs[li * spec.seeds + rep];
            if (run.status != kStatusOk) {
                mean.status = kStatusDiverged;
                continue;
            }
            rc.push_back(run.recall);
            sp.push_back(run.specificity);
            ja.push_back(run.jaccard);
            di.push_back(run.dice);
            f1.push_back(run.f1);
            auc.push_back(run.auc);
            jm.push_back(run.jaccard_micro);
            ep.push_back(static_cast<double>(run.epochs_to_converge));
        }
        mean.runs = ja.size();
        mean.recall = mean_of(rc);
        mean.specificity = mean_of(sp);
        mean.jaccard = mean_of(ja);
        mean.dice = mean_of(di);
        mean.f1 = mean_of(f1);
        mean.auc = mean_of(auc);
        mean.jaccard_micro = mean_of(jm);
        mean.epochs_to_converge = mean_of(ep);
        report.means.push_back(mean);
    }
    return report;
}

CsvTable compare_table(const CompareReport& report) {
    CsvTable table({"row_type", "loss", "seed", "status", "recall", "specificity", "jaccard",
                    "dice", "f1", "auc", "jaccard_micro", "epochs_to_converge"});
    for (const auto& run : report.runs) {
        table.add_row({"run", run.loss, std::to_string(run.seed), run.status,
                       format_real(run.recall), format_real(run.specificity),
                       format_real(run.jaccard), format_real(run.dice), format_real(run.f1),
                       format_real(run.auc), format_real(run.jaccard_micro),
                       format_count(run.epochs_to_converge)});
    }
    for (const auto& m : report.means) {
        table.add_row({"mean", m.loss, "", m.status, format_real(m.recall),
                       format_real(m.specificity), format_real(m.jaccard), format_real(m.dice),
                       format_real(m.f1), format_real(m.auc), format_real(m.jaccard_micro),
                       format_real(m.epochs_to_converge)});
    }
    return table;
}

CsvTable compare_trace_table(const CompareReport& report) {
    CsvTable table({"loss", "seed", "epoch", "train_loss", "val_jaccard", "val_dice",
                    "val_recall", "val_specificity", "val_f1"});
    for (const auto& run : report.runs) {
        for (const auto& r : run.record.rows) {
            table.add_row({run.loss, std::to_string(run.seed), format_count(r.epoch),
                           format_real(r.train_loss), format_real(r.val_jaccard),
                           format_real(r.val_dice), format_real(r.val_recall),
                           format_real(r.val_specificity), format_real(r.val_f1)});
        }
    }
    return table;
}

// -------------------------------------------------------------------- roc

namespace {
std::vector<BinMask> masks_of(const std::vector<Sample>& samples) {
    std::vector<BinMask> masks;
    masks.reserve(samples.size());
    for (const auto& s : samples) {
        masks.push_back(s.mask);
    }
    return masks;
}
} // namespace

RocCurve model_roc(const TinyNet& net, const std::vector<Sample>& samples,
                   std::size_t n_thresholds) {
    return roc_auc(predict(net, samples), masks_of(samples), n_thresholds);
}

double model_rank_auc(const TinyNet& net, const std::vector<Sample>& samples) {
    return rank_auc(predict(net, samples), masks_of(samples));
}

CsvTable roc_table(const RocCurve& curve) {
    CsvTable table({"threshold", "fpr", "tpr"});
    for (const auto& p : curve.points) {
        table.add_row({format_real(p.threshold), format_real(p.fpr), format_real(p.tpr)});
    }
    return table;
}

// -------------------------------------------------------------- gradcheck

std::vector<LossSpec> all_loss_variants(const LossSpec& defaults) {
    std::vector<LossSpec> out;
    for (bool wrap : {false, true}) {
        for (BaseLoss base : kAllBaseLosses) {
            LossSpec spec = defaults;
            spec.base = base;
            spec.all_wrap = wrap;
            out.push_back(spec);
        }
    }
    return out;
}

bool GradcheckReport::pass() const {
    return !lines.empty() &&
           std::all_of(lines.begin(), lines.end(), [](const auto& l) { return l.pass; });
}

namespace {

constexpr double kPixelMargin = 1e-4;
constexpr double kBranchMargin = 1e-4;
constexpr double kReluMargin = 1e-3;
constexpr std::size_t kMaxRedraws = 100000;
// Central differences carry rounding noise of order eps * |f| / step, so
// components are compared relative to at least 1e-3 * |f|.
constexpr double kScaleFloor = 1e-3;

// Wrapped losses are only compared where the base value is a valid ALL input
// and far enough from the join that the stencil stays on one branch.
bool admissible(const LossSpec& spec, const ProbMap& p, const BinMask& g) {
    if (!spec.all_wrap) {
        return true;
    }
    LossSpec base = spec;
    base.all_wrap = false;
    const double v = evaluate(base, p, g).value;
    return v >= 0.0 && v <= 1.0 && std::abs(v - spec.all.gamma()) > kBranchMargin;
}

std::vector<std::uint8_t> draw_labels(Rng& rng, std::size_t n) {
    const double q = rng.uniform(0.05, 0.6);
    std::vector<std::uint8_t> g(n);
    for (auto& v : g) {
        v = rng.uniform() < q ? 1 : 0;
    }
    if (std::find(g.begin(), g.end(), 1) == g.end()) {
        g[static_cast<std::size_t>(rng.below(n))] = 1;
    }
    return g;
}

// Even trials: probabilities uniform on [0.002, 0.998]. Odd trials: close to
// the labels, so overlap losses land below gamma and exercise the log branch.
std::vector<double> draw_probs(Rng& rng, const std::vector<std::uint8_t>& g, bool near_labels) {
    std::vector<double> p(g.size());
    const double spread = rng.uniform(0.01, 0.15);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (near_labels) {
            const double d = rng.uniform(0.002, spread);
            p[i] = g[i] ? 1.0 - d : d;
        } else {
            p[i] = rng.uniform(0.002, 0.998);
        }
    }
    return p;
}

GradcheckLine check_loss_level(const LossSpec& spec, std::size_t spec_index,
                               const GradcheckOptions& opt) {
    GradcheckLine line{label(spec), "loss", opt.trials, 0, 0.0, opt.tolerance, false};
    const LossFn fn = [&spec](const ProbMap& p, const BinMask& g) {
        return evaluate(spec, p, g).value;
    };
    for (std::size_t trial = 0; trial < opt.trials; ++trial) {
        Rng rng = Rng::derive(opt.seed, {kGradcheckStream, 0, spec_index, trial});
        std::optional<ProbMap> p;
        std::optional<BinMask> g;
        for (std::size_t attempt = 0;; ++attempt) {
            if (attempt == kMaxRedraws) {
                throw ContractViolation("gradcheck: no admissible input for " + line.loss);
            }
            std::size_t w = 0, h = 0;
            do {
                w = static_cast<std::size_t>(rng.between(1, 16));
                h = static_cast<std::size_t>(rng.between(1, 16));
            } while (w * h < 4);
            auto labels = draw_labels(rng, w * h);
            auto probs = draw_probs(rng, labels, trial % 2 == 1);
            p.emplace(w, h, std::move(probs));
            g.emplace(w, h, std::move(labels));
            if (admissible(spec, *p, *g)) {
                break;
            }
        }
        const LossEval eval = evaluate(spec, *p, *g);
        std::vector<double> analytic = eval.grad;
        const double floor = kScaleFloor * std::abs(eval.value);
        if (opt.corrupt) {
            for (double& a : analytic) {
                a *= 1.001;
            }
        }
        const auto numeric = finite_difference_grad(fn, *p, *g, opt.loss_step);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double pi = (*p)[i];
            if (pi < kPixelMargin || pi > 1.0 - kPixelMargin) {
                continue;
            }
            line.max_rel_error = std::max(line.max_rel_error, relative_error(analytic[i], numeric[i], floor));
            ++line.compared;
        }
    }
    line.pass = line.compared > 0 && line.max_rel_error < opt.tolerance;
    return line;
}

TinyNet net_from(std::span<const double> params) {
    TinyNet net;
    std::copy(params.begin(), params.end(), net.parameters().begin());
    return net;
}

double min_abs(const std::vector<double>& v) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : v) {
        m = std::min(m, std::abs(x));
    }
    return m;
}

GradcheckLine check_net_level(const LossSpec& spec, std::size_t spec_index,
                              const GradcheckOptions& opt) {
    constexpr std::size_t kSide = 8;
    GradcheckLine line{label(spec), "net", opt.trials, 0, 0.0, opt.net_tolerance, false};
    for (std::size_t trial = 0; trial < opt.trials; ++trial) {
        Rng rng = Rng::derive(opt.seed, {kGradcheckStream, 1, spec_index, trial});
        const bool confident = trial % 2 == 1;
        std::optional<Image> image;
        std::optional<BinMask> mask;
        TinyNet net;
        Activations acts;
        for (std::size_t attempt = 0;; ++attempt) {
            if (attempt == kMaxRedraws) {
                throw ContractViolation("gradcheck: no admissible network draw for " + line.loss);
            }
            std::vector<double> pixels(kSide * kSide);
            for (double& v : pixels) {
                v = rng.uniform();
            }
            image.emplace(kSide, kSide, std::move(pixels));
            // Confident trials: all-foreground mask and a strongly positive
            // output bias put the overlap losses well below gamma.
            mask.emplace(kSide, kSide,
                         confident ? std::vector<std::uint8_t>(kSide * kSide, 1)
                                   : draw_labels(rng, kSide * kSide));
            net = TinyNet::he_uniform(rng);
            if (confident) {
                net.conv2_bias() = 4.0;
            }
            acts = forward_with_cache(net, *image);
            if (min_abs(acts.hidden_pre) > kReluMargin && admissible(spec, acts.output(), *mask)) {
                break;
            }
        }

        const LossEval eval = evaluate(spec, acts.output(), *mask);
        std::vector<double> analytic = backward(net, *image, acts, eval.grad);
        const double floor = kScaleFloor * std::abs(eval.value);
        if (opt.corrupt) {
            for (double& a : analytic) {
                a *= 1.001;
            }
        }

        std::vector<std::size_t> indices(TinyNet::kParameterCount);
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        const std::size_t probes = std::min(opt.net_weights, indices.size());
        for (std::size_t k = 0; k < probes; ++k) {
            const auto j = k + static_cast<std::size_t>(rng.below(indices.size() - k));
            std::swap(indices[k], indices[j]);
        }

        std::vector<double> params(net.parameters().begin(), net.parameters().end());
        const auto objective = [&](std::span<const double> theta) {
            return evaluate(spec, forward(net_from(theta), *image), *mask).value;
        };
        for (std::size_t k = 0; k < probes; ++k) {
            const std::size_t idx = indices[k];
            const double numeric = finite_difference_partial(objective, params, idx, opt.net_step);
            line.max_rel_error = std::max(line.max_rel_error, relative_error(analytic[idx], numeric, floor));
            ++line.compared;
        }
    }
    line.pass = line.compared > 0 && line.max_rel_error < opt.net_tolerance;
    return line;
}

} // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
    if (options.losses.empty()) {
        throw ContractViolation("gradcheck: no losses selected");
    }
    if (options.trials == 0) {
        throw ContractViolation("gradcheck: trials must be >= 1");
    }
    GradcheckReport report;
    for (std::size_t i = 0; i < options.losses.size(); ++i) {
        report.lines.push_back(check_loss_level(options.losses[i], i, options));
        report.lines.push_back(check_net_level(options.losses[i], i, options));
    }
    return report;
}

CsvTable gradcheck_table(const GradcheckReport& report) {
    CsvTable table({"loss", "level", "trials", "compared", "max_rel_error", "tolerance", "result"});
    for (const auto& l : report.lines) {
        table.add_row({l.loss, l.level, format_count(l.trials), format_count(l.compared),
                       format_real(l.max_rel_error), format_real(l.tolerance),
                       l.pass ? "pass" : "fail"});
    }
    return table;
}

} // namespace adaloss::bench
