#include "adaloss/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "adaloss/bench.hpp"
#include "adaloss/logging.hpp"

namespace adaloss::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// ------------------------------------------------------------ option sets

struct CommonOptions {
    std::uint64_t seed = 1;
    std::string out;
    std::string config;
    std::size_t jobs = 1;
    bool verbose = false;
};

void add_common(CLI::App* app, CommonOptions& o) {
    app->add_option("--seed", o.seed, "Global seed (data, split, runs)")->capture_default_str();
    app->add_option("--out", o.out, "Output path (stdout when omitted)");
    app->add_option("--config", o.config, "Flat key=value config file; flags override it");
    app->add_option("--jobs", o.jobs, "Concurrent training runs")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_flag("--verbose", o.verbose, "Print warnings (e.g. zero-denominator metrics)");
}

struct LossOptions {
    std::string loss = "dice";
    bool all_wrap = false;
    double gamma = AllParams::kDefaultGamma;
    double omega = AllParams::kDefaultOmega;
    double epsilon = AllParams::kDefaultEpsilon;
    double tversky_alpha = TverskyParams{}.alpha;
    double tversky_beta = TverskyParams{}.beta;
    double focal_alpha = FocalParams{}.alpha_balance;
    double focal_gamma = FocalParams{}.gamma_focus;
    double combo_mix = ComboParams{}.mix;
    double ft_gamma = kDefaultFocalTverskyGamma;
    double smooth = kDefaultSmooth;

    AllParams all_params() const { return AllParams(gamma, omega, epsilon); }

    LossSpec spec() const {
        LossSpec s;
        s.base = parse_base_loss(loss);
        s.all_wrap = all_wrap;
        s.all = all_params();
        s.tversky = {tversky_alpha, tversky_beta};
        s.tversky.validate();
        s.focal = {focal_alpha, focal_gamma};
        s.focal.validate();
        s.combo = {combo_mix};
        s.combo.validate();
        s.ft_gamma = ft_gamma;
        s.smooth = smooth;
        return s;
    }
};

void add_all_params(CLI::App* app, LossOptions& o) {
    app->add_option("--gamma", o.gamma, "ALL branch threshold")->capture_default_str();
    app->add_option("--omega", o.omega, "ALL log-branch scale")->capture_default_str();
    app->add_option("--epsilon", o.epsilon, "ALL log-branch offset")->capture_default_str();
}

void add_loss(CLI::App* app, LossOptions& o, bool with_selector = true) {
    if (with_selector) {
        app->add_option("--loss", o.loss,
                        "jaccard | dice | tversky | focal | combo | focal-tversky")
            ->capture_default_str();
        app->add_flag("--all-wrap", o.all_wrap, "Wrap the base loss in ALL");
    }
    add_all_params(app, o);
    app->add_option("--tversky-alpha", o.tversky_alpha, "Tversky FN weight")->capture_default_str();
    app->add_option("--tversky-beta", o.tversky_beta, "Tversky FP weight")->capture_default_str();
    app->add_option("--focal-alpha", o.focal_alpha, "Focal balance weight")->capture_default_str();
    app->add_option("--focal-gamma", o.focal_gamma, "Focal focusing exponent")
        ->capture_default_str();
    app->add_option("--combo-mix", o.combo_mix, "Combo weight on cross-entropy")
        ->capture_default_str();
    app->add_option("--ft-gamma", o.ft_gamma, "Focal-Tversky exponent is 1/ft-gamma")
        ->capture_default_str();
    app->add_option("--smooth", o.smooth, "Overlap-loss smoothing")->capture_default_str();
}

struct DataFlags {
    bench::DataOptions data;
    std::string manifest;
};

void add_data(CLI::App* app, DataFlags& o) {
    auto& s = o.data.synth;
    app->add_option("--width", s.width, "Image width")->capture_default_str();
    app->add_option("--height", s.height, "Image height")->capture_default_str();
    app->add_option("--fg-fraction", s.fg_fraction, "Target foreground fraction")
        ->capture_default_str();
    app->add_option("--n-images", s.n_images, "Number of images")->capture_default_str();
    app->add_option("--noise-sigma", s.noise_sigma, "Gaussian noise sigma")->capture_default_str();
    app->add_option("--blobs-min", s.blobs_min, "Minimum blobs per image")->capture_default_str();
    app->add_option("--blobs-max", s.blobs_max, "Maximum blobs per image")->capture_default_str();
}

void add_split(CLI::App* app, DataFlags& o) {
    app->add_option("--split", o.data.split_ratio, "Training fraction")->capture_default_str();
    app->add_option("--manifest", o.manifest, "Load PGM pairs from a manifest instead");
}

struct TrainFlags {
    double lr = AdamConfig{}.lr;
    std::size_t batch_size = 16;
    std::size_t epochs = 50;
};

void add_train(CLI::App* app, TrainFlags& o) {
    app->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
    app->add_option("--batch-size", o.batch_size, "Mini-batch size")->capture_default_str();
    app->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
}

TrainConfig make_train_config(const TrainFlags& t, const LossSpec& loss, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.adam.lr = t.lr;
    cfg.batch_size = t.batch_size;
    cfg.max_epochs = t.epochs;
    cfg.loss = loss;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

bench::Dataset make_dataset(DataFlags& d, std::uint64_t seed) {
    d.data.synth.seed = seed;
    if (!d.manifest.empty()) {
        d.data.manifest = fs::path(d.manifest);
    } else {
        d.data.synth.validate();
    }
    return bench::prepare_dataset(d.data, seed);
}

// ---------------------------------------------------------------- output

struct Sinks {
    std::ostream& out;
    std::ostream& err;
    const CommonOptions& common;

    std::ostream& summary() const { return common.out.empty() ? err : out; }

    void emit(const CsvTable& table) const {
        if (common.out.empty()) {
            write_csv(out, table);
        } else {
            write_csv_file(common.out, table);
        }
    }
};

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            continue;
        }
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw UsageError(std::string("bad value '") + item + "' in " + what);
        }
    }
    return values;
}

// -------------------------------------------------------------- commands

int cmd_curve(const Sinks& io, const LossOptions& loss, std::size_t points) {
    const AllParams params = loss.all_params();
    const auto rows = bench::derivative_curve(params, points);
    io.emit(bench::curve_table(rows));
    io.summary() << "C=" << format_real(params.c())
                 << " derivative_jump_at_gamma=" << format_real(params.derivative_jump()) << '\n';
    return kSuccess;
}

int cmd_gendata(const Sinks& io, DataFlags& data) {
    if (io.common.out.empty()) {
        throw UsageError("gendata needs --out <directory>");
    }
    data.data.synth.seed = io.common.seed;
    const auto rows = bench::gendata(data.data.synth, io.common.out);
    io.out << "wrote " << rows.size() << " samples to " << io.common.out << '\n';
    return kSuccess;
}

int cmd_train(const Sinks& io, const LossOptions& loss, DataFlags& data, const TrainFlags& tf,
              const std::string& checkpoint) {
    const LossSpec spec = loss.spec();
    const TrainConfig cfg = make_train_config(tf, spec, io.common.seed);
    const bench::Dataset ds = make_dataset(data, io.common.seed);
    const TrainResult result = train(cfg, ds.train, ds.val);

    std::ostringstream csv;
    write_run_csv(csv, result.record);
    if (io.common.out.empty()) {
        io.out << csv.str();
    } else {
        std::ofstream f(io.common.out, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw DataError("cannot write " + io.common.out);
        }
        f << csv.str();
    }
    if (!checkpoint.empty()) {
        save_checkpoint(checkpoint, result.net);
    }
    const auto& last = result.record.final_row();
    io.summary() << "loss=" << label(spec) << " epochs=" << result.record.rows.size()
                 << " steps=" << result.record.optimizer_steps
                 << " val_jaccard=" << format_real(last.val_jaccard)
                 << " val_dice=" << format_real(last.val_dice)
                 << " auc=" << format_real(result.record.final_auc) << '\n';
    return kSuccess;
}

int cmd_grid(const Sinks& io, const LossOptions& loss, DataFlags& data, const TrainFlags& tf,
             const std::string& preset, const std::string& gammas, const std::string& omegas,
             const std::string& epsilons, std::size_t seeds) {
    bench::GridSpec spec;
    if (preset == "table1") {
        spec = bench::table1_grid();
    } else if (preset == "table2") {
        spec = bench::table2_grid();
    } else if (preset != "none") {
        throw UsageError("unknown grid preset '" + preset + "'");
    }
    if (!gammas.empty()) {
        spec.gammas = parse_list(gammas, "--gammas");
    }
    if (!omegas.empty()) {
        spec.omegas = parse_list(omegas, "--omegas");
    }
    if (!epsilons.empty()) {
        spec.epsilons = parse_list(epsilons, "--epsilons");
    }
    spec.seeds = seeds;
    spec.seed = io.common.seed;
    spec.jobs = io.common.jobs;
    spec.train = make_train_config(tf, loss.spec(), io.common.seed);
    spec.validate();

    const bench::Dataset ds = make_dataset(data, io.common.seed);
    const auto report = bench::run_grid(spec, ds);
    io.emit(bench::grid_table(report));
    std::size_t diverged = 0;
    for (const auto& r : report.runs) {
        diverged += r.status == bench::kStatusOk ? 0 : 1;
    }
    io.summary() << "cells=" << spec.cell_count() << " runs=" << report.runs.size()
                 << " diverged=" << diverged << '\n';
    return kSuccess;
}

int cmd_compare(const Sinks& io, const LossOptions& loss, DataFlags& data, const TrainFlags& tf,
                const std::string& losses, std::size_t seeds, std::string trace_out) {
    const LossSpec defaults = loss.spec();
    bench::CompareSpec spec;
    std::stringstream ss(losses);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (!token.empty()) {
            spec.losses.push_back(parse_loss_token(token, defaults));
        }
    }
    spec.seeds = seeds;
    spec.seed = io.common.seed;
    spec.jobs = io.common.jobs;
    spec.train = make_train_config(tf, defaults, io.common.seed);
    spec.validate();

    const bench::Dataset ds = make_dataset(data, io.common.seed);
    const auto report = bench::run_compare(spec, ds);
    io.emit(bench::compare_table(report));

    if (trace_out.empty() && !io.common.out.empty()) {
        fs::path p(io.common.out);
        trace_out = (p.parent_path() / (p.stem().string() + "_trace.csv")).string();
    }
    if (!trace_out.empty()) {
        write_csv_file(trace_out, bench::compare_trace_table(report));
    }
    for (const auto& m : report.means) {
        io.summary() << m.loss << ": jaccard=" << format_real(m.jaccard)
                     << " dice=" << format_real(m.dice) << " auc=" << format_real(m.auc)
                     << " epochs_to_converge=" << format_real(m.epochs_to_converge) << '\n';
    }
    return kSuccess;
}

int cmd_roc(const Sinks& io, const LossOptions& loss, DataFlags& data, const TrainFlags& tf,
            const std::string& checkpoint, std::size_t thresholds) {
    const bench::Dataset ds = make_dataset(data, io.common.seed);
    TinyNet net;
    if (!checkpoint.empty()) {
        net = load_checkpoint(checkpoint);
    } else {
        const TrainConfig cfg = make_train_config(tf, loss.spec(), io.common.seed);
        net = train(cfg, ds.train, ds.val).net;
    }
    const RocCurve curve = bench::model_roc(net, ds.val, thresholds);
    const double oracle = bench::model_rank_auc(net, ds.val);
    io.emit(bench::roc_table(curve));
    const double gap = std::abs(curve.auc - oracle);
    const double bound = 1.0 / static_cast<double>(thresholds);
    io.summary() << "auc=" << format_real(curve.auc) << " rank_auc=" << format_real(oracle)
                 << " gap=" << format_real(gap) << '\n';
    if (!(gap <= bound)) {
        throw CheckFailed("trapezoidal and rank AUC differ by more than 1/" +
                          std::to_string(thresholds));
    }
    return kSuccess;
}

int cmd_gradcheck(const Sinks& io, const LossOptions& loss, bool loss_given, std::size_t trials,
                  double tolerance, double net_tolerance, bool corrupt) {
    bench::GradcheckOptions opt;
    opt.losses = loss_given ? std::vector<LossSpec>{loss.spec()}
                            : bench::all_loss_variants(loss.spec());
    opt.trials = trials;
    opt.tolerance = tolerance;
    opt.net_tolerance = net_tolerance;
    opt.seed = io.common.seed;
    opt.corrupt = corrupt;
    const auto report = bench::run_gradcheck(opt);
    io.emit(bench::gradcheck_table(report));
    io.summary() << "gradcheck " << (report.pass() ? "PASS" : "FAIL") << '\n';
    return report.pass() ? kSuccess : kCheckFailed;
}

} // namespace

std::vector<std::string> apply_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (args[i].starts_with("--config=")) {
            path = args[i].substr(9);
        }
    }
    if (path.empty()) {
        return args;
    }
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config file " + path);
    }

    auto given = [&args](const std::string& key) {
        const std::string flag = "--" + key;
        return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.starts_with(flag + "=");
        });
    };

    std::vector<std::string> injected;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config") {
            throw UsageError(path + ":" + std::to_string(line_no) + ": invalid key");
        }
        if (!given(key)) {
            injected.push_back("--" + key + "=" + value);
        }
    }

    // Insert right after the subcommand name.
    std::vector<std::string> out = args;
    auto sub = std::find_if(out.begin(), out.end(),
                            [](const std::string& a) { return !a.starts_with("-"); });
    const auto pos = sub == out.end() ? out.end() : sub + 1;
    out.insert(pos, injected.begin(), injected.end());
    return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive logarithmic loss benchmark driver"};
    app.name("allbench");
    app.require_subcommand(1);

    CommonOptions common;
    LossOptions loss;
    DataFlags data;
    TrainFlags tf;
    std::size_t points = 101;
    std::string checkpoint;
    std::string preset = "none";
    std::string gammas, omegas, epsilons;
    std::size_t seeds = 0;
    std::string losses = "jaccard,dice,tversky,focal,combo,all";
    std::string trace_out;
    std::size_t thresholds = kDefaultRocThresholds;
    std::size_t trials = 100;
    double tolerance = 1e-6;
    double net_tolerance = 1e-4;
    bool corrupt = false;

    auto* curve = app.add_subcommand("curve", "ALL value and derivative against the base loss");
    add_common(curve, common);
    add_all_params(curve, loss);
    curve->add_option("--points", points, "Evenly spaced points on [0, 1]")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));

    auto* grid = app.add_subcommand("grid", "Hyperparameter grid over gamma, omega, epsilon");
    add_common(grid, common);
    add_loss(grid, loss);
    add_data(grid, data);
    add_split(grid, data);
    add_train(grid, tf);
    grid->add_option("--preset", preset, "none | table1 | table2")->capture_default_str();
    grid->add_option("--gammas", gammas, "Comma-separated gamma values");
    grid->add_option("--omegas", omegas, "Comma-separated omega values");
    grid->add_option("--epsilons", epsilons, "Comma-separated epsilon values");
    auto* grid_seeds = grid->add_option("--seeds", seeds, "Runs per cell (default 3)");

    auto* compare = app.add_subcommand("compare", "Train one model per (loss, seed)");
    add_common(compare, common);
    add_loss(compare, loss, false);
    add_data(compare, data);
    add_split(compare, data);
    add_train(compare, tf);
    compare->add_option("--losses", losses, "Comma-separated: <base>, all, all-<base>")
        ->capture_default_str();
    auto* compare_seeds = compare->add_option("--seeds", seeds, "Runs per loss (default 5)");
    compare->add_option("--trace-out", trace_out, "Per-epoch trace CSV");

    auto* roc = app.add_subcommand("roc", "Pooled-pixel ROC over the validation split");
    add_common(roc, common);
    add_loss(roc, loss);
    add_data(roc, data);
    add_split(roc, data);
    add_train(roc, tf);
    roc->add_option("--checkpoint", checkpoint, "Evaluate this checkpoint instead of training");
    roc->add_option("--thresholds", thresholds, "Number of thresholds")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));

    auto* gradcheck = app.add_subcommand("gradcheck", "Analytic vs finite-difference gradients");
    add_common(gradcheck, common);
    add_loss(gradcheck, loss);
    gradcheck->add_option("--trials", trials, "Random inputs per loss")->capture_default_str();
    gradcheck->add_option("--tolerance", tolerance, "Loss-level relative error bound")
        ->capture_default_str();
    gradcheck->add_option("--net-tolerance", net_tolerance, "Network-level relative error bound")
        ->capture_default_str();
    gradcheck->add_flag("--corrupt", corrupt, "Perturb analytic gradients (negative control)");

    auto* gendata = app.add_subcommand("gendata", "Write a synthetic dataset as PGM + manifest");
    add_common(gendata, common);
    add_data(gendata, data);

    auto* trainc = app.add_subcommand("train", "Train one model and write its per-epoch record");
    add_common(trainc, common);
    add_loss(trainc, loss);
    add_data(trainc, data);
    add_split(trainc, data);
    add_train(trainc, tf);
    trainc->add_option("--checkpoint", checkpoint, "Save the trained weights here");

    try {
        std::vector<std::string> args = apply_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }

    log::set_level(common.verbose ? log::Level::warning : log::Level::error);
    const Sinks io{out, err, common};
    try {
        if (curve->parsed()) {
            return cmd_curve(io, loss, points);
        }
        if (gendata->parsed()) {
            return cmd_gendata(io, data);
        }
        if (trainc->parsed()) {
            return cmd_train(io, loss, data, tf, checkpoint);
        }
        if (grid->parsed()) {
            return cmd_grid(io, loss, data, tf, preset, gammas, omegas, epsilons,
                            grid_seeds->count() ? seeds : 3);
        }
        if (compare->parsed()) {
            return cmd_compare(io, loss, data, tf, losses, compare_seeds->count() ? seeds : 5,
                               trace_out);
        }
        if (roc->parsed()) {
            return cmd_roc(io, loss, data, tf, checkpoint, thresholds);
        }
        if (gradcheck->parsed()) {
            const bool loss_given = gradcheck->get_option("--loss")->count() > 0 ||
                                    gradcheck->get_option("--all-wrap")->count() > 0;
            return cmd_gradcheck(io, loss, loss_given, trials, tolerance, net_tolerance, corrupt);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ContractViolation& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const CheckFailed& e) {
        err << "check failed: " << e.what() << '\n';
        return kCheckFailed;
    } catch (const std::exception& e) {
        // DataError, GenerationFailure, Divergence, UndefinedAuc, I/O.
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}

} // namespace adaloss::cli
