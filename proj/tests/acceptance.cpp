// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "adaloss/adaptive_log.hpp"
#include "adaloss/bench.hpp"
#include "adaloss/cli.hpp"
#include "adaloss/csv.hpp"
#include "adaloss/losses.hpp"
#include "adaloss/metrics.hpp"
#include "adaloss/rng.hpp"

using namespace adaloss;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void require(Outcome& o, bool ok, const std::string& what) {
    if (!ok && o.pass) {
        o.pass = false;
        o.detail = what;
    }
}

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "adaloss_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    if (out) {
        *out = o.str();
    }
    if (err) {
        *err = e.str();
    }
    return code;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

double num(const std::string& s) { return std::stod(s); }

struct RandomPair {
    ProbMap p;
    BinMask g;
};

RandomPair random_pair(Rng& rng) {
    std::size_t w = 0, h = 0;
    do {
        w = static_cast<std::size_t>(rng.between(1, 16));
        h = static_cast<std::size_t>(rng.between(1, 16));
    } while (w * h < 4);
    std::vector<double> p(w * h);
    std::vector<std::uint8_t> g(w * h);
    const double rate = rng.uniform(0.05, 0.6);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = rng.uniform();
        g[i] = rng.uniform() < rate ? 1 : 0;
    }
    g[rng.below(g.size())] = 1;
    return {ProbMap(w, h, std::move(p)), BinMask(w, h, std::move(g))};
}

// ------------------------------------------------------------------------

Outcome closed_form() {
    Outcome o;
    const AllParams d;
    const double reference = 0.1 - 10.0 * std::log(1.2);
    const double c = d.c();
    require(o, std::abs(c - reference) < 1e-12, "join constant");
    require(o, std::abs(all_forward(0.05, d) - 10.0 * std::log(1.1)) < 1e-12, "forward(0.05)");
    require(o, std::abs(all_forward(0.3, d) - (0.3 - c)) < 1e-12, "forward(0.3)");
    require(o, std::abs(all_log_branch(0.1, d) - all_linear_branch(0.1, d)) < 1e-12,
            "branches at gamma");
    o.detail = o.pass ? "C=" + format_real(c) + " forward(0.05)=" + format_real(all_forward(0.05, d)) +
                            " forward(0.3)=" + format_real(all_forward(0.3, d))
                      : o.detail;
    return o;
}

Outcome gradient_oracle() {
    Outcome o;
    bench::GradcheckOptions opt;
    opt.losses = bench::all_loss_variants();
    opt.trials = 100;
    opt.tolerance = 1e-6;
    opt.net_tolerance = 1e-4;
    const auto report = bench::run_gradcheck(opt);
    double worst_loss = 0.0, worst_net = 0.0;
    for (const auto& line : report.lines) {
        require(o, line.pass, line.loss + " " + line.level + " error " +
                                  format_real(line.max_rel_error));
        require(o, line.compared > 0, line.loss + " " + line.level + " compared nothing");
        double& w = line.level == "loss" ? worst_loss : worst_net;
        w = std::max(w, line.max_rel_error);
    }
    require(o, report.lines.size() == 24, "expected 24 check lines");
    if (o.pass) {
        o.detail = "12 losses x 100 trials, max rel error loss " + format_real(worst_loss) +
                   ", net " + format_real(worst_net);
    }
    return o;
}

Outcome derivative_shape() {
    Outcome o;
    struct Case {
        double gamma, omega, epsilon;
    };
    std::string summary;
    for (const Case c : {Case{0.1, 10.0, 0.5}, Case{0.25, 6.0, 1.0}}) {
        std::string out, err;
        const int code = run_cli({"curve", "--points", "101", "--gamma", format_real(c.gamma),
                                  "--omega", format_real(c.omega), "--epsilon",
                                  format_real(c.epsilon)},
                                 &out, &err);
        require(o, code == 0, "curve exit code");
        std::istringstream in(out);
        const CsvTable t = read_csv(in, "curve");
        std::size_t below = 0, above = 0;
        double previous = INFINITY;
        for (const auto& row : t.rows()) {
            const double x = num(row[0]);
            const double dv = num(row[2]);
            if (x < c.gamma) {
                ++below;
                require(o, row[2] == format_real(c.omega / (c.epsilon + x)),
                        "log-branch derivative at x=" + row[0]);
                require(o, dv <= previous, "derivative not decreasing on the log branch");
                previous = dv;
            } else if (x > c.gamma) {
                ++above;
                require(o, dv == 1.0, "linear-branch derivative at x=" + row[0]);
            }
        }
        require(o, below > 0 && above > 0, "curve covers both branches");
        const double jump = c.omega / (c.epsilon + c.gamma) - 1.0;
        require(o, err.find("derivative_jump_at_gamma=" + format_real(jump)) != std::string::npos,
                "jump not reported");
        if (summary.empty()) {
            summary = "derivative jump at gamma " + format_real(jump) + " (defaults), " +
                      std::to_string(t.rows().size()) + " points";
        }
    }
    require(o, std::abs(AllParams{}.derivative_jump() - 15.6667) < 1e-4, "jump value");
    if (o.pass) {
        o.detail = summary;
    }
    return o;
}

Outcome reductions() {
    Outcome o;
    Rng rng(404);
    double worst = 0.0;
    auto track = [&](double a, double b, const char* what) {
        worst = std::max(worst, std::abs(a - b));
        require(o, std::abs(a - b) < 1e-12, what);
    };
    for (int t = 0; t < 100; ++t) {
        const auto [p, g] = random_pair(rng);
        const double dice = soft_dice_loss(p, g).value;
        const double bce = bce_loss(p, g).value;
        track(tversky_loss(p, g, {0.5, 0.5}).value, dice, "Tversky(0.5,0.5) vs Dice");
        const TverskyParams tp{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
        track(focal_tversky_loss(p, g, tp, 1.0).value, tversky_loss(p, g, tp).value,
              "FocalTversky(1) vs Tversky");
        track(focal_loss(p, g, {1.0, 0.0}).value, bce, "Focal(0,1) vs BCE");
        track(combo_loss(p, g, {0.0}).value, dice, "Combo(0) vs Dice");
        track(combo_loss(p, g, {1.0}).value, bce, "Combo(1) vs BCE");
    }
    if (o.pass) {
        o.detail = "100 inputs, max abs difference " + format_real(worst);
    }
    return o;
}

Outcome metric_oracles() {
    Outcome o;
    Rng rng(505);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const auto w = static_cast<std::size_t>(rng.between(16, 48));
        const auto h = static_cast<std::size_t>(rng.between(16, 48));
        const std::size_t n = w * h;
        std::vector<double> s(n);
        std::vector<std::uint8_t> y(n);
        const double rate = rng.uniform(0.02, 0.5);
        const double shift = rng.uniform(0.0, 0.5);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform() < rate ? 1 : 0;
            s[i] = std::min(1.0, rng.uniform() * (1.0 - shift) + (y[i] ? shift : 0.0));
        }
        y[0] = 1;
        y[1] = 0;
        // pair counting, ties one half
        double good = 0.0, pairs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!y[i]) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (!y[j]) {
                    pairs += 1.0;
                    good += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
                }
            }
        }
        const ProbMap p(w, h, s);
        const BinMask g(w, h, y);
        const double auc =
            roc_auc(std::span<const ProbMap>(&p, 1), std::span<const BinMask>(&g, 1), 256).auc;
        worst = std::max(worst, std::abs(auc - good / pairs));
        require(o, std::abs(auc - good / pairs) <= 1.0 / 256.0, "AUC gap above 1/256");
    }
    std::size_t identities = 0;
    for (std::uint64_t tp = 0; tp < 30; ++tp) {
        for (std::uint64_t fp = 0; fp < 30; ++fp) {
            for (std::uint64_t fn = 0; fn < 30; ++fn) {
                if (tp + fp + fn == 0) {
                    continue;
                }
                const ConfusionCounts c{tp, fp, rng.below(100), fn};
                const double j = jaccard_index(c);
                require(o, std::abs(dice_index(c) - 2.0 * j / (1.0 + j)) < 1e-12,
                        "DI = 2J/(1+J) identity");
                ++identities;
            }
        }
    }
    if (o.pass) {
        o.detail = "50 score sets, max AUC gap " + format_real(worst) + "; " +
                   std::to_string(identities) + " count tuples satisfy DI = 2J/(1+J)";
    }
    return o;
}

const std::vector<std::string> kExperimentFlags{
    "--width", "48", "--height", "48", "--n-images", "80", "--noise-sigma", "0.1",
    "--lr", "1e-2", "--batch-size", "16", "--epochs", "30", "--seeds", "5", "--seed", "1"};

CsvTable run_compare(const std::string& name, const std::string& fg, const std::string& losses,
                     Outcome& o, CsvTable* trace = nullptr) {
    const fs::path out = work_dir() / (name + ".csv");
    const fs::path trace_path = work_dir() / (name + "_trace.csv");
    std::vector<std::string> args{"compare", "--fg-fraction", fg, "--losses", losses, "--out",
                                  out.string(), "--trace-out", trace_path.string()};
    args.insert(args.end(), kExperimentFlags.begin(), kExperimentFlags.end());
    require(o, run_cli(args) == 0, "compare exit code");
    if (trace) {
        *trace = read_csv_file(trace_path);
    }
    return read_csv_file(out);
}

// seed -> value of `column` for the run rows of `loss`
std::map<std::string, double> per_seed(const CsvTable& t, const std::string& loss,
                                       const std::string& column) {
    std::map<std::string, double> out;
    const auto c = t.column(column);
    for (const auto& row : t.rows()) {
        if (row[0] == "run" && row[1] == loss) {
            out[row[2]] = num(row[c]);
        }
    }
    return out;
}

Outcome imbalance() {
    Outcome o;
    const CsvTable t = run_compare("imbalance", "0.02", "dice,all", o);
    const auto dl = per_seed(t, "DL", "jaccard");
    const auto all = per_seed(t, "ALL", "jaccard");
    require(o, dl.size() == 5 && all.size() == 5, "expected 5 runs per loss");
    double mean_dl = 0.0, mean_all = 0.0;
    int wins = 0;
    for (const auto& [seed, j] : dl) {
        mean_dl += j / 5.0;
        mean_all += all.at(seed) / 5.0;
        wins += all.at(seed) >= j ? 1 : 0;
    }
    require(o, mean_all >= mean_dl, "mean Jaccard ALL < DL");
    require(o, wins >= 4, "ALL wins only " + std::to_string(wins) + " of 5");
    const std::string numbers = "mean Jaccard ALL " + format_real(mean_all) + " vs DL " +
                                format_real(mean_dl) + ", ALL wins " + std::to_string(wins) +
                                "/5";
    o.detail = o.pass ? numbers : o.detail + " (" + numbers + ")";
    return o;
}

Outcome convergence() {
    Outcome o;
    CsvTable trace({"x"});
    const CsvTable t =
        run_compare("convergence", "0.05", "jaccard,dice,tversky,focal,combo,all", o, &trace);
    // every loss must have a full per-epoch validation Jaccard trace
    std::map<std::string, std::size_t> epochs;
    const auto jc = trace.column("val_jaccard");
    for (const auto& row : trace.rows()) {
        ++epochs[row[0]];
        require(o, !row[jc].empty(), "empty trace value");
    }
    for (const char* loss : {"JL", "DL", "TL", "FL", "CL", "ALL"}) {
        require(o, epochs[loss] == 5 * 30, std::string("trace rows for ") + loss);
    }
    const auto dl = per_seed(t, "DL", "epochs_to_converge");
    const auto all = per_seed(t, "ALL", "epochs_to_converge");
    int no_slower = 0;
    std::string pairs;
    for (const auto& [seed, e] : dl) {
        no_slower += all.at(seed) <= e ? 1 : 0;
        pairs += " " + format_real(all.at(seed)) + "/" + format_real(e);
    }
    require(o, no_slower >= 3, "ALL converged no slower in only " + std::to_string(no_slower) +
                                   " of 5 seeds");
    const std::string numbers = "ALL no slower than DL in " + std::to_string(no_slower) +
                                "/5 seeds (epochs ALL/DL:" + pairs + ")";
    o.detail = o.pass ? numbers : o.detail + " (" + numbers + ")";
    return o;
}

Outcome determinism() {
    Outcome o;
    const std::vector<std::string> data{"--width", "16", "--height", "16", "--n-images", "16",
                                        "--fg-fraction", "0.1", "--epochs", "2", "--lr", "1e-2",
                                        "--seed", "9"};
    const std::vector<std::vector<std::string>> commands{
        {"curve"},
        {"train"},
        {"grid", "--omegas", "6,10", "--seeds", "2", "--jobs", "2"},
        {"compare", "--losses", "dice,all,focal", "--seeds", "2", "--jobs", "2"},
        {"roc"},
        {"gradcheck", "--trials", "10"},
    };
    std::size_t compared = 0;
    for (const auto& base : commands) {
        std::string bytes[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = work_dir() / ("det_" + base[0] + std::to_string(rep) + ".csv");
            std::vector<std::string> args = base;
            if (base[0] != "curve" && base[0] != "gradcheck") {
                args.insert(args.end(), data.begin(), data.end());
            }
            args.insert(args.end(), {"--out", out.string()});
            require(o, run_cli(args) == 0, base[0] + " exit code");
            bytes[rep] = read_file(out);
        }
        require(o, !bytes[0].empty() && bytes[0] == bytes[1], base[0] + " output differs");
        ++compared;
    }
    const fs::path d0 = work_dir() / "gen0", d1 = work_dir() / "gen1";
    for (const auto& d : {d0, d1}) {
        require(o, run_cli({"gendata", "--n-images", "5", "--seed", "3", "--out", d.string()}) == 0,
                "gendata exit code");
    }
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(d0)) {
        const auto name = e.path().filename();
        require(o, fs::exists(d1 / name) && read_file(e.path()) == read_file(d1 / name),
                name.string() + " differs");
        ++files;
    }
    require(o, files == 11, "expected 10 PGM files and a manifest");
    if (o.pass) {
        o.detail = std::to_string(compared) + " subcommands and " + std::to_string(files) +
                   " gendata files byte-identical across repeat runs";
    }
    return o;
}

Outcome grid_protocol() {
    Outcome o;
    const fs::path out = work_dir() / "table1.csv";
    const int code = run_cli({"grid", "--preset", "table1", "--width", "16", "--height", "16",
                              "--n-images", "20", "--fg-fraction", "0.1", "--epochs", "3",
                              "--lr", "1e-2", "--seed", "1", "--out", out.string()});
    require(o, code == 0, "grid exit code");
    const CsvTable t = read_csv_file(out);
    std::size_t runs = 0, means = 0;
    std::map<std::pair<std::string, std::string>, std::size_t> per_cell;
    for (const auto& row : t.rows()) {
        if (row[0] == "run") {
            ++runs;
            ++per_cell[{row[2], row[3]}];
        } else if (row[0] == "mean") {
            ++means;
        }
    }
    require(o, runs == 72, "run rows: " + std::to_string(runs));
    require(o, means == 24, "mean rows: " + std::to_string(means));
    require(o, per_cell.size() == 24, "distinct (omega, epsilon) cells");
    for (const auto& [cell, n] : per_cell) {
        require(o, n == 3, "cell with " + std::to_string(n) + " runs");
    }
    if (o.pass) {
        o.detail = "6 omega x 4 epsilon x 3 seeds: " + std::to_string(runs) + " run rows + " +
                   std::to_string(means) + " mean rows";
    }
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "closed-form values", closed_form},
        {2, "gradient oracle", gradient_oracle},
        {3, "derivative shape", derivative_shape},
        {4, "reduction identities", reductions},
        {5, "metric oracles", metric_oracles},
        {6, "imbalance experiment", imbalance},
        {7, "convergence trace", convergence},
        {8, "determinism", determinism},
        {9, "grid protocol", grid_protocol},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
