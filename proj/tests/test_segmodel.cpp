#include <cmath>
#include <filesystem>
#include <vector>

#include "adaloss/adam.hpp"
#include "adaloss/errors.hpp"
#include "adaloss/gradcheck.hpp"
#include "adaloss/loss_spec.hpp"
#include "adaloss/rng.hpp"
#include "adaloss/segmodel.hpp"
#include "adaloss/synthdata.hpp"
#include "adaloss/trainer.hpp"
#include "doctest.h"

using namespace adaloss;

namespace {

Image test_image() {
    SynthSpec s;
    s.width = 16;
    s.height = 16;
    s.fg_fraction = 0.1;
    return generate_sample(s, 0).image;
}

std::vector<Sample> easy_samples(std::size_t n, double fg, double sigma, std::size_t size = 48) {
    SynthSpec s;
    s.width = size;
    s.height = size;
    s.fg_fraction = fg;
    s.noise_sigma = sigma;
    s.n_images = n;
    return generate(s);
}

} // namespace

TEST_CASE("zero network predicts one half everywhere") {
    const TinyNet net;
    const Image img = test_image();
    const ProbMap p = forward(net, img);
    CHECK(p.width() == img.width());
    CHECK(p.height() == img.height());
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i] == 0.5);
    }
    CHECK(net.parameters().size() == 153);
}

TEST_CASE("forward pass is bit-stable") {
    Rng r(123);
    const TinyNet net = TinyNet::he_uniform(r);
    const ProbMap a = forward(net, test_image());
    const ProbMap b = forward(net, test_image());
    CHECK(a == b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] > 0.0);
        CHECK(a[i] < 1.0);
        sum += a[i];
    }
    // golden values from the first verified build
    CHECK(std::abs(a[0] - 0x1.1207b08c865d2p-1) < 1e-12);
    CHECK(std::abs(a[37] - 0x1.051c70f6d747ap-1) < 1e-12);
    CHECK(std::abs(sum - 0x1.ecd3bb619288bp+6) < 1e-10);
}

TEST_CASE("he-uniform initialisation respects the fan-in limits") {
    Rng r(9);
    TinyNet net = TinyNet::he_uniform(r);
    for (std::size_t i = 0; i < 72; ++i) {
        CHECK(std::abs(net.parameters()[TinyNet::kConv1Weights + i]) <= std::sqrt(6.0 / 9.0));
    }
    for (std::size_t i = 0; i < 72; ++i) {
        CHECK(std::abs(net.parameters()[TinyNet::kConv2Weights + i]) <= std::sqrt(6.0 / 72.0));
    }
    CHECK(net.conv2_bias() == 0.0);
}

TEST_CASE("backward is linear in the upstream gradient") {
    Rng r(4);
    const TinyNet net = TinyNet::he_uniform(r);
    const Image img = test_image();
    const std::vector<double> zero(img.size(), 0.0);
    for (double v : backward(net, img, zero)) {
        CHECK(v == 0.0);
    }
    std::vector<double> u1(img.size()), u2(img.size()), sum(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        u1[i] = r.uniform(-1, 1);
        u2[i] = r.uniform(-1, 1);
        sum[i] = 2.0 * u1[i] + u2[i];
    }
    const auto g1 = backward(net, img, u1);
    const auto g2 = backward(net, img, u2);
    const auto gs = backward(net, img, sum);
    for (std::size_t k = 0; k < gs.size(); ++k) {
        CHECK(gs[k] == doctest::Approx(2.0 * g1[k] + g2[k]).epsilon(1e-9));
    }
    CHECK_THROWS_AS(backward(net, img, std::vector<double>(3, 0.0)), ContractViolation);
}

TEST_CASE("network gradient matches finite differences") {
    Rng r(77);
    const TinyNet net = TinyNet::he_uniform(r);
    SynthSpec s;
    s.width = 16;
    s.height = 16;
    s.fg_fraction = 0.1;
    const Sample sample = generate_sample(s, 1);
    const LossSpec spec;

    const auto acts = forward_with_cache(net, sample.image);
    const auto le = evaluate(spec, acts.output(), sample.mask);
    const auto grad = backward(net, sample.image, acts, le.grad);

    auto f = [&](std::span<const double> w) {
        TinyNet probe;
        std::copy(w.begin(), w.end(), probe.parameters().begin());
        return evaluate(spec, forward(probe, sample.image), sample.mask).value;
    };
    std::vector<double> w(net.parameters().begin(), net.parameters().end());
    for (std::size_t k : {0UL, 5UL, 72UL, 79UL, 80UL, 120UL, 152UL}) {
        const double num = finite_difference_partial(f, w, k, 1e-5);
        CHECK(relative_error(grad[k], num, 1e-3 * le.value) < 1e-4);
    }
}

TEST_CASE("checkpoint round trip") {
    Rng r(8);
    const TinyNet net = TinyNet::he_uniform(r);
    const auto path = std::filesystem::temp_directory_path() / "adaloss_test_net.txt";
    save_checkpoint(path, net);
    const TinyNet back = load_checkpoint(path);
    for (std::size_t i = 0; i < TinyNet::kParameterCount; ++i) {
        CHECK(back.parameters()[i] == net.parameters()[i]);
    }
}

TEST_CASE("adam first step and constant-gradient limit") {
    AdamConfig cfg;
    {
        AdamState st(3, cfg);
        std::vector<double> w{0.0, 0.0, 0.0};
        const std::vector<double> zero{0.0, 0.0, 0.0};
        st.step(w, zero);
        CHECK(w == std::vector<double>{0.0, 0.0, 0.0});
    }
    {
        AdamState st(3, cfg);
        std::vector<double> w{1.0, 1.0, 1.0};
        const std::vector<double> g{0.5, -2.0, 1e-3};
        st.step(w, g);
        CHECK(st.step_count() == 1);
        CHECK(w[0] - 1.0 == doctest::Approx(-cfg.lr).epsilon(1e-6));
        CHECK(w[1] - 1.0 == doctest::Approx(cfg.lr).epsilon(1e-6));
        CHECK(w[2] - 1.0 == doctest::Approx(-cfg.lr).epsilon(1e-4));
    }
    {
        AdamState st(1, cfg);
        std::vector<double> w{0.0};
        const std::vector<double> g{0.3};
        double last = 0.0;
        for (int t = 0; t < 10000; ++t) {
            last = w[0];
            st.step(w, g);
        }
        CHECK(std::abs(std::abs(w[0] - last) - cfg.lr) < 1e-3 * cfg.lr);
    }
    AdamConfig bad;
    bad.beta1 = 1.0;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("optimizer step count follows the batch arithmetic") {
    auto samples = easy_samples(40, 0.2, 0.1, 16);
    std::vector<Sample> train_set(samples.begin(), samples.begin() + 32);
    std::vector<Sample> val_set(samples.begin() + 32, samples.end());
    TrainConfig cfg;
    cfg.max_epochs = 1;
    const auto res = train(cfg, train_set, val_set);
    CHECK(res.record.optimizer_steps == 2);
    CHECK(res.record.rows.size() == 1);

    cfg.max_epochs = 3;
    cfg.batch_size = 5; // 7 batches per epoch, the last one short
    CHECK(train(cfg, train_set, val_set).record.optimizer_steps == 21);
}

TEST_CASE("training is deterministic for a seed") {
    auto samples = easy_samples(24, 0.2, 0.1, 16);
    const auto [tr, va] = train_val_split(samples, 0.75, 1);
    TrainConfig cfg;
    cfg.max_epochs = 4;
    cfg.adam.lr = 1e-2;
    cfg.batch_size = 4;
    const auto a = train(cfg, tr, va);
    const auto b = train(cfg, tr, va);
    REQUIRE(a.record.rows.size() == b.record.rows.size());
    for (std::size_t i = 0; i < a.record.rows.size(); ++i) {
        CHECK(a.record.rows[i].train_loss == b.record.rows[i].train_loss);
        CHECK(a.record.rows[i].val_jaccard == b.record.rows[i].val_jaccard);
    }
    for (std::size_t i = 0; i < TinyNet::kParameterCount; ++i) {
        CHECK(a.net.parameters()[i] == b.net.parameters()[i]);
    }
    cfg.seed = 2;
    CHECK(train(cfg, tr, va).record.rows.back().train_loss != a.record.rows.back().train_loss);
}

TEST_CASE("dice training learns easy blobs") {
    const auto samples = easy_samples(64, 0.3, 0.05);
    const auto [tr, va] = train_val_split(samples, 0.8, 1);
    TrainConfig cfg;
    cfg.max_epochs = 30;
    cfg.adam.lr = 1e-2;
    const auto res = train(cfg, tr, va);
    CHECK(res.record.rows.size() == 30);
    CHECK(res.record.final_row().val_jaccard > 0.8);
    CHECK(res.record.final_auc > 0.9);
}

TEST_CASE("wrapped dice loss settles after the first epochs") {
    const auto samples = easy_samples(48, 0.1, 0.1, 32);
    const auto [tr, va] = train_val_split(samples, 0.75, 1);
    for (std::uint64_t seed : {1, 2, 3}) {
        TrainConfig cfg;
        cfg.max_epochs = 20;
        cfg.adam.lr = 1e-2;
        cfg.loss.all_wrap = true;
        cfg.seed = seed;
        const auto rows = train(cfg, tr, va).record.rows;
        // mean training loss over the last five epochs below that of epochs 5..9
        double early = 0.0, late = 0.0;
        for (std::size_t e = 4; e < 9; ++e) {
            early += rows[e].train_loss;
        }
        for (std::size_t e = 15; e < 20; ++e) {
            late += rows[e].train_loss;
        }
        CHECK(late <= early);
    }
}

TEST_CASE("run csv schema") {
    RunRecord rec;
    rec.rows.push_back({1, 0.5, 0.25, 0.4, 0.6, 0.9, 0.4, 0.3});
    std::ostringstream out;
    write_run_csv(out, rec);
    CHECK(out.str() ==
          "epoch,train_loss,val_jaccard,val_dice,val_recall,val_specificity,val_f1\n"
          "1,0.5,0.25,0.4,0.6,0.9,0.4\n");
}
