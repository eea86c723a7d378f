#include "adaloss/segmodel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace adaloss {
namespace {

constexpr std::ptrdiff_t kRadius = 1;

// Valid output range along one axis for kernel offset d in {-1, 0, 1}:
// positions y where y + d stays inside [0, n).
struct Range {
    std::size_t lo, hi;
};

Range valid_range(std::size_t n, std::ptrdiff_t d) {
    const std::size_t lo = d < 0 ? static_cast<std::size_t>(-d) : 0;
    const std::size_t hi = d > 0 ? n - static_cast<std::size_t>(d) : n;
    return {lo, hi};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

TinyNet::TinyNet() = default;

TinyNet TinyNet::he_uniform(Rng& rng) {
    TinyNet net;
    const double limit1 = std::sqrt(6.0 / static_cast<double>(kTaps));
    const double limit2 = std::sqrt(6.0 / static_cast<double>(kHidden * kTaps));
    for (std::size_t i = 0; i < kHidden * kTaps; ++i) {
        net.params_[kConv1Weights + i] = rng.uniform(-limit1, limit1);
    }
    for (std::size_t i = 0; i < kHidden * kTaps; ++i) {
        net.params_[kConv2Weights + i] = rng.uniform(-limit2, limit2);
    }
    return net;
}

Activations forward_with_cache(const TinyNet& net, const Image& image) {
    const std::size_t w = image.width();
    const std::size_t h = image.height();
    const std::size_t n = w * h;
    const auto params = net.parameters();
    const auto img = image.values();

    Activations acts;
    acts.width = w;
    acts.height = h;
    acts.hidden_pre.assign(TinyNet::kHidden * n, 0.0);
    acts.hidden.assign(TinyNet::kHidden * n, 0.0);
    std::vector<double> logits(n, params[TinyNet::kConv2Bias]);

    for (std::size_t c = 0; c < TinyNet::kHidden; ++c) {
        double* pre = acts.hidden_pre.data() + c * n;
        const double bias = params[TinyNet::kConv1Bias + c];
        for (std::size_t i = 0; i < n; ++i) {
            pre[i] = bias;
        }
        for (std::ptrdiff_t dy = -kRadius; dy <= kRadius; ++dy) {
            const Range ry = valid_range(h, dy);
            for (std::ptrdiff_t dx = -kRadius; dx <= kRadius; ++dx) {
                const Range rx = valid_range(w, dx);
                const double wt =
                    params[TinyNet::kConv1Weights + c * TinyNet::kTaps +
                           static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))];
                for (std::size_t y = ry.lo; y < ry.hi; ++y) {
                    const double* src = img.data() + (y + dy) * w;
                    double* dst = pre + y * w;
                    for (std::size_t x = rx.lo; x < rx.hi; ++x) {
                        dst[x] += wt * src[x + dx];
                    }
                }
            }
        }
        double* act = acts.hidden.data() + c * n;
        for (std::size_t i = 0; i < n; ++i) {
            act[i] = pre[i] > 0.0 ? pre[i] : 0.0;
        }

        for (std::ptrdiff_t dy = -kRadius; dy <= kRadius; ++dy) {
            const Range ry = valid_range(h, dy);
            for (std::ptrdiff_t dx = -kRadius; dx <= kRadius; ++dx) {
                const Range rx = valid_range(w, dx);
                const double wt =
                    params[TinyNet::kConv2Weights + c * TinyNet::kTaps +
                           static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))];
                for (std::size_t y = ry.lo; y < ry.hi; ++y) {
                    const double* src = act + (y + dy) * w;
                    double* dst = logits.data() + y * w;
                    for (std::size_t x = rx.lo; x < rx.hi; ++x) {
                        dst[x] += wt * src[x + dx];
                    }
                }
            }
        }
    }

    acts.probs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        acts.probs[i] = sigmoid(logits[i]);
    }
    return acts;
}

ProbMap forward(const TinyNet& net, const Image& image) {
    return forward_with_cache(net, image).output();
}

std::vector<double> backward(const TinyNet& net, const Image& image, const Activations& acts,
                             std::span<const double> upstream_grad) {
    const std::size_t w = image.width();
    const std::size_t h = image.height();
    const std::size_t n = w * h;
    if (acts.width != w || acts.height != h || acts.probs.size() != n ||
        acts.hidden.size() != TinyNet::kHidden * n) {
        throw ContractViolation("backward: activations do not match the image shape");
    }
    if (upstream_grad.size() != n) {
        throw ContractViolation("backward: upstream gradient has " +
                                std::to_string(upstream_grad.size()) + " entries for " +
                                std::to_string(n) + " pixels");
    }
    const auto params = net.parameters();
    const auto img = image.values();
    std::vector<double> grad(TinyNet::kParameterCount, 0.0);

    // Through the sigmoid: dz = dp * p (1 - p).
    std::vector<double> dlogit(n);
    double bias2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = acts.probs[i];
        dlogit[i] = upstream_grad[i] * p * (1.0 - p);
        bias2 += dlogit[i];
    }
    grad[TinyNet::kConv2Bias] = bias2;

    std::vector<double> dhidden(n);
    for (std::size_t c = 0; c < TinyNet::kHidden; ++c) {
        const double* act = acts.hidden.data() + c * n;
        const double* pre = acts.hidden_pre.data() + c * n;
        std::fill(dhidden.begin(), dhidden.end(), 0.0);

        for (std::ptrdiff_t dy = -kRadius; dy <= kRadius; ++dy) {
            const Range ry = valid_range(h, dy);
            for (std::ptrdiff_t dx = -kRadius; dx <= kRadius; ++dx) {
                const Range rx = valid_range(w, dx);
                const std::size_t tap =
                    c * TinyNet::kTaps + static_cast<std::size_t>((dy + 1) * 3 + (dx + 1));
                const double wt = params[TinyNet::kConv2Weights + tap];
                double acc = 0.0;
                for (std::size_t y = ry.lo; y < ry.hi; ++y) {
                    const double* src = act + (y + dy) * w;
                    const double* dz = dlogit.data() + y * w;
                    double* dsrc = dhidden.data() + (y + dy) * w;
                    for (std::size_t x = rx.lo; x < rx.hi; ++x) {
                        acc += dz[x] * src[x + dx];
                        dsrc[x + dx] += dz[x] * wt;
                    }
                }
                grad[TinyNet::kConv2Weights + tap] = acc;
            }
        }

        double bias1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dhidden[i] = pre[i] > 0.0 ? dhidden[i] : 0.0;
            bias1 += dhidden[i];
        }
        grad[TinyNet::kConv1Bias + c] = bias1;

        for (std::ptrdiff_t dy = -kRadius; dy <= kRadius; ++dy) {
            const Range ry = valid_range(h, dy);
            for (std::ptrdiff_t dx = -kRadius; dx <= kRadius; ++dx) {
                const Range rx = valid_range(w, dx);
                const std::size_t tap =
                    c * TinyNet::kTaps + static_cast<std::size_t>((dy + 1) * 3 + (dx + 1));
                double acc = 0.0;
                for (std::size_t y = ry.lo; y < ry.hi; ++y) {
                    const double* src = img.data() + (y + dy) * w;
                    const double* dpre = dhidden.data() + y * w;
                    for (std::size_t x = rx.lo; x < rx.hi; ++x) {
                        acc += dpre[x] * src[x + dx];
                    }
                }
                grad[TinyNet::kConv1Weights + tap] = acc;
            }
        }
    }
    return grad;
}

std::vector<double> backward(const TinyNet& net, const Image& image,
                             std::span<const double> upstream_grad) {
    return backward(net, image, forward_with_cache(net, image), upstream_grad);
}

void save_checkpoint(const std::filesystem::path& path, const TinyNet& net) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write checkpoint " + path.string());
    }
    out << "tinynet 1\n";
    char buf[40];
    for (double v : net.parameters()) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
    if (!out) {
        throw DataError("short write to checkpoint " + path.string());
    }
}

TinyNet load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open checkpoint " + path.string());
    }
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "tinynet" || version != 1) {
        throw DataError(path.string() + ": not a tinynet v1 checkpoint");
    }
    TinyNet net;
    for (double& v : net.parameters()) {
        std::string token;
        if (!(in >> token)) {
            throw DataError(path.string() + ": checkpoint truncated");
        }
        try {
            v = std::stod(token);
        } catch (const std::exception&) {
            throw DataError(path.string() + ": bad value '" + token + "'");
        }
        if (!std::isfinite(v)) {
            throw DataError(path.string() + ": non-finite weight");
        }
    }
    return net;
}

} // namespace adaloss
