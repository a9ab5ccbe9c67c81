#include "mvtryon/losses/losses.hpp"

#include <cmath>
#include <random>

#include "mvtryon/errors.hpp"
#include "mvtryon/numerics/ops.hpp"

namespace mvt::loss {
namespace {

constexpr std::size_t kWidths[PerceptualNet::kStages] = {8, 16, 16, 16, 16};

void check_image(const Shape& s) {
    if (s.size() != 3 || s[0] != 3 || s[1] < 16 || s[2] < 16 || s[1] % 16 != 0 || s[2] % 16 != 0)
        throw ContractError("perceptual features need [3 x H x W] with H, W multiples of 16, got " + shape_str(s));
}

void check_same(Var a, Var b, const char* what) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(what) + ": shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                             " differ");
}

}  // namespace

PerceptualNet::PerceptualNet(std::uint64_t seed) : seed_(seed) {
    std::mt19937_64 rng(seed);
    std::size_t cin = 3;
    for (std::size_t cout : kWidths) {
        // Variance-preserving scale so deep taps keep a useful dynamic range.
        const double bound = std::sqrt(6.0 / static_cast<double>(cin * 9));
        std::uniform_real_distribution<double> u(-bound, bound);
        Tensor k({cout, cin, 3, 3});
        for (auto& v : k.storage()) v = u(rng);
        Tensor b({cout});
        for (auto& v : b.storage()) v = 0.1 * u(rng);
        kernels_.push_back(std::move(k));
        biases_.push_back(std::move(b));
        cin = cout;
    }
}

std::vector<Var> PerceptualNet::taps(Var image) const {
    check_image(image.shape());
    Tape& tape = *image.tape();
    std::vector<Var> out;
    Var x = image;
    for (std::size_t i = 0; i < kStages; ++i) {
        if (i > 0) x = avg_pool2(x);
        x = gelu(add_channel(conv2d(x, tape.constant(kernels_[i]), 1, 1), tape.constant(biases_[i])));
        out.push_back(x);
    }
    return out;
}

std::vector<Tensor> PerceptualNet::taps(const Tensor& image) const {
    Tape tape;
    std::vector<Tensor> out;
    for (Var v : taps(tape.constant(image))) out.push_back(v.value());
    return out;
}

Tensor PerceptualNet::features(const Tensor& image) const {
    std::vector<double> f;
    for (const Tensor& t : taps(image)) {
        const std::size_t hw = t.numel() / t.dim(0);
        for (std::size_t c = 0; c < t.dim(0); ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < hw; ++i) s += t[c * hw + i];
            f.push_back(s / static_cast<double>(hw));
        }
    }
    const std::size_t n = f.size();
    return Tensor({n}, std::move(f));
}

std::size_t PerceptualNet::feature_dim() const {
    std::size_t n = 0;
    for (std::size_t w : kWidths) n += w;
    return n;
}

Var ldm_loss(Var eps, Var eps_hat) {
    check_same(eps, eps_hat, "ldm_loss");
    return mean(square(sub(eps, eps_hat)));
}

Var l1_loss(Var x_hat, Var x) {
    check_same(x_hat, x, "l1_loss");
    return mean(abs(sub(x_hat, x)));
}

Var perceptual_loss(Var x_hat, Var x, const PerceptualNet& net) {
    check_same(x_hat, x, "perceptual_loss");
    std::vector<Var> a = net.taps(x_hat), b = net.taps(x);
    Var total = mean(abs(sub(a[0], b[0])));
    for (std::size_t k = 1; k < a.size(); ++k) total = add(total, mean(abs(sub(a[k], b[k]))));
    return total;
}

Var total_loss(Var ldm, Var l1, Var perc, const LossWeights& w) {
    return add(ldm, add(scale(l1, w.lambda_l1), scale(perc, w.lambda_perc)));
}

double total_loss(double ldm, double l1, double perc, const LossWeights& w) {
    return ldm + w.lambda_l1 * l1 + w.lambda_perc * perc;
}

}  // namespace mvt::loss
