#include <doctest.h>

#include <cmath>
#include <random>

#include "mvtryon/diffusion/schedule.hpp"
#include "mvtryon/diffusion/unet.hpp"
#include "mvtryon/errors.hpp"
#include "mvtryon/losses/losses.hpp"
#include "mvtryon/numerics/ops.hpp"
#include "support/gradcheck.hpp"
#include "support/model_fixtures.hpp"
#include "support/oracle.hpp"
#include "support/random.hpp"

using namespace mvt;
using namespace mvt::loss;
using testing::random_tensor;

namespace {

double eval(const std::function<Var(Tape&)>& f) {
    Tape t;
    return f(t).value().item();
}

}  // namespace

TEST_CASE("ldm_loss") {
    std::mt19937_64 rng(1);
    Tensor a = random_tensor({3, 4, 5}, rng), b = random_tensor({3, 4, 5}, rng);
    CHECK(eval([&](Tape& t) { return ldm_loss(t.constant(a), t.constant(a)); }) == 0.0);
    CHECK(eval([&](Tape& t) { return ldm_loss(t.constant(Tensor({2, 3})), t.constant(Tensor({2, 3}, 1.0))); }) == 1.0);
    double mse = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
    mse /= static_cast<double>(a.numel());
    CHECK(std::abs(eval([&](Tape& t) { return ldm_loss(t.constant(a), t.constant(b)); }) - mse) <= 1e-12);
    Tape t;
    CHECK_THROWS_AS(ldm_loss(t.constant(a), t.constant(Tensor({3, 4}))), DimensionError);
}

TEST_CASE("l1_loss") {
    std::mt19937_64 rng(2);
    Tensor a = random_tensor({3, 4, 5}, rng), b = random_tensor({3, 4, 5}, rng);
    CHECK(eval([&](Tape& t) { return l1_loss(t.constant(a), t.constant(a)); }) == 0.0);
    Tensor shifted = a;
    for (auto& v : shifted.storage()) v -= 0.375;
    CHECK(eval([&](Tape& t) { return l1_loss(t.constant(a), t.constant(shifted)); }) == doctest::Approx(0.375).epsilon(1e-14));
    double mae = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) mae += std::abs(a[i] - b[i]);
    mae /= static_cast<double>(a.numel());
    CHECK(std::abs(eval([&](Tape& t) { return l1_loss(t.constant(a), t.constant(b)); }) - mae) <= 1e-12);
    Tape t;
    CHECK_THROWS_AS(l1_loss(t.constant(a), t.constant(Tensor({60}))), DimensionError);
}

TEST_CASE("perceptual_loss") {
    PerceptualNet net(77);
    std::mt19937_64 rng(3);
    Tensor x = random_tensor({3, 32, 16}, rng), y = random_tensor({3, 32, 16}, rng);
    SUBCASE("identical inputs and symmetry") {
        CHECK(eval([&](Tape& t) { return perceptual_loss(t.constant(x), t.constant(x), net); }) == 0.0);
        const double xy = eval([&](Tape& t) { return perceptual_loss(t.constant(x), t.constant(y), net); });
        const double yx = eval([&](Tape& t) { return perceptual_loss(t.constant(y), t.constant(x), net); });
        CHECK(xy > 0.0);
        CHECK(xy == yx);
    }
    SUBCASE("matches composed oracle") {
        auto oracle_taps = [&](const Tensor& img) {
            std::vector<Tensor> taps;
            Tensor h = img;
            for (std::size_t k = 0; k < PerceptualNet::kStages; ++k) {
                if (k > 0) h = oracle::avg_pool2(h);
                h = oracle::gelu(oracle::add_channel(oracle::conv2d(h, net.kernels()[k], 1, 1), net.biases()[k]));
                taps.push_back(h);
            }
            return taps;
        };
        auto a = oracle_taps(x), b = oracle_taps(y);
        double want = 0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            double s = 0;
            for (std::size_t i = 0; i < a[k].numel(); ++i) s += std::abs(a[k][i] - b[k][i]);
            want += s / static_cast<double>(a[k].numel());
        }
        CHECK(std::abs(eval([&](Tape& t) { return perceptual_loss(t.constant(x), t.constant(y), net); }) - want) <= 1e-10);
        CHECK(a.back().shape() == Shape{16, 2, 1});
    }
    SUBCASE("weights stay frozen and gradient reaches the input") {
        PerceptualNet before = net;
        Tensor xp = x;
        xp.set_requires_grad(true);
        Tape t;
        t.backward(perceptual_loss(t.leaf(xp), t.constant(y), net));
        CHECK(xp.has_grad());
        for (std::size_t k = 0; k < PerceptualNet::kStages; ++k) {
            CHECK_FALSE(net.kernels()[k].has_grad());
            CHECK(net.kernels()[k] == before.kernels()[k]);
        }
    }
    SUBCASE("same seed, same net") {
        CHECK(PerceptualNet(5).kernels()[3] == PerceptualNet(5).kernels()[3]);
        CHECK_FALSE(PerceptualNet(5).kernels()[3] == PerceptualNet(6).kernels()[3]);
        CHECK(net.features(x).shape() == Shape{net.feature_dim()});
    }
    SUBCASE("too small for five stages") {
        Tape t;
        Tensor small({3, 8, 16});
        CHECK_THROWS_AS(perceptual_loss(t.constant(small), t.constant(small), net), ContractError);
    }
}

TEST_CASE("losses are nonnegative and vanish only at equality") {
    PerceptualNet net(1);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 5; ++i) {
        Tensor a = random_tensor({3, 16, 16}, rng), b = a;
        b[static_cast<std::size_t>(i * 37)] += 1e-3;
        Tape t;
        CHECK(ldm_loss(t.constant(a), t.constant(b)).value().item() > 0.0);
        CHECK(l1_loss(t.constant(a), t.constant(b)).value().item() > 0.0);
        CHECK(perceptual_loss(t.constant(a), t.constant(b), net).value().item() >= 0.0);
    }
}

TEST_CASE("total_loss") {
    LossWeights w;
    CHECK(w.lambda_l1 == 0.1);
    CHECK(w.lambda_perc == 1e-4);
    CHECK(total_loss(1.0, 2.0, 3.0) == doctest::Approx(1.2003).epsilon(1e-15));
    CHECK(total_loss(1.5, 2.0, 3.0, {0.0, 0.0}) == 1.5);
    Tape t;
    Var v = total_loss(t.constant(Tensor::scalar(1.0)), t.constant(Tensor::scalar(2.0)), t.constant(Tensor::scalar(3.0)));
    CHECK(v.value().item() == doctest::Approx(1.2003).epsilon(1e-15));
}

TEST_CASE("total loss gradient through reconstruction and the backbone") {
    diff::BackboneConfig cfg;
    cfg.width = 4;
    cfg.global_dim = 6;
    cfg.local_dim = 8;
    nn::ParamStore p = testing::backbone_params(cfg, 9);
    testing::BackboneInputs in(cfg, 16, 16, 10);
    diff::NoiseSchedule sched = diff::make_schedule(200, 1e-4, 0.02);
    PerceptualNet net(2);
    std::mt19937_64 rng(11);
    Tensor x0 = random_tensor({3, 16, 16}, rng), eps = random_tensor({3, 16, 16}, rng);
    const std::size_t step = 60;
    Tensor zt = diff::forward_diffuse(x0, step, eps, sched);
    // Noisy latent goes in the first three input channels.
    for (std::size_t i = 0; i < zt.numel(); ++i) in.input[i] = zt[i];

    std::vector<Tensor*> params;
    for (auto& [_, t] : p) params.push_back(&t);
    testing::GradCheckOptions opt;
    opt.fraction = 0.05;
    // Central differences on an O(1) loss carry ~1e-11 roundoff.
    opt.floor = 1e-6;
    // Large weights on the auxiliary terms so they are visible in the check.
    LossWeights w{0.5, 0.5};
    auto r = testing::grad_check(
        params,
        [&](Tape& t) {
            nn::Binder b(t, p);
            Var eps_hat = diff::predict_noise(t.constant(in.input), step, in.bind(t), b, "unet", cfg);
            Var x_hat = diff::reconstruct_x0(t.constant(zt), eps_hat, step, sched);
            Var xv = t.constant(x0);
            return total_loss(ldm_loss(t.constant(eps), eps_hat), l1_loss(x_hat, xv), perceptual_loss(x_hat, xv, net), w);
        },
        opt);
    INFO(r.worst);
    CHECK(r.max_rel_err <= 1e-4);
}
