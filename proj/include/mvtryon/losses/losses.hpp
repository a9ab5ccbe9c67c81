#pragma once

#include <cstdint>
#include <vector>

#include "mvtryon/nn/params.hpp"

namespace mvt::loss {

struct LossWeights {
    double lambda_l1 = 0.1;
    double lambda_perc = 1e-4;
};

// Five (conv3x3, GELU) stages with 2x average pooling between them; the tap
// of stage k is its GELU output. Weights are seeded and never trained.
class PerceptualNet {
   public:
    static constexpr std::size_t kStages = 5;

    explicit PerceptualNet(std::uint64_t seed = 1234);

    // image: [3 x H x W] with H, W divisible by 16.
    std::vector<Var> taps(Var image) const;
    std::vector<Tensor> taps(const Tensor& image) const;

    // Spatial mean of every tap, concatenated.
    Tensor features(const Tensor& image) const;
    std::size_t feature_dim() const;

    std::uint64_t seed() const { return seed_; }
    const std::vector<Tensor>& kernels() const { return kernels_; }
    const std::vector<Tensor>& biases() const { return biases_; }

   private:
    std::uint64_t seed_;
    std::vector<Tensor> kernels_;
    std::vector<Tensor> biases_;
};

// Mean squared error.
Var ldm_loss(Var eps, Var eps_hat);
// Mean absolute error.
Var l1_loss(Var x_hat, Var x);
// Sum over taps of the mean absolute feature difference.
Var perceptual_loss(Var x_hat, Var x, const PerceptualNet& net);

Var total_loss(Var ldm, Var l1, Var perc, const LossWeights& w = {});
double total_loss(double ldm, double l1, double perc, const LossWeights& w = {});

}  // namespace mvt::loss
