#pragma once

#include <random>

#include "mvtryon/diffusion/model.hpp"
#include "mvtryon/numerics/ops.hpp"
#include "random.hpp"

namespace mvt::testing {

inline nn::ParamStore backbone_params(const diff::BackboneConfig& cfg, std::uint64_t seed) {
    nn::LayerSpec spec;
    diff::declare_backbone(spec, "unet", cfg);
    nn::ParamStore p = nn::init_params(spec, seed);
    // Non-zero fusion vectors and biases so every path carries gradient.
    std::mt19937_64 rng(seed ^ 0x5eed);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (auto& [name, t] : p)
        if (name.ends_with(".fusion") || name.ends_with(".bias"))
            for (auto& v : t.storage()) v = u(rng);
    return p;
}

// Random conditions for a backbone run on an h x w latent.
struct BackboneInputs {
    Tensor input, global, local0, local1;

    BackboneInputs(const diff::BackboneConfig& cfg, std::size_t h, std::size_t w, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        input = random_tensor({cfg.in_channels, h, w}, rng);
        global = random_tensor({1, cfg.global_dim}, rng);
        local0 = random_tensor({5, cfg.local_dim}, rng);
        local1 = random_tensor({7, cfg.local_dim}, rng);
    }

    diff::BackboneConditions bind(Tape& t) const {
        return {t.constant(global), {t.constant(local0), t.constant(local1)}};
    }
};

}  // namespace mvt::testing
