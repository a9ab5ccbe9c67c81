#pragma once

#include <string>
#include <vector>

#include "mvtryon/nn/params.hpp"

namespace mvt::diff {

struct BackboneConfig {
    std::size_t width = 16;         // channels at full resolution; 2x at the two lower levels
    std::size_t in_channels = 7;    // noisy latent, agnostic latent, mask
    std::size_t out_channels = 3;
    std::size_t global_dim = 32;    // width of global condition tokens
    std::size_t local_dim = 32;     // width of local condition tokens at both decoder scales
};

void declare_backbone(nn::LayerSpec& spec, const std::string& prefix, const BackboneConfig& cfg);

// [dim] sin/cos features of the step index; half sines, half cosines.
Tensor timestep_embedding(std::size_t t, std::size_t dim);

// Conditions for the two attention scales of the decoder, coarse first.
struct BackboneConditions {
    Var global;               // [k x global_dim]
    std::vector<Var> local;   // 2 entries, each [m_i x local_dim]
};

// U-Net over [in_channels x H x W] with H, W divisible by 4:
//   full res conv -> pool -> conv at 1/2 -> pool -> conv at 1/4
//   joint attention at 1/4 -> up, skip, conv -> joint attention at 1/2 -> up, skip, conv -> out conv
// Every conv block adds a projection of the step embedding per channel.
Var predict_noise(Var input, std::size_t t, const BackboneConditions& cond, nn::Binder& bind,
                  const std::string& prefix, const BackboneConfig& cfg);

}  // namespace mvt::diff
