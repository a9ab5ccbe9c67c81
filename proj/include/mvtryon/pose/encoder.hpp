#pragma once

#include <string>

#include "mvtryon/nn/params.hpp"

namespace mvt::pose {

struct PoseEncoderConfig {
    std::size_t width = 8;    // channels of the first block; later blocks use 2x
    std::size_t out_dim = 16;
};

// Token grid [h*w x d], row-major over the grid.
struct PoseEmbedding {
    Var tokens;
    std::size_t h = 0, w = 0;

    std::size_t count() const { return h * w; }
    std::size_t dim() const { return tokens.shape()[1]; }
};

void declare_pose_encoder(nn::LayerSpec& spec, const std::string& prefix, const PoseEncoderConfig& cfg = {});

// Three (conv3x3, GELU, 2x average pool) blocks, then layernorm over channels.
// raster: [3 x H x W] with H, W divisible by 8.
PoseEmbedding pose_encode(Var raster, nn::Binder& bind, const std::string& prefix);

// Bilinear resampling of the token grid.
PoseEmbedding resample(const PoseEmbedding& e, std::size_t h, std::size_t w);

}  // namespace mvt::pose
