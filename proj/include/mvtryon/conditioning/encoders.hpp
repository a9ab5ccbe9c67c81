#pragma once

#include <string>
#include <vector>

#include "mvtryon/nn/params.hpp"

namespace mvt::cond {

struct GlobalEncoderConfig {
    std::size_t width = 8;
    std::size_t out_dim = 32;
};

struct LocalEncoderConfig {
    std::size_t stem = 8;
    std::size_t dim = 16;
    std::size_t levels = 2;
};

// One token grid of the local pyramid.
struct LocalLevel {
    Var tokens;  // [h*w x d]
    std::size_t h = 0, w = 0;
};

// Levels ordered coarse to fine; each finer level has 4x the tokens.
struct LocalFeaturePyramid {
    std::vector<LocalLevel> levels;
};

void declare_global_encoder(nn::LayerSpec& spec, const std::string& prefix, const GlobalEncoderConfig& cfg = {});
void declare_local_encoder(nn::LayerSpec& spec, const std::string& prefix, const LocalEncoderConfig& cfg = {});

// Four (conv, GELU, pool) stages, global average pool, linear. Returns [1 x d_g].
// H and W must be divisible by 16.
Var global_encode(Var image, nn::Binder& bind, const std::string& prefix);

// Stem (conv, GELU, pool) then one (conv, GELU, pool) stage per level; the
// finest level sits at 1/4 resolution. H and W must be divisible by 2^(levels+1).
LocalFeaturePyramid local_encode(Var image, nn::Binder& bind, const std::string& prefix, std::size_t levels);

}  // namespace mvt::cond
