#pragma once

#include <optional>
#include <string>

#include "mvtryon/nn/params.hpp"

namespace mvt::nn {

struct LinearLayer {
    Var weight;  // [out x in]
    std::optional<Var> bias;

    std::size_t in() const { return weight.shape()[1]; }
    std::size_t out() const { return weight.shape()[0]; }
};

// Looks up "<name>.weight" and, if present, "<name>.bias".
LinearLayer bind_linear(Binder& bind, const std::string& name);

// x[... x in] -> [... x out], computing x W^T + b.
Var linear(const LinearLayer& layer, Var x);

// softmax(Q K^T / sqrt(d)) V, softmax over the key axis.
Var attention(Var q, Var k, Var v);

// conv (pad k/2) followed by a per-channel bias, if the store has one.
Var conv_same(Binder& bind, const std::string& name, Var x);

// [C x H x W] <-> [(H*W) x C]
Var to_tokens(Var x);
Var from_tokens(Var tokens, std::size_t h, std::size_t w);

}  // namespace mvt::nn
