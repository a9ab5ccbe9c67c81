#include "mvtryon/diffusion/unet.hpp"

#include <cmath>

#include "mvtryon/conditioning/joint_attention.hpp"
#include "mvtryon/errors.hpp"
#include "mvtryon/nn/layers.hpp"
#include "mvtryon/numerics/ops.hpp"

namespace mvt::diff {
namespace {

// conv(3x3) + step projection, then GELU
Var conv_block(nn::Binder& bind, const std::string& name, Var x, Var temb) {
    Var y = nn::conv_same(bind, name, x);
    Var shift = nn::linear(nn::bind_linear(bind, name + ".time"), temb);
    return gelu(add_channel(y, reshape(shift, {shift.numel()})));
}

Var attend(nn::Binder& bind, const std::string& name, Var x, Var global, Var local) {
    const std::size_t h = x.shape()[1], w = x.shape()[2];
    Var tokens = cond::joint_attention(nn::to_tokens(x), global, local, cond::bind_joint_attention(bind, name));
    return nn::from_tokens(tokens, h, w);
}

}  // namespace

void declare_backbone(nn::LayerSpec& spec, const std::string& prefix, const BackboneConfig& cfg) {
    const std::size_t w = cfg.width;
    spec.linear(prefix + ".time", w, w);
    auto block = [&](const std::string& name, std::size_t cin, std::size_t cout) {
        spec.conv(prefix + "." + name, cin, cout, 3);
        spec.linear(prefix + "." + name + ".time", w, cout);
    };
    block("enc0", cfg.in_channels, w);
    block("enc1", w, 2 * w);
    block("mid", 2 * w, 2 * w);
    cond::declare_joint_attention(spec, prefix + ".attn0", 2 * w, cfg.global_dim, cfg.local_dim);
    block("dec1", 4 * w, 2 * w);
    cond::declare_joint_attention(spec, prefix + ".attn1", 2 * w, cfg.global_dim, cfg.local_dim);
    block("dec2", 3 * w, w);
    spec.conv(prefix + ".out", w, cfg.out_channels, 3);
}

Tensor timestep_embedding(std::size_t t, std::size_t dim) {
    if (dim < 2 || dim % 2 != 0) throw ContractError("timestep embedding width must be even and at least 2");
    const std::size_t half = dim / 2;
    Tensor out({1, dim});
    for (std::size_t i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
        out[i] = std::sin(static_cast<double>(t) * freq);
        out[half + i] = std::cos(static_cast<double>(t) * freq);
    }
    return out;
}

Var predict_noise(Var input, std::size_t t, const BackboneConditions& cond, nn::Binder& bind,
                  const std::string& prefix, const BackboneConfig& cfg) {
    const Shape& s = input.shape();
    if (s.size() != 3 || s[0] != cfg.in_channels || s[1] % 4 != 0 || s[2] % 4 != 0 || s[1] == 0 || s[2] == 0)
        throw ContractError("backbone input " + shape_str(s) + " needs " + std::to_string(cfg.in_channels) +
                            " channels and H, W divisible by 4");
    if (cond.local.size() != 2) throw ContractError("backbone needs local conditions for 2 decoder scales");
    if (cond.global.shape().size() != 2 || cond.global.shape()[1] != cfg.global_dim)
        throw ContractError("global condition " + shape_str(cond.global.shape()) + " does not have width " +
                            std::to_string(cfg.global_dim));
    for (const Var& l : cond.local)
        if (l.shape().size() != 2 || l.shape()[1] != cfg.local_dim)
            throw ContractError("local condition " + shape_str(l.shape()) + " does not have width " +
                                std::to_string(cfg.local_dim));

    Tape& tape = bind.tape();
    const std::string p = prefix + ".";
    Var temb = gelu(nn::linear(nn::bind_linear(bind, p + "time"), tape.constant(timestep_embedding(t, cfg.width))));

    Var skip0 = conv_block(bind, p + "enc0", input, temb);
    Var skip1 = conv_block(bind, p + "enc1", avg_pool2(skip0), temb);
    Var x = conv_block(bind, p + "mid", avg_pool2(skip1), temb);

    x = attend(bind, p + "attn0", x, cond.global, cond.local[0]);
    x = conv_block(bind, p + "dec1", concat({upsample_nearest2(x), skip1}, 0), temb);
    x = attend(bind, p + "attn1", x, cond.global, cond.local[1]);
    x = conv_block(bind, p + "dec2", concat({upsample_nearest2(x), skip0}, 0), temb);
    return nn::conv_same(bind, p + "out", x);
}

}  // namespace mvt::diff
