#include "mvtryon/pose/encoder.hpp"

#include "mvtryon/errors.hpp"
#include "mvtryon/nn/layers.hpp"
#include "mvtryon/numerics/ops.hpp"

namespace mvt::pose {

void declare_pose_encoder(nn::LayerSpec& spec, const std::string& prefix, const PoseEncoderConfig& cfg) {
    spec.conv(prefix + ".block0", 3, cfg.width, 3);
    spec.conv(prefix + ".block1", cfg.width, 2 * cfg.width, 3);
    spec.conv(prefix + ".block2", 2 * cfg.width, cfg.out_dim, 3);
    spec.layernorm(prefix + ".norm", cfg.out_dim);
}

PoseEmbedding pose_encode(Var raster, nn::Binder& bind, const std::string& prefix) {
    const Shape& s = raster.shape();
    if (s.size() != 3 || s[0] != 3 || s[1] % 8 != 0 || s[2] % 8 != 0 || s[1] == 0 || s[2] == 0)
        throw ContractError("pose raster must be [3 x H x W] with H, W divisible by 8, got " + shape_str(s));
    Var x = raster;
    for (int b = 0; b < 3; ++b) x = avg_pool2(gelu(nn::conv_same(bind, prefix + ".block" + std::to_string(b), x)));
    const std::size_t h = x.shape()[1], w = x.shape()[2];
    Var tokens = layernorm(nn::to_tokens(x), bind(prefix + ".norm.gain"), bind(prefix + ".norm.bias"));
    return {tokens, h, w};
}

PoseEmbedding resample(const PoseEmbedding& e, std::size_t h, std::size_t w) {
    if (e.h == h && e.w == w) return e;
    Var grid = resize_bilinear(nn::from_tokens(e.tokens, e.h, e.w), h, w);
    return {nn::to_tokens(grid), h, w};
}

}  // namespace mvt::pose
