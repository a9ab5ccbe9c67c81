#include "mvtryon/conditioning/encoders.hpp"

#include <algorithm>

#include "mvtryon/errors.hpp"
#include "mvtryon/nn/layers.hpp"
#include "mvtryon/numerics/ops.hpp"

namespace mvt::cond {
namespace {

void check_image(Var image, std::size_t divisor, const char* what) {
    const Shape& s = image.shape();
    if (s.size() != 3 || s[0] != 3 || s[1] % divisor != 0 || s[2] % divisor != 0)
        throw ContractError(std::string(what) + " expects [3 x H x W] with H, W divisible by " +
                            std::to_string(divisor) + ", got " + shape_str(s));
}

Var stage(nn::Binder& bind, const std::string& name, Var x) { return avg_pool2(gelu(nn::conv_same(bind, name, x))); }

}  // namespace

void declare_global_encoder(nn::LayerSpec& spec, const std::string& prefix, const GlobalEncoderConfig& cfg) {
    const std::size_t w = cfg.width;
    spec.conv(prefix + ".stage0", 3, w, 3);
    spec.conv(prefix + ".stage1", w, 2 * w, 3);
    spec.conv(prefix + ".stage2", 2 * w, 2 * w, 3);
    spec.conv(prefix + ".stage3", 2 * w, 2 * w, 3);
    spec.linear(prefix + ".proj", 2 * w, cfg.out_dim);
}

Var global_encode(Var image, nn::Binder& bind, const std::string& prefix) {
    check_image(image, 16, "global_encode");
    Var x = image;
    for (int i = 0; i < 4; ++i) x = stage(bind, prefix + ".stage" + std::to_string(i), x);
    Var pooled = reshape(mean_trailing(x), {1, x.shape()[0]});
    return nn::linear(nn::bind_linear(bind, prefix + ".proj"), pooled);
}

void declare_local_encoder(nn::LayerSpec& spec, const std::string& prefix, const LocalEncoderConfig& cfg) {
    spec.conv(prefix + ".stem", 3, cfg.stem, 3);
    std::size_t in = cfg.stem;
    for (std::size_t i = 0; i < cfg.levels; ++i) {
        spec.conv(prefix + ".level" + std::to_string(i), in, cfg.dim, 3);
        in = cfg.dim;
    }
}

LocalFeaturePyramid local_encode(Var image, nn::Binder& bind, const std::string& prefix, std::size_t levels) {
    if (levels == 0) throw ContractError("local_encode needs at least one level");
    check_image(image, std::size_t{1} << (levels + 1), "local_encode");
    Var x = stage(bind, prefix + ".stem", image);
    LocalFeaturePyramid out;
    for (std::size_t i = 0; i < levels; ++i) {
        x = stage(bind, prefix + ".level" + std::to_string(i), x);
        out.levels.push_back({nn::to_tokens(x), x.shape()[1], x.shape()[2]});
    }
    // Built fine to coarse.
    std::reverse(out.levels.begin(), out.levels.end());
    return out;
}

}  // namespace mvt::cond
