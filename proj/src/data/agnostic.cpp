#include "mvtryon/data/agnostic.hpp"

#include "mvtryon/errors.hpp"

namespace mvt::data {

Tensor region_mask(const LabelMap& parsing, std::size_t radius) {
    const std::size_t h = parsing.h, w = parsing.w;
    std::vector<std::uint8_t> seed(h * w, 0);
    for (std::size_t i = 0; i < h * w; ++i) {
        const std::uint8_t v = parsing.labels[i];
        if (v >= kNumLabels) throw FormatError("unknown parsing label " + std::to_string(v));
        seed[i] = v == UpperGarment || v == LeftArm || v == RightArm;
    }
    const auto r = static_cast<std::ptrdiff_t>(radius);
    Tensor out({1, h, w});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            if (!seed[y * w + x]) continue;
            for (std::ptrdiff_t dy = -r; dy <= r; ++dy)
                for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
                    if (dy * dy + dx * dx > r * r) continue;
                    const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y) + dy;
                    const std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(x) + dx;
                    if (yy < 0 || xx < 0 || yy >= static_cast<std::ptrdiff_t>(h) || xx >= static_cast<std::ptrdiff_t>(w))
                        continue;
                    out.at(0, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)) = 1.0;
                }
        }
    return out;
}

Tensor area_downsample(const Tensor& mask, std::size_t h, std::size_t w) {
    if (mask.rank() != 3 || mask.dim(0) != 1) throw DimensionError("mask must be [1 x H x W], got " + shape_str(mask.shape()));
    const std::size_t H = mask.dim(1), W = mask.dim(2);
    if (h == 0 || w == 0 || H % h || W % w)
        throw ContractError("latent grid " + std::to_string(h) + "x" + std::to_string(w) + " does not divide " +
                            std::to_string(H) + "x" + std::to_string(W));
    const std::size_t fy = H / h, fx = W / w;
    Tensor out({1, h, w});
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) out.at(0, y / fy, x / fx) += mask.at(0, y, x);
    const double inv = 1.0 / static_cast<double>(fy * fx);
    for (auto& v : out.storage()) v *= inv;
    return out;
}

Agnostic make_agnostic(const Tensor& image, const LabelMap& parsing, std::size_t latent_h, std::size_t latent_w) {
    if (image.rank() != 3 || image.dim(0) != 3) throw DimensionError("person image must be [3 x H x W], got " + shape_str(image.shape()));
    if (image.dim(1) != parsing.h || image.dim(2) != parsing.w)
        throw ContractError("parsing " + std::to_string(parsing.h) + "x" + std::to_string(parsing.w) +
                            " does not match image " + shape_str(image.shape()));
    Agnostic out;
    out.mask = region_mask(parsing);
    out.masked = image;
    const std::size_t plane = parsing.h * parsing.w;
    for (std::size_t i = 0; i < plane; ++i)
        if (out.mask[i] > 0.5)
            for (std::size_t c = 0; c < 3; ++c) out.masked[c * plane + i] = 0.0;
    out.latent_mask = area_downsample(out.mask, latent_h, latent_w);
    return out;
}

TryOnSample make_tryon(const Tensor& image, const LabelMap& parsing, const pose::PoseSkeleton& pose,
                       const cond::GarmentPair& garments) {
    Agnostic ag = make_agnostic(image, parsing, image.dim(1), image.dim(2));
    return {image, std::move(ag.mask), std::move(ag.masked), std::move(ag.latent_mask), pose, garments, image};
}

}  // namespace mvt::data
