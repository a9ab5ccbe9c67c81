#include "mvtryon/diffusion/prewarp.hpp"

#include <algorithm>
#include <cmath>

#include "mvtryon/errors.hpp"

namespace mvt::diff {

Tensor paste_garment(const Tensor& agnostic, const Tensor& garment, const Tensor& mask) {
    if (agnostic.rank() != 3 || garment.rank() != 3 || garment.dim(0) != agnostic.dim(0))
        throw DimensionError("paste expects [C x H x W] images with equal channels, got " + shape_str(agnostic.shape()) +
                             " and " + shape_str(garment.shape()));
    const std::size_t c = agnostic.dim(0), h = agnostic.dim(1), w = agnostic.dim(2);
    if (mask.shape() != Shape{1, h, w})
        throw DimensionError("mask " + shape_str(mask.shape()) + " does not match image " + shape_str(agnostic.shape()));

    std::size_t y0 = h, y1 = 0, x0 = w, x1 = 0;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            if (mask.at(0, y, x) > 0.5) {
                y0 = std::min(y0, y), y1 = std::max(y1, y);
                x0 = std::min(x0, x), x1 = std::max(x1, x);
            }
    if (y0 > y1) throw ContractError("cannot paste into an empty mask");

    const std::size_t gh = garment.dim(1), gw = garment.dim(2);
    // Box corners map to garment corners.
    auto source = [](std::size_t p, std::size_t lo, std::size_t hi, std::size_t n) {
        if (hi == lo) return 0.5 * static_cast<double>(n - 1);
        return static_cast<double>(p - lo) * static_cast<double>(n - 1) / static_cast<double>(hi - lo);
    };

    Tensor out = agnostic;
    for (std::size_t y = y0; y <= y1; ++y) {
        const double sy = source(y, y0, y1, gh);
        const auto iy = std::min(static_cast<std::size_t>(sy), gh - 1);
        const std::size_t jy = std::min(iy + 1, gh - 1);
        const double fy = sy - static_cast<double>(iy);
        for (std::size_t x = x0; x <= x1; ++x) {
            if (mask.at(0, y, x) <= 0.5) continue;
            const double sx = source(x, x0, x1, gw);
            const auto ix = std::min(static_cast<std::size_t>(sx), gw - 1);
            const std::size_t jx = std::min(ix + 1, gw - 1);
            const double fx = sx - static_cast<double>(ix);
            for (std::size_t ch = 0; ch < c; ++ch) {
                // Exact copy on grid points keeps integer-aligned pastes lossless.
                double v = garment.at(ch, iy, ix);
                if (fx != 0.0 || fy != 0.0)
                    v = (1 - fy) * ((1 - fx) * garment.at(ch, iy, ix) + fx * garment.at(ch, iy, jx)) +
                        fy * ((1 - fx) * garment.at(ch, jy, ix) + fx * garment.at(ch, jy, jx));
                out.at(ch, y, x) = v;
            }
        }
    }
    return out;
}

Tensor paste_prewarp(const Tensor& agnostic, const cond::GarmentPair& garments, pose::ViewChoice choice,
                     const Tensor& mask) {
    return paste_garment(agnostic, choice == pose::ViewChoice::Front ? garments.front_image : garments.back_image, mask);
}

}  // namespace mvt::diff
