#pragma once

#include "mvtryon/conditioning/garment.hpp"
#include "mvtryon/pose/select.hpp"

namespace mvt::diff {

// Scales and translates the whole garment image onto the bounding box of the
// mask (bilinear sampling) and writes it where mask > 0.5. Elsewhere the
// agnostic image is copied unchanged. agnostic: [C x H x W], mask: [1 x H x W].
Tensor paste_garment(const Tensor& agnostic, const Tensor& garment, const Tensor& mask);

Tensor paste_prewarp(const Tensor& agnostic, const cond::GarmentPair& garments, pose::ViewChoice choice,
                     const Tensor& mask);

}  // namespace mvt::diff
