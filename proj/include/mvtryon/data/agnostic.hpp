#pragma once

#include "mvtryon/conditioning/garment.hpp"
#include "mvtryon/data/image_io.hpp"
#include "mvtryon/pose/select.hpp"

namespace mvt::data {

inline constexpr std::size_t kMaskDilation = 2;

struct Agnostic {
    Tensor mask;        // [1 x H x W], 0 or 1
    Tensor masked;      // [3 x H x W], person with the mask region set to 0
    Tensor latent_mask; // [1 x h x w], area average of `mask`
};

// Garment and arm labels, dilated by a disc of the given radius
// (dy^2 + dx^2 <= r^2). Unknown labels throw FormatError.
Tensor region_mask(const LabelMap& parsing, std::size_t radius = kMaskDilation);

// image: [3 x H x W]; the latent grid must divide the image size.
Agnostic make_agnostic(const Tensor& image, const LabelMap& parsing, std::size_t latent_h, std::size_t latent_w);

// Average over non-overlapping (H/h) x (W/w) blocks.
Tensor area_downsample(const Tensor& mask, std::size_t h, std::size_t w);

// One view of one identity, prepared for the denoiser. Latents live in pixel
// space, so `target` is the person image itself.
struct TryOnSample {
    Tensor image;
    Tensor mask;
    Tensor masked;
    Tensor latent_mask;
    pose::PoseSkeleton pose;
    cond::GarmentPair garments;
    Tensor target;
};

TryOnSample make_tryon(const Tensor& image, const LabelMap& parsing, const pose::PoseSkeleton& pose,
                       const cond::GarmentPair& garments);

}  // namespace mvt::data
