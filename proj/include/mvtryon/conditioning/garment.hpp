#pragma once

#include "mvtryon/numerics/tensor.hpp"
#include "mvtryon/pose/skeleton.hpp"

namespace mvt::cond {

// Front and back views of one garment, images [3 x H x W] in [-1, 1].
struct GarmentPair {
    Tensor front_image;
    Tensor back_image;
    pose::PoseSkeleton front_pose;
    pose::PoseSkeleton back_pose;

    friend bool operator==(const GarmentPair&, const GarmentPair&) = default;
};

}  // namespace mvt::cond
