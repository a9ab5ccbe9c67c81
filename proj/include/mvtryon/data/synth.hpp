#pragma once

#include <cstdint>
#include <vector>

#include "mvtryon/data/dataset.hpp"

namespace mvt::data {

struct SynthOptions {
    std::size_t h = 64;
    std::size_t w = 48;
};

// Procedural figures: a head, a torso wearing a two-sided garment, two arms
// and a lower body, rendered at the five view angles. The torso shows the
// front pattern when the figure faces the camera, the back pattern when it
// faces away, and front/back halves at 90 degrees. Arm keypoints follow
// cos(angle), so the right arm sits left of the left arm exactly when the
// figure faces the camera. Garment poses are the 0 and 180 degree skeletons.
// All pixel values are 8-bit representable, so a write/load round trip is
// lossless. Identity i is generated from its own stream, so the first k
// samples do not depend on n.
std::vector<MvgSample> synth_generate(std::uint64_t seed, std::size_t n, const SynthOptions& opt = {});

// Pixels inside the torso of a generated view, as a [1 x H x W] 0/1 mask.
Tensor garment_region(const LabelMap& parsing);

}  // namespace mvt::data
