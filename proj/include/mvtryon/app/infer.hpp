#pragma once

#include "mvtryon/data/agnostic.hpp"
#include "mvtryon/diffusion/model.hpp"
#include "mvtryon/diffusion/schedule.hpp"

namespace mvt::app {

// Full try-on: hard selection picks the pasted garment view, garment
// conditions are encoded once, then DDIM runs with the known region held to
// the person image. Parameters are bound frozen.
Tensor generate_tryon(const diff::ModelConfig& cfg, nn::ParamStore& params, const diff::NoiseSchedule& sched,
                      const data::TryOnSample& sample, std::size_t steps, std::uint64_t seed);

}  // namespace mvt::app
