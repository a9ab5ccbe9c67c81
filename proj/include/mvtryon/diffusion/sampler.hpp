#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mvtryon/diffusion/schedule.hpp"

namespace mvt::diff {

// Noise prediction for the current latent at step t.
using NoisePredictor = std::function<Tensor(const Tensor& z_t, std::size_t t)>;

// `steps` evenly spaced steps ending at T, increasing.
std::vector<std::size_t> sampling_steps(std::size_t T, std::size_t steps);

// Deterministic DDIM (eta = 0). The start latent is `known` diffused to step T
// with seeded Gaussian noise eps0, since abar_T stays well above zero for
// short linear schedules. Before every
// prediction the region where mask <= 0.5 is reset to the forward-diffused
// known image, sqrt(abar) known + sqrt(1 - abar) eps0. The result is clamped
// to [-1, 1] and then takes `known` verbatim outside the mask.
// known: [C x H x W], mask: [1 x H x W].
Tensor ddim_sample(const NoisePredictor& predict, const Tensor& known, const Tensor& mask, const NoiseSchedule& sched,
                   std::size_t steps, std::uint64_t seed);

// The sampler's starting noise for a given shape and seed.
Tensor gaussian_noise(const Shape& shape, std::uint64_t seed);

}  // namespace mvt::diff
