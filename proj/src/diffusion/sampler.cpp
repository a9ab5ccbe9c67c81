#include "mvtryon/diffusion/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mvtryon/errors.hpp"

namespace mvt::diff {

std::vector<std::size_t> sampling_steps(std::size_t T, std::size_t steps) {
    if (steps == 0 || steps > T)
        throw ContractError("sampling steps " + std::to_string(steps) + " must lie in [1, " + std::to_string(T) + "]");
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= steps; ++k) out.push_back(k * T / steps);
    return out;
}

Tensor gaussian_noise(const Shape& shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Tensor out(shape);
    for (auto& v : out.storage()) v = n(rng);
    return out;
}

Tensor ddim_sample(const NoisePredictor& predict, const Tensor& known, const Tensor& mask, const NoiseSchedule& sched,
                   std::size_t steps, std::uint64_t seed) {
    if (known.rank() != 3 || mask.shape() != Shape{1, known.dim(1), known.dim(2)})
        throw DimensionError("sampler mask " + shape_str(mask.shape()) + " does not match " + shape_str(known.shape()));
    const std::vector<std::size_t> ts = sampling_steps(sched.steps(), steps);
    const std::size_t hw = known.dim(1) * known.dim(2);
    auto inside = [&](std::size_t i) { return mask[i % hw] > 0.5; };

    const Tensor eps0 = gaussian_noise(known.shape(), seed);
    Tensor z = forward_diffuse(known, ts.back(), eps0, sched);
    for (std::size_t k = ts.size(); k-- > 0;) {
        const std::size_t t = ts[k];
        const double ab = sched.alpha_bar(t);
        const double ab_prev = k == 0 ? 1.0 : sched.alpha_bar(ts[k - 1]);
        for (std::size_t i = 0; i < z.numel(); ++i)
            if (!inside(i)) z[i] = std::sqrt(ab) * known[i] + std::sqrt(1.0 - ab) * eps0[i];

        const Tensor eps = predict(z, t);
        if (eps.shape() != z.shape())
            throw ContractError("noise predictor returned " + shape_str(eps.shape()) + " for " + shape_str(z.shape()));
        for (std::size_t i = 0; i < z.numel(); ++i) {
            const double x0 = (z[i] - std::sqrt(1.0 - ab) * eps[i]) / std::sqrt(ab);
            z[i] = std::sqrt(ab_prev) * x0 + std::sqrt(1.0 - ab_prev) * eps[i];
        }
    }
    for (std::size_t i = 0; i < z.numel(); ++i) z[i] = inside(i) ? std::clamp(z[i], -1.0, 1.0) : known[i];
    return z;
}

}  // namespace mvt::diff
