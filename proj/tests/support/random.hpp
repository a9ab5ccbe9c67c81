#pragma once

#include <random>

#include "mvtryon/numerics/tensor.hpp"

namespace mvt::testing {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : t.storage()) v = dist(rng);
    return t;
}

inline Tensor random_param(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t = random_tensor(std::move(shape), rng, lo, hi);
    t.set_requires_grad(true);
    return t;
}

}  // namespace mvt::testing
