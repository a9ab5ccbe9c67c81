#pragma once

#include <cstddef>
#include <vector>

#include "mvtryon/numerics/tape.hpp"

namespace mvt::diff {

// Steps are 1-based: t in [1, T].
class NoiseSchedule {
   public:
    // Each beta must lie in (0, 1].
    explicit NoiseSchedule(std::vector<double> betas);

    std::size_t steps() const { return betas_.size(); }
    double beta(std::size_t t) const;
    double alpha_bar(std::size_t t) const;
    const std::vector<double>& betas() const { return betas_; }
    const std::vector<double>& alphas_bar() const { return alphas_bar_; }

   private:
    std::vector<double> betas_;
    std::vector<double> alphas_bar_;
};

// Linear betas from beta_start to beta_end.
NoiseSchedule make_schedule(std::size_t T, double beta_start, double beta_end);

// sqrt(abar_t) z0 + sqrt(1 - abar_t) eps
Tensor forward_diffuse(const Tensor& z0, std::size_t t, const Tensor& eps, const NoiseSchedule& s);

// (z_t - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t). Throws SingularityError if abar_t is 0.
Var reconstruct_x0(Var z_t, Var eps_hat, std::size_t t, const NoiseSchedule& s);
Tensor reconstruct_x0(const Tensor& z_t, const Tensor& eps_hat, std::size_t t, const NoiseSchedule& s);

}  // namespace mvt::diff
