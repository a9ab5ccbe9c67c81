#include "mvtryon/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "mvtryon/errors.hpp"
#include "mvtryon/numerics/ops.hpp"

namespace mvt::diff {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
    if (betas_.empty()) throw ContractError("noise schedule needs at least one step");
    double prod = 1.0;
    for (double b : betas_) {
        if (!(b > 0.0 && b <= 1.0)) throw ContractError("beta " + std::to_string(b) + " outside (0, 1]");
        prod *= 1.0 - b;
        alphas_bar_.push_back(prod);
    }
}

double NoiseSchedule::beta(std::size_t t) const {
    if (t < 1 || t > steps()) throw ContractError("step " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
    return betas_[t - 1];
}

double NoiseSchedule::alpha_bar(std::size_t t) const {
    if (t < 1 || t > steps()) throw ContractError("step " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
    return alphas_bar_[t - 1];
}

NoiseSchedule make_schedule(std::size_t T, double beta_start, double beta_end) {
    if (T < 1) throw ContractError("schedule length must be at least 1");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw ContractError("need 0 < beta_start <= beta_end < 1");
    std::vector<double> betas(T);
    for (std::size_t i = 0; i < T; ++i)
        betas[i] = T == 1 ? beta_start
                          : beta_start + (beta_end - beta_start) * static_cast<double>(i) / static_cast<double>(T - 1);
    return NoiseSchedule(std::move(betas));
}

Tensor forward_diffuse(const Tensor& z0, std::size_t t, const Tensor& eps, const NoiseSchedule& s) {
    if (z0.shape() != eps.shape())
        throw DimensionError("noise " + shape_str(eps.shape()) + " does not match " + shape_str(z0.shape()));
    const double ab = s.alpha_bar(t);
    const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
    Tensor out(z0.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a * z0[i] + b * eps[i];
    return out;
}

namespace {

double checked_alpha_bar(std::size_t t, const NoiseSchedule& s) {
    const double ab = s.alpha_bar(t);
    if (ab <= 0.0) throw SingularityError("alpha_bar is zero at step " + std::to_string(t));
    return ab;
}

}  // namespace

Var reconstruct_x0(Var z_t, Var eps_hat, std::size_t t, const NoiseSchedule& s) {
    const double ab = checked_alpha_bar(t, s);
    return scale(sub(z_t, scale(eps_hat, std::sqrt(1.0 - ab))), 1.0 / std::sqrt(ab));
}

Tensor reconstruct_x0(const Tensor& z_t, const Tensor& eps_hat, std::size_t t, const NoiseSchedule& s) {
    if (z_t.shape() != eps_hat.shape())
        throw DimensionError("noise " + shape_str(eps_hat.shape()) + " does not match " + shape_str(z_t.shape()));
    const double ab = checked_alpha_bar(t, s);
    const double b = std::sqrt(1.0 - ab), inv = 1.0 / std::sqrt(ab);
    Tensor out(z_t.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = (z_t[i] - b * eps_hat[i]) * inv;
    return out;
}

}  // namespace mvt::diff
