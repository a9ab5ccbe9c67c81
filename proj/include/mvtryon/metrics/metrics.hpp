#pragma once

#include <cstdint>
#include <vector>

#include "mvtryon/losses/losses.hpp"

namespace mvt::metrics {

// The seeded perceptual network stands in for the pretrained extractors.
using FeatureExtractor = loss::PerceptualNet;
using FeatureSet = std::vector<std::vector<double>>;

inline constexpr std::size_t kSsimWindow = 7;

// Luma (0.299, 0.587, 0.114) of an RGB image in [-1, 1], or the single
// channel of a grey one. Mean SSIM over all valid 7x7 uniform windows with
// dynamic range 2.
double ssim(const Tensor& x, const Tensor& y);

// Per tap: channel vectors at each position are scaled to unit length, the
// squared distance is averaged over positions. Result is the mean over taps.
double lpips_proxy(const Tensor& x, const Tensor& y, const FeatureExtractor& net);

FeatureSet extract_features(const std::vector<Tensor>& images, const FeatureExtractor& net);

// Covariances use the n-1 normaliser. When a set has fewer than d+1 members
// its covariance is shrunk toward (tr/d) I with weight kFidShrinkage.
inline constexpr double kFidShrinkage = 0.1;

// ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)), with the trace of the
// root taken from the eigenvalues of sqrt(S_a) S_b sqrt(S_a) clamped at zero.
// The result is clamped at zero.
double frechet_distance(const FeatureSet& a, const FeatureSet& b);
double fid_proxy(const std::vector<Tensor>& a, const std::vector<Tensor>& b, const FeatureExtractor& net);

struct KidResult {
    double mean = 0.0;
    double std = 0.0;  // spread over subsets
};

inline constexpr std::size_t kKidSubsets = 10;
inline constexpr std::size_t kKidSubsetSize = 100;

// Unbiased MMD^2 with kernel (x.y/d + 1)^3 over kKidSubsets random subsets of
// min(kKidSubsetSize, |a|, |b|) members each. Rows are put in a canonical
// order first, so the value does not depend on input order.
KidResult kernel_distance(const FeatureSet& a, const FeatureSet& b, std::uint64_t seed = 0);
KidResult kid_proxy(const std::vector<Tensor>& a, const std::vector<Tensor>& b, const FeatureExtractor& net,
                    std::uint64_t seed = 0);

}  // namespace mvt::metrics
