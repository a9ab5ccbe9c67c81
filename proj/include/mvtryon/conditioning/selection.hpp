#pragma once

#include <string>

#include "mvtryon/nn/layers.hpp"
#include "mvtryon/pose/encoder.hpp"

namespace mvt::cond {

// Projections for one scale: person pose, garment pose (shared by both
// views), and garment features, all into a common width d.
struct SoftSelectionBlock {
    nn::LinearLayer person_pose;
    nn::LinearLayer garment_pose;
    nn::LinearLayer garment_feat;
};

void declare_soft_selection(nn::LayerSpec& spec, const std::string& prefix, std::size_t pose_dim,
                            std::size_t feat_dim, std::size_t common_dim);
SoftSelectionBlock bind_soft_selection(nn::Binder& bind, const std::string& prefix);

// softmax(P_h P_g^T / sqrt(d)) over garment tokens: [n_person x n_garment].
Var selection_weights(const pose::PoseEmbedding& person, const pose::PoseEmbedding& garment,
                      const SoftSelectionBlock& block);

// Front and back garment features re-indexed by person-pose tokens through
// their selection weights, then concatenated on channels: [n_person x 2d].
// Each garment embedding must have one token per garment feature token.
Var soft_select(Var front_feat, Var back_feat, const pose::PoseEmbedding& person, const pose::PoseEmbedding& front_pose,
                const pose::PoseEmbedding& back_pose, const SoftSelectionBlock& block);

// Selection-free variant: both projected feature sets side by side, [n_garment x 2d].
Var concat_features(Var front_feat, Var back_feat, const SoftSelectionBlock& block);

}  // namespace mvt::cond
