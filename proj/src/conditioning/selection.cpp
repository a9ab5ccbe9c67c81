#include "mvtryon/conditioning/selection.hpp"

#include <cmath>

#include "mvtryon/errors.hpp"
#include "mvtryon/numerics/ops.hpp"

namespace mvt::cond {

void declare_soft_selection(nn::LayerSpec& spec, const std::string& prefix, std::size_t pose_dim,
                            std::size_t feat_dim, std::size_t common_dim) {
    spec.linear(prefix + ".person_pose", pose_dim, common_dim);
    spec.linear(prefix + ".garment_pose", pose_dim, common_dim);
    spec.linear(prefix + ".garment_feat", feat_dim, common_dim);
}

SoftSelectionBlock bind_soft_selection(nn::Binder& bind, const std::string& prefix) {
    SoftSelectionBlock b{nn::bind_linear(bind, prefix + ".person_pose"), nn::bind_linear(bind, prefix + ".garment_pose"),
                         nn::bind_linear(bind, prefix + ".garment_feat")};
    if (b.person_pose.out() != b.garment_pose.out() || b.garment_pose.out() != b.garment_feat.out())
        throw ContractError("soft selection '" + prefix + "' projections disagree on the common width");
    return b;
}

Var selection_weights(const pose::PoseEmbedding& person, const pose::PoseEmbedding& garment,
                      const SoftSelectionBlock& block) {
    Var ph = nn::linear(block.person_pose, person.tokens);
    Var pg = nn::linear(block.garment_pose, garment.tokens);
    const double s = 1.0 / std::sqrt(static_cast<double>(block.person_pose.out()));
    return softmax(scale(matmul(ph, transpose(pg)), s), 1);
}

namespace {

Var branch(Var feat, const pose::PoseEmbedding& person, const pose::PoseEmbedding& garment,
           const SoftSelectionBlock& block, const char* view) {
    if (feat.shape().size() != 2 || feat.shape()[0] != garment.tokens.shape()[0])
        throw ContractError(std::string(view) + " garment features " + shape_str(feat.shape()) + " and pose tokens " +
                            shape_str(garment.tokens.shape()) + " differ in token count");
    return matmul(selection_weights(person, garment, block), nn::linear(block.garment_feat, feat));
}

}  // namespace

Var soft_select(Var front_feat, Var back_feat, const pose::PoseEmbedding& person, const pose::PoseEmbedding& front_pose,
                const pose::PoseEmbedding& back_pose, const SoftSelectionBlock& block) {
    Var f = branch(front_feat, person, front_pose, block, "front");
    Var b = branch(back_feat, person, back_pose, block, "back");
    return concat({f, b}, 1);
}

Var concat_features(Var front_feat, Var back_feat, const SoftSelectionBlock& block) {
    if (front_feat.shape() != back_feat.shape())
        throw ContractError("front " + shape_str(front_feat.shape()) + " and back " + shape_str(back_feat.shape()) +
                            " garment features differ");
    return concat({nn::linear(block.garment_feat, front_feat), nn::linear(block.garment_feat, back_feat)}, 1);
}

}  // namespace mvt::cond
