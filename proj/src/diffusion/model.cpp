#include "mvtryon/diffusion/model.hpp"

#include "mvtryon/conditioning/selection.hpp"
#include "mvtryon/errors.hpp"
#include "mvtryon/numerics/ops.hpp"
#include "mvtryon/pose/skeleton.hpp"

namespace mvt::diff {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Full:
            return "full";
        case Variant::NoSoft:
            return "no-soft";
        case Variant::NoSelection:
            return "none";
    }
    return "?";
}

Variant parse_variant(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no-soft") return Variant::NoSoft;
    if (s == "none") return Variant::NoSelection;
    throw UsageError("unknown model variant '" + s + "' (expected full, no-soft or none)");
}

BackboneConfig ModelConfig::backbone() const {
    BackboneConfig b;
    b.width = width;
    b.global_dim = global_dim;
    b.local_dim = 2 * select_dim();
    return b;
}

void ModelConfig::validate() const {
    if (image_h % 16 != 0 || image_w % 16 != 0 || image_h == 0 || image_w == 0)
        throw ContractError("image size " + std::to_string(image_h) + "x" + std::to_string(image_w) +
                            " must be divisible by 16");
    if (width == 0 || width % 2 != 0) throw ContractError("backbone width must be even and positive");
    if (global_dim == 0 || pose_dim == 0 || local_dim == 0) throw ContractError("model widths must be positive");
}

nn::LayerSpec model_spec(const ModelConfig& cfg) {
    cfg.validate();
    nn::LayerSpec spec;
    pose::declare_pose_encoder(spec, "pose", {8, cfg.pose_dim});
    cond::declare_global_encoder(spec, "global", {8, cfg.global_dim});
    cond::declare_local_encoder(spec, "local", {8, cfg.local_dim, 2});
    for (int i = 0; i < 2; ++i) {
        const std::string name = "select" + std::to_string(i);
        if (cfg.variant == Variant::Full)
            cond::declare_soft_selection(spec, name, cfg.pose_dim, cfg.local_dim, cfg.select_dim());
        else
            spec.linear(name + ".garment_feat", cfg.local_dim, cfg.select_dim());
    }
    declare_backbone(spec, "unet", cfg.backbone());
    return spec;
}

nn::ParamStore init_model(const ModelConfig& cfg, std::uint64_t seed) { return nn::init_params(model_spec(cfg), seed); }

pose::ViewChoice model_choice(const ModelConfig& cfg, const pose::PoseSkeleton& person) {
    if (cfg.variant == Variant::NoSelection) return pose::ViewChoice::Front;
    return pose::hard_select_or_front(person);
}

BackboneConditions encode_conditions(nn::Binder& bind, const ModelConfig& cfg, const cond::GarmentPair& garments,
                                     const pose::PoseSkeleton& person) {
    Tape& tape = bind.tape();
    const Shape img{3, cfg.image_h, cfg.image_w};
    if (garments.front_image.shape() != img || garments.back_image.shape() != img)
        throw ContractError("garment images must be " + shape_str(img));
    Var front = tape.constant(garments.front_image);
    Var back = tape.constant(garments.back_image);

    BackboneConditions out;
    if (cfg.variant == Variant::NoSelection) {
        out.global = concat({cond::global_encode(front, bind, "global"), cond::global_encode(back, bind, "global")}, 0);
    } else {
        const bool use_front = pose::hard_select_or_front(person) == pose::ViewChoice::Front;
        out.global = cond::global_encode(use_front ? front : back, bind, "global");
    }

    cond::LocalFeaturePyramid lf = cond::local_encode(front, bind, "local", 2);
    cond::LocalFeaturePyramid lb = cond::local_encode(back, bind, "local", 2);

    if (cfg.variant != Variant::Full) {
        for (int i = 0; i < 2; ++i) {
            nn::LinearLayer proj = nn::bind_linear(bind, "select" + std::to_string(i) + ".garment_feat");
            out.local.push_back(concat({nn::linear(proj, lf.levels[i].tokens), nn::linear(proj, lb.levels[i].tokens)}, 1));
        }
        return out;
    }

    auto encode_pose = [&](const pose::PoseSkeleton& s) {
        return pose::pose_encode(tape.constant(pose::render_skeleton(s, cfg.image_h, cfg.image_w)), bind, "pose");
    };
    const pose::PoseEmbedding eh = encode_pose(person);
    const pose::PoseEmbedding ef = encode_pose(garments.front_pose);
    const pose::PoseEmbedding eb = encode_pose(garments.back_pose);
    for (int i = 0; i < 2; ++i) {
        const cond::LocalLevel& level = lf.levels[i];
        cond::SoftSelectionBlock blk = cond::bind_soft_selection(bind, "select" + std::to_string(i));
        // All three pose grids are brought to this level's garment grid.
        out.local.push_back(cond::soft_select(level.tokens, lb.levels[i].tokens, pose::resample(eh, level.h, level.w),
                                              pose::resample(ef, level.h, level.w),
                                              pose::resample(eb, level.h, level.w), blk));
    }
    return out;
}

Tensor assemble_input(const Tensor& z_t, const Tensor& agnostic, const Tensor& mask) {
    if (z_t.rank() != 3 || agnostic.shape() != z_t.shape() || mask.shape() != Shape{1, z_t.dim(1), z_t.dim(2)})
        throw DimensionError("spatial input parts " + shape_str(z_t.shape()) + ", " + shape_str(agnostic.shape()) + ", " +
                             shape_str(mask.shape()) + " do not line up");
    for (double v : mask.storage())
        if (v < 0.0 || v > 1.0) throw ContractError("mask values must lie in [0, 1]");
    std::vector<double> data;
    data.reserve(z_t.numel() * 2 + mask.numel());
    for (const Tensor* t : {&z_t, &agnostic, &mask}) data.insert(data.end(), t->storage().begin(), t->storage().end());
    return Tensor({2 * z_t.dim(0) + 1, z_t.dim(1), z_t.dim(2)}, std::move(data));
}

Var model_predict(nn::Binder& bind, const ModelConfig& cfg, const Tensor& input, std::size_t t,
                  const BackboneConditions& cond) {
    return predict_noise(bind.tape().constant(input), t, cond, bind, "unet", cfg.backbone());
}

}  // namespace mvt::diff
