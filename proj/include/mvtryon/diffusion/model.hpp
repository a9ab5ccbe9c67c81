#pragma once

#include <string>

#include "mvtryon/conditioning/encoders.hpp"
#include "mvtryon/conditioning/garment.hpp"
#include "mvtryon/diffusion/unet.hpp"
#include "mvtryon/pose/encoder.hpp"
#include "mvtryon/pose/select.hpp"

namespace mvt::diff {

// Which view-adaptive selection stages are active.
enum class Variant {
    Full,         // hard selection for the global token, soft selection for local features
    NoSoft,       // hard selection; local features of both views concatenated on channels
    NoSelection,  // both global tokens stacked; local features concatenated
};

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct ModelConfig {
    std::size_t image_h = 64;
    std::size_t image_w = 48;
    std::size_t width = 16;        // backbone width; attention runs at 2x this
    std::size_t global_dim = 32;
    std::size_t pose_dim = 16;
    std::size_t local_dim = 16;    // local encoder output width
    Variant variant = Variant::Full;

    // Per-view projected width inside selection; two views fill the attention width.
    std::size_t select_dim() const { return width; }
    BackboneConfig backbone() const;
    void validate() const;
};

nn::LayerSpec model_spec(const ModelConfig& cfg);
nn::ParamStore init_model(const ModelConfig& cfg, std::uint64_t seed);

// The view used for the global token and the pre-warp paste. NoSelection
// always pastes the front view.
pose::ViewChoice model_choice(const ModelConfig& cfg, const pose::PoseSkeleton& person);

BackboneConditions encode_conditions(nn::Binder& bind, const ModelConfig& cfg, const cond::GarmentPair& garments,
                                     const pose::PoseSkeleton& person);

// [7 x H x W]: noisy latent, agnostic latent with pasted garment, mask.
Tensor assemble_input(const Tensor& z_t, const Tensor& agnostic, const Tensor& mask);

Var model_predict(nn::Binder& bind, const ModelConfig& cfg, const Tensor& input, std::size_t t,
                  const BackboneConditions& cond);

}  // namespace mvt::diff
