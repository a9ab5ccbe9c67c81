#include "mvtryon/app/infer.hpp"

#include "mvtryon/diffusion/prewarp.hpp"
#include "mvtryon/diffusion/sampler.hpp"

namespace mvt::app {

Tensor generate_tryon(const diff::ModelConfig& cfg, nn::ParamStore& params, const diff::NoiseSchedule& sched,
                      const data::TryOnSample& sample, std::size_t steps, std::uint64_t seed) {
    const Tensor known = diff::paste_prewarp(sample.masked, sample.garments, diff::model_choice(cfg, sample.pose),
                                             sample.latent_mask);
    Tensor global;
    std::vector<Tensor> local;
    {
        Tape tape;
        nn::Binder bind(tape, params, true);
        const diff::BackboneConditions c = diff::encode_conditions(bind, cfg, sample.garments, sample.pose);
        global = c.global.value();
        for (Var v : c.local) local.push_back(v.value());
    }
    auto predict = [&](const Tensor& z, std::size_t t) {
        Tape tape;
        nn::Binder bind(tape, params, true);
        diff::BackboneConditions c;
        c.global = tape.constant(global);
        for (const Tensor& l : local) c.local.push_back(tape.constant(l));
        return diff::model_predict(bind, cfg, diff::assemble_input(z, known, sample.latent_mask), t, c).value();
    };
    return diff::ddim_sample(predict, known, sample.latent_mask, sched, steps, seed);
}

}  // namespace mvt::app
