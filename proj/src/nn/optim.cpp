#include "mvtryon/nn/optim.hpp"

#include <cmath>

#include "mvtryon/errors.hpp"
#include "mvtryon/nn/checkpoint.hpp"

namespace mvt::nn {

void AdamW::step(ParamStore& store) {
    ++steps_;
    double clip = 1.0;
    if (cfg_.clip_norm > 0.0) {
        double sq = 0.0;
        for (auto& [_, p] : store)
            if (p.has_grad())
                for (double g : p.grad()) sq += g * g;
        const double norm = std::sqrt(sq);
        if (norm > cfg_.clip_norm) clip = cfg_.clip_norm / norm;
    }

    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    for (auto& [name, p] : store) {
        if (!p.has_grad()) continue;
        auto [mit, _m] = m_.try_emplace(name, p.shape());
        auto [vit, _v] = v_.try_emplace(name, p.shape());
        auto& m = mit->second.storage();
        auto& v = vit->second.storage();
        auto& w = p.storage();
        const auto& g = p.grad();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g[i] * clip;
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
            w[i] -= cfg_.lr * cfg_.weight_decay * w[i];
            w[i] -= cfg_.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.eps);
        }
    }
}

void AdamW::save_state(const std::filesystem::path& path) const {
    std::map<std::string, Tensor> out;
    // Step count stored as two 32-bit halves so it survives the f64 payload exactly.
    out.emplace("step", Tensor({2}, {static_cast<double>(steps_ >> 32), static_cast<double>(steps_ & 0xffffffffULL)}));
    for (const auto& [name, t] : m_) out.emplace("m/" + name, t);
    for (const auto& [name, t] : v_) out.emplace("v/" + name, t);
    save_tensors(out, path);
}

void AdamW::load_state(const std::filesystem::path& path) {
    auto in = load_tensors(path);
    auto it = in.find("step");
    if (it == in.end() || it->second.numel() != 2) throw FormatError(path.string() + ": missing optimizer step");
    steps_ = (static_cast<std::uint64_t>(it->second[0]) << 32) | static_cast<std::uint64_t>(it->second[1]);
    m_.clear();
    v_.clear();
    for (auto& [name, t] : in) {
        if (name.rfind("m/", 0) == 0)
            m_.emplace(name.substr(2), std::move(t));
        else if (name.rfind("v/", 0) == 0)
            v_.emplace(name.substr(2), std::move(t));
    }
}

}  // namespace mvt::nn
