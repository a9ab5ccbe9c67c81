#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "mvtryon/nn/params.hpp"

namespace mvt::nn {

struct AdamWConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-2;
    double clip_norm = 0.0;  // global gradient norm clip; 0 disables
};

// Adam moments with decoupled weight decay. Parameters without a gradient
// buffer are skipped for that step.
class AdamW {
   public:
    explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

    void step(ParamStore& store);

    std::uint64_t steps() const { return steps_; }
    const AdamWConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

    // Moments and step count, in the checkpoint format.
    void save_state(const std::filesystem::path& path) const;
    void load_state(const std::filesystem::path& path);

   private:
    AdamWConfig cfg_;
    std::uint64_t steps_ = 0;
    std::map<std::string, Tensor> m_;
    std::map<std::string, Tensor> v_;
};

}  // namespace mvt::nn
