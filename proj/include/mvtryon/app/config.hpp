#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvtryon/diffusion/model.hpp"
#include "mvtryon/diffusion/schedule.hpp"
#include "mvtryon/losses/losses.hpp"
#include "mvtryon/nn/optim.hpp"

namespace mvt::app {

// Everything a run depends on. Serialised as flat key=value lines; doubles
// are written in shortest round-trip form so a written config reproduces the
// run exactly.
struct RunConfig {
    diff::ModelConfig model;
    std::size_t local_levels = 2;

    std::size_t timesteps = 200;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    std::size_t sample_steps = 20;

    loss::LossWeights loss;
    std::uint64_t perceptual_seed = 1234;

    nn::AdamWConfig optim;

    std::size_t batch_size = 1;
    std::size_t epochs = 1;
    std::size_t max_steps = 0;  // 0: epochs x steps per epoch
    std::uint64_t seed = 0;

    std::string data;
    std::string out;

    diff::NoiseSchedule schedule() const;
    // Throws UsageError naming the offending key.
    void validate() const;
};

std::vector<std::string> config_keys();

// Throws UsageError for unknown keys or unparsable values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);

// "key = value" lines; blank lines and '#' comments are skipped.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin = "config");
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
// "key=value"
void apply_override(RunConfig& cfg, const std::string& assignment);

// All keys in config_keys() order.
std::string format_config(const RunConfig& cfg);
void write_config(const std::filesystem::path& path, const RunConfig& cfg);

// Defaults, then MVTRYON_SEED if set, then the file, then overrides.
RunConfig resolve_config(const std::filesystem::path* file, const std::vector<std::string>& overrides);

// Reads MVTRYON_SEED into `seed`; false when unset.
bool env_seed(std::uint64_t& seed);

}  // namespace mvt::app
