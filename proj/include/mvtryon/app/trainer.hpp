#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "mvtryon/app/config.hpp"
#include "mvtryon/data/dataset.hpp"
#include "mvtryon/nn/optim.hpp"
#include "mvtryon/nn/params.hpp"

namespace mvt::app {

struct StepRecord {
    std::uint64_t step = 0;  // 1-based
    double total = 0.0, ldm = 0.0, l1 = 0.0, perc = 0.0;
};

// Seed of the random draws (sample, view, timestep, noise) for one step.
std::uint64_t step_seed(std::uint64_t global_seed, std::uint64_t step);

// One denoiser, its optimiser and the training views. Step k always draws its
// batch from step_seed(seed, k), so resuming from saved parameters and
// optimiser state continues the same trajectory.
class Trainer {
   public:
    Trainer(const RunConfig& cfg, std::vector<data::MvgSample> samples);

    // Runs step steps_done() + 1. Throws NumericError on a non-finite loss,
    // after writing a dump into the dump directory if one is set.
    StepRecord step();

    std::uint64_t steps_done() const { return optim_.steps(); }
    std::size_t steps_per_epoch() const;
    std::uint64_t total_steps() const;

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    nn::AdamW& optimizer() { return optim_; }
    const RunConfig& config() const { return cfg_; }
    const std::vector<data::MvgSample>& samples() const { return samples_; }

    void set_dump_dir(std::filesystem::path dir) { dump_dir_ = std::move(dir); }

    // <path> holds the parameters, <path>.optim the optimiser state.
    void save(const std::filesystem::path& path) const;
    void resume(const std::filesystem::path& path);

   private:
    RunConfig cfg_;
    std::vector<data::MvgSample> samples_;
    diff::NoiseSchedule sched_;
    loss::PerceptualNet perceptual_;
    nn::ParamStore params_;
    nn::AdamW optim_;
    std::optional<std::filesystem::path> dump_dir_;
};

std::filesystem::path optimizer_state_path(const std::filesystem::path& checkpoint);
std::filesystem::path epoch_checkpoint(const std::filesystem::path& out, std::size_t epoch);

struct TrainSummary {
    std::uint64_t steps = 0;
    std::vector<StepRecord> records;  // this invocation only
    std::filesystem::path final_checkpoint;
};

// Writes <out>/config.txt, <out>/loss.log (one line per step),
// <out>/epoch_NNNN.ckpt at each epoch end and the last step, and
// <out>/final.ckpt. With `resume`, loss.log is cut back to the resumed step.
TrainSummary run_training(Trainer& trainer, const std::filesystem::path& out,
                          const std::optional<std::filesystem::path>& resume, std::ostream* progress = nullptr);

}  // namespace mvt::app
