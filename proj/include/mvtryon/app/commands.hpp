#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mvtryon/app/trainer.hpp"
#include "mvtryon/metrics/evaluate.hpp"

namespace mvt::app {

namespace fs = std::filesystem;

struct SynthCommand {
    std::uint64_t seed = 0;
    std::size_t count = 0;
    fs::path out;
    std::size_t h = 64, w = 48;
};

// Refuses an existing non-empty output directory (UsageError).
void cmd_synth(const SynthCommand& cmd);

struct TrainCommand {
    std::optional<fs::path> config;
    fs::path data;
    fs::path out;
    std::vector<std::string> overrides;  // key=value, applied after the config file
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> resume;
};

// Without `resume` the output directory must be empty or absent.
TrainSummary cmd_train(const TrainCommand& cmd, std::ostream* progress = nullptr);

struct SampleCommand {
    fs::path checkpoint;
    std::optional<fs::path> config;  // default: config.txt next to the checkpoint
    fs::path person;
    std::optional<fs::path> person_pose;   // default: sidecar of `person`
    std::optional<fs::path> person_parse;  // default: sidecar of `person`
    fs::path garment_front;
    fs::path garment_back;
    fs::path out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
};

// Writes one PNG of the configured image size.
void cmd_sample(const SampleCommand& cmd);

struct EvalCommand {
    fs::path checkpoint;
    std::optional<fs::path> config;
    fs::path data;
    metrics::Protocol protocol = metrics::Protocol::Paired;
    std::optional<fs::path> out;  // default: the checkpoint's directory
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::size_t limit = 0;  // evaluate only the first `limit` samples; 0 = all
};

// Writes report_<protocol>.txt and .json and returns the report.
metrics::Report cmd_eval(const EvalCommand& cmd, std::ostream* progress = nullptr);

// Pose sidecar of an image: <stem>.jsonl next to it, or the dataset name
// (view_A.png -> pose_A.jsonl, garment_S.png -> pose_garment_S.jsonl).
// Throws UsageError listing the candidates when none exists.
fs::path pose_sidecar(const fs::path& image);
// <stem>.parse.png, or parse_A.png for view_A.png.
fs::path parse_sidecar(const fs::path& image);

// Seed precedence: explicit flag, then MVTRYON_SEED, then `fallback`.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback);

RunConfig checkpoint_config(const fs::path& checkpoint, const std::optional<fs::path>& config);

}  // namespace mvt::app
