#include "mvtryon/app/commands.hpp"

#include <array>
#include <iostream>

#include "mvtryon/app/infer.hpp"
#include "mvtryon/data/synth.hpp"
#include "mvtryon/errors.hpp"
#include "mvtryon/nn/checkpoint.hpp"

namespace mvt::app {

namespace {

bool non_empty_dir(const fs::path& p) { return fs::exists(p) && (!fs::is_directory(p) || !fs::is_empty(p)); }

fs::path first_existing(const fs::path& image, const std::vector<fs::path>& candidates, const char* what) {
    for (const auto& c : candidates)
        if (fs::is_regular_file(c)) return c;
    std::string msg = std::string("missing ") + what + " sidecar for " + image.string() + "; looked for";
    for (const auto& c : candidates) msg += " " + c.string();
    throw UsageError(msg);
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

nn::ParamStore load_model(const fs::path& checkpoint, const RunConfig& cfg) {
    nn::ParamStore params = diff::init_model(cfg.model, cfg.seed);
    nn::ParamStore loaded = nn::load_checkpoint(checkpoint);
    for (auto& [name, t] : params) {
        if (!loaded.contains(name))
            throw FormatError(checkpoint.string() + ": missing parameter '" + name + "' for variant " +
                              diff::to_string(cfg.model.variant));
        if (loaded.get(name).shape() != t.shape())
            throw FormatError(checkpoint.string() + ": parameter '" + name + "' has the wrong shape");
        t.storage() = loaded.get(name).storage();
    }
    return params;
}

}  // namespace

fs::path pose_sidecar(const fs::path& image) {
    const fs::path dir = image.parent_path();
    const std::string stem = image.stem().string();
    std::vector<fs::path> c{dir / (stem + ".jsonl")};
    if (starts_with(stem, "view_")) c.push_back(dir / ("pose_" + stem.substr(5) + ".jsonl"));
    if (starts_with(stem, "garment_")) c.push_back(dir / ("pose_" + stem + ".jsonl"));
    return first_existing(image, c, "pose");
}

fs::path parse_sidecar(const fs::path& image) {
    const fs::path dir = image.parent_path();
    const std::string stem = image.stem().string();
    std::vector<fs::path> c{dir / (stem + ".parse.png")};
    if (starts_with(stem, "view_")) c.push_back(dir / ("parse_" + stem.substr(5) + ".png"));
    return first_existing(image, c, "parsing");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
    if (flag) return *flag;
    std::uint64_t s = fallback;
    env_seed(s);
    return s;
}

RunConfig checkpoint_config(const fs::path& checkpoint, const std::optional<fs::path>& config) {
    const fs::path path = config ? *config : checkpoint.parent_path() / "config.txt";
    if (!fs::is_regular_file(path))
        throw UsageError("no run config for " + checkpoint.string() + " (looked for " + path.string() +
                         "; pass --config)");
    RunConfig cfg;
    apply_config_file(cfg, path);
    cfg.validate();
    return cfg;
}

void cmd_synth(const SynthCommand& cmd) {
    if (cmd.count == 0) throw UsageError("--count must be at least 1");
    if (non_empty_dir(cmd.out)) throw UsageError("refusing to write into non-empty " + cmd.out.string());
    fs::create_directories(cmd.out);
    for (const auto& s : data::synth_generate(cmd.seed, cmd.count, {cmd.h, cmd.w})) data::write_sample(cmd.out, s);
}

TrainSummary cmd_train(const TrainCommand& cmd, std::ostream* progress) {
    std::vector<std::string> overrides = cmd.overrides;
    if (cmd.seed) overrides.push_back("seed=" + std::to_string(*cmd.seed));
    overrides.push_back("data=" + cmd.data.string());
    overrides.push_back("out=" + cmd.out.string());
    const fs::path* file = cmd.config ? &*cmd.config : nullptr;
    RunConfig cfg = resolve_config(file, overrides);

    if (!cmd.resume && non_empty_dir(cmd.out))
        throw UsageError("output directory " + cmd.out.string() + " is not empty (use --resume to continue a run)");
    data::DatasetLoad ds = data::load_dataset(cmd.data);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
    if (ds.samples.empty()) throw UsageError("no usable samples under " + cmd.data.string());
    if (progress) *progress << "loaded " << ds.samples.size() << " samples\n";
    Trainer trainer(cfg, std::move(ds.samples));
    return run_training(trainer, cmd.out, cmd.resume, progress);
}

void cmd_sample(const SampleCommand& cmd) {
    const RunConfig cfg = checkpoint_config(cmd.checkpoint, cmd.config);
    const fs::path pose_path = cmd.person_pose ? *cmd.person_pose : pose_sidecar(cmd.person);
    const fs::path parse_path = cmd.person_parse ? *cmd.person_parse : parse_sidecar(cmd.person);

    cond::GarmentPair garments;
    garments.front_image = data::read_png(cmd.garment_front);
    garments.back_image = data::read_png(cmd.garment_back);
    garments.front_pose = data::read_single_pose(pose_sidecar(cmd.garment_front));
    garments.back_pose = data::read_single_pose(pose_sidecar(cmd.garment_back));
    const Tensor person = data::read_png(cmd.person);
    const Shape want{3, cfg.model.image_h, cfg.model.image_w};
    const std::array<const Tensor*, 3> inputs{&person, &garments.front_image, &garments.back_image};
    for (const Tensor* t : inputs)
        if (t->shape() != want)
            throw UsageError("input image " + shape_str(t->shape()) + " does not match the model size " + shape_str(want));

    const data::TryOnSample sample =
        data::make_tryon(person, data::read_labels(parse_path), data::read_single_pose(pose_path), garments);
    nn::ParamStore params = load_model(cmd.checkpoint, cfg);
    const Tensor out = generate_tryon(cfg.model, params, cfg.schedule(), sample,
                                      cmd.steps.value_or(cfg.sample_steps), resolve_seed(cmd.seed, 0));
    if (!out.all_finite()) throw NumericError("sampler produced non-finite pixels");
    if (!cmd.out.parent_path().empty()) fs::create_directories(cmd.out.parent_path());
    data::write_png(cmd.out, out);
}

metrics::Report cmd_eval(const EvalCommand& cmd, std::ostream* progress) {
    const RunConfig cfg = checkpoint_config(cmd.checkpoint, cmd.config);
    data::DatasetLoad ds = data::load_dataset(cmd.data);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
    if (cmd.limit && ds.samples.size() > cmd.limit) ds.samples.resize(cmd.limit);
    if (ds.samples.empty()) throw UsageError("no usable samples under " + cmd.data.string());

    nn::ParamStore params = load_model(cmd.checkpoint, cfg);
    const diff::NoiseSchedule sched = cfg.schedule();
    const std::size_t steps = cmd.steps.value_or(cfg.sample_steps);
    const std::uint64_t seed = resolve_seed(cmd.seed, 0);
    std::uint64_t index = 0;
    auto tryon = [&](const data::TryOnSample& s) {
        Tensor out = generate_tryon(cfg.model, params, sched, s, steps, nn::mix_seed(seed, index++));
        if (progress && index % 20 == 0) *progress << "generated " << index << " images" << std::endl;
        return out;
    };
    metrics::EvalOptions opt;
    opt.shuffle_seed = seed;
    opt.kid_seed = seed;
    metrics::Report report = metrics::evaluate(cmd.protocol, tryon, ds.samples, loss::PerceptualNet(cfg.perceptual_seed), opt);
    report.info.emplace_back("checkpoint", cmd.checkpoint.string());
    report.info.emplace_back("sample_seed", std::to_string(seed));
    report.info.emplace_back("sample_steps", std::to_string(steps));

    const fs::path dir = cmd.out ? *cmd.out : cmd.checkpoint.parent_path();
    fs::create_directories(dir);
    metrics::write_report(dir / ("report_" + metrics::to_string(cmd.protocol)), report);
    return report;
}

}  // namespace mvt::app
