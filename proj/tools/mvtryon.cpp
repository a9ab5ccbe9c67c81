// mvtryon synth|train|sample|eval
// Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>
#include <iostream>

#include "mvtryon/app/commands.hpp"
#include "mvtryon/errors.hpp"

namespace {

template <class T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
    app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace mvt;
    CLI::App app{"Multi-view virtual try-on with a toy latent-diffusion inpainting model"};
    app.require_subcommand(1);

    app::SynthCommand synth;
    std::optional<std::uint64_t> synth_seed;
    auto* s = app.add_subcommand("synth", "Generate a procedural multi-view dataset");
    optional_flag(s, "--seed", synth_seed, "Generator seed (default: MVTRYON_SEED, else 0)");
    s->add_option("--count", synth.count, "Number of identities")->required();
    s->add_option("--out", synth.out, "Output dataset directory (must be empty or absent)")->required();
    s->add_option("--height", synth.h, "Image height")->capture_default_str();
    s->add_option("--width", synth.w, "Image width")->capture_default_str();

    app::TrainCommand train;
    auto* t = app.add_subcommand("train", "Train a denoiser");
    optional_flag(t, "--config", train.config, "key=value run config");
    t->add_option("--data", train.data, "Dataset root")->required();
    t->add_option("--out", train.out, "Run directory for config, loss log and checkpoints")->required();
    optional_flag(t, "--seed", train.seed, "Global seed (overrides config and MVTRYON_SEED)");
    t->add_option("--set", train.overrides, "Config override key=value (repeatable)");
    optional_flag(t, "--resume", train.resume, "Checkpoint to resume from (its .optim file is read too)");

    app::SampleCommand sample;
    auto* p = app.add_subcommand("sample", "Dress one person image");
    p->add_option("--checkpoint", sample.checkpoint, "Model checkpoint")->required();
    optional_flag(p, "--config", sample.config, "Run config (default: config.txt beside the checkpoint)");
    p->add_option("--person", sample.person, "Person image; its pose and parsing sidecars are read too")->required();
    optional_flag(p, "--pose", sample.person_pose, "Person pose JSONL (overrides the sidecar)");
    optional_flag(p, "--parse", sample.person_parse, "Person parsing PNG (overrides the sidecar)");
    p->add_option("--garment-front", sample.garment_front, "Front garment image")->required();
    p->add_option("--garment-back", sample.garment_back, "Back garment image")->required();
    p->add_option("--out", sample.out, "Output PNG")->required();
    optional_flag(p, "--seed", sample.seed, "Sampler seed (default: MVTRYON_SEED, else 0)");
    optional_flag(p, "--steps", sample.steps, "DDIM steps (default: sample_steps from the config)");

    app::EvalCommand eval;
    std::string protocol;
    auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
    e->add_option("--checkpoint", eval.checkpoint, "Model checkpoint")->required();
    optional_flag(e, "--config", eval.config, "Run config (default: config.txt beside the checkpoint)");
    e->add_option("--data", eval.data, "Dataset root")->required();
    e->add_option("--protocol", protocol, "paired or unpaired")
        ->required()
        ->check(CLI::IsMember({"paired", "unpaired"}));
    optional_flag(e, "--out", eval.out, "Report directory (default: the checkpoint's directory)");
    optional_flag(e, "--seed", eval.seed, "Sampling and shuffle seed (default: MVTRYON_SEED, else 0)");
    optional_flag(e, "--steps", eval.steps, "DDIM steps (default: sample_steps from the config)");
    e->add_option("--limit", eval.limit, "Only the first N samples (0 = all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*s) {
            synth.seed = app::resolve_seed(synth_seed, 0);
            app::cmd_synth(synth);
            std::cout << "wrote " << synth.count << " samples to " << synth.out.string() << "\n";
        } else if (*t) {
            auto summary = app::cmd_train(train, &std::cout);
            std::cout << "trained to step " << summary.steps << "; final checkpoint "
                      << summary.final_checkpoint.string() << "\n";
        } else if (*p) {
            app::cmd_sample(sample);
            std::cout << "wrote " << sample.out.string() << "\n";
        } else if (*e) {
            eval.protocol = metrics::parse_protocol(protocol);
            const metrics::Report r = app::cmd_eval(eval, &std::cerr);
            std::cout << metrics::format_report_text(r);
            if (!r.all_finite()) {
                std::cerr << "error: a metric is not finite\n";
                return 1;
            }
        }
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
