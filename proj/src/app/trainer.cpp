#include "mvtryon/app/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "mvtryon/data/agnostic.hpp"
#include "mvtryon/diffusion/prewarp.hpp"
#include "mvtryon/diffusion/schedule.hpp"
#include "mvtryon/errors.hpp"
#include "mvtryon/nn/checkpoint.hpp"
#include "mvtryon/numerics/ops.hpp"

namespace mvt::app {

namespace fs = std::filesystem;

std::uint64_t step_seed(std::uint64_t global_seed, std::uint64_t step) { return nn::mix_seed(global_seed, step); }

Trainer::Trainer(const RunConfig& cfg, std::vector<data::MvgSample> samples)
    : cfg_(cfg),
      samples_(std::move(samples)),
      sched_(cfg.schedule()),
      perceptual_(cfg.perceptual_seed),
      params_(diff::init_model(cfg.model, cfg.seed)),
      optim_(cfg.optim) {
    cfg_.validate();
    if (samples_.empty()) throw ContractError("training needs at least one sample");
    const Shape img{3, cfg_.model.image_h, cfg_.model.image_w};
    for (const auto& s : samples_)
        for (const auto& v : s.views)
            if (v.shape() != img)
                throw ContractError("sample " + s.id + " has images " + shape_str(v.shape()) + ", config expects " +
                                    shape_str(img));
}

std::size_t Trainer::steps_per_epoch() const {
    const std::size_t views = samples_.size() * data::kNumViews;
    return (views + cfg_.batch_size - 1) / cfg_.batch_size;
}

std::uint64_t Trainer::total_steps() const {
    return cfg_.max_steps ? cfg_.max_steps : static_cast<std::uint64_t>(cfg_.epochs) * steps_per_epoch();
}

StepRecord Trainer::step() {
    const std::uint64_t k = steps_done() + 1;
    const std::uint64_t seed = step_seed(cfg_.seed, k);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_sample(0, samples_.size() - 1), pick_view(0, data::kNumViews - 1),
        pick_t(1, sched_.steps());
    std::normal_distribution<double> normal;

    StepRecord rec;
    rec.step = k;
    const double inv_batch = 1.0 / static_cast<double>(cfg_.batch_size);
    std::ostringstream batch;
    params_.zero_grad();
    for (std::size_t b = 0; b < cfg_.batch_size; ++b) {
        const std::size_t si = pick_sample(rng), vi = pick_view(rng), t = pick_t(rng);
        const data::MvgSample& s = samples_[si];
        batch << " " << s.id << "/view_" << data::kViewAngles[vi] << "@t=" << t;

        const data::TryOnSample ts = data::make_tryon(s.views[vi], s.parsing[vi], s.poses[vi], s.garments);
        const Tensor known =
            diff::paste_prewarp(ts.masked, ts.garments, diff::model_choice(cfg_.model, ts.pose), ts.latent_mask);
        Tensor eps(ts.target.shape());
        for (auto& v : eps.storage()) v = normal(rng);
        const Tensor zt = diff::forward_diffuse(ts.target, t, eps, sched_);

        Tape tape;
        nn::Binder bind(tape, params_);
        const diff::BackboneConditions cond = diff::encode_conditions(bind, cfg_.model, ts.garments, ts.pose);
        Var eps_hat = diff::model_predict(bind, cfg_.model, diff::assemble_input(zt, known, ts.latent_mask), t, cond);
        Var x_hat = diff::reconstruct_x0(tape.constant(zt), eps_hat, t, sched_);
        Var x0 = tape.constant(ts.target);
        Var ldm = loss::ldm_loss(tape.constant(eps), eps_hat);
        Var l1 = loss::l1_loss(x_hat, x0);
        Var perc = loss::perceptual_loss(x_hat, x0, perceptual_);
        Var total = loss::total_loss(ldm, l1, perc, cfg_.loss);

        const double tv = total.value().item();
        if (!std::isfinite(tv)) {
            std::ostringstream msg;
            msg << "non-finite loss at step " << k << " (batch seed " << seed << ", items" << batch.str() << ")";
            if (dump_dir_) {
                fs::create_directories(*dump_dir_);
                std::ofstream f(*dump_dir_ / "nan_dump.txt");
                f << "step=" << k << "\nbatch_seed=" << seed << "\nglobal_seed=" << cfg_.seed << "\nitems="
                  << batch.str().substr(1) << "\nldm=" << ldm.value().item() << "\nl1=" << l1.value().item()
                  << "\nperc=" << perc.value().item() << "\n";
                msg << "; dump in " << (*dump_dir_ / "nan_dump.txt").string();
            }
            throw NumericError(msg.str());
        }
        tape.backward(scale(total, inv_batch));
        rec.total += inv_batch * tv;
        rec.ldm += inv_batch * ldm.value().item();
        rec.l1 += inv_batch * l1.value().item();
        rec.perc += inv_batch * perc.value().item();
    }
    optim_.step(params_);
    return rec;
}

void Trainer::save(const fs::path& path) const {
    nn::save_checkpoint(params_, path);
    optim_.save_state(optimizer_state_path(path));
}

void Trainer::resume(const fs::path& path) {
    nn::ParamStore loaded = nn::load_checkpoint(path);
    for (auto& [name, t] : params_) {
        if (!loaded.contains(name)) throw FormatError(path.string() + ": missing parameter '" + name + "'");
        const Tensor& src = loaded.get(name);
        if (src.shape() != t.shape())
            throw FormatError(path.string() + ": parameter '" + name + "' has shape " + shape_str(src.shape()) +
                              ", model expects " + shape_str(t.shape()));
        t.storage() = src.storage();
    }
    if (loaded.size() != params_.size()) throw FormatError(path.string() + ": checkpoint has extra parameters");
    optim_.load_state(optimizer_state_path(path));
}

fs::path optimizer_state_path(const fs::path& checkpoint) {
    fs::path p = checkpoint;
    p += ".optim";
    return p;
}

fs::path epoch_checkpoint(const fs::path& out, std::size_t epoch) {
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%04zu.ckpt", epoch);
    return out / name;
}

namespace {

std::string log_line(const StepRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%llu %.17g %.17g %.17g %.17g", static_cast<unsigned long long>(r.step), r.total,
                  r.ldm, r.l1, r.perc);
    return buf;
}

constexpr const char* kLogHeader = "step total ldm l1 perc";

// Keeps the header and the first `steps` records.
void truncate_log(const fs::path& path, std::uint64_t steps) {
    std::vector<std::string> kept;
    {
        std::ifstream in(path);
        std::string line;
        if (in && std::getline(in, line)) kept.push_back(line);
        while (kept.size() <= steps && std::getline(in, line)) kept.push_back(line);
    }
    std::ofstream out(path, std::ios::trunc);
    if (kept.empty()) out << kLogHeader << "\n";
    for (const auto& l : kept) out << l << "\n";
}

}  // namespace

TrainSummary run_training(Trainer& trainer, const fs::path& out, const std::optional<fs::path>& resume,
                          std::ostream* progress) {
    fs::create_directories(out);
    trainer.set_dump_dir(out);
    const fs::path log_path = out / "loss.log";
    if (resume) {
        trainer.resume(*resume);
        truncate_log(log_path, trainer.steps_done());
    } else {
        std::ofstream(log_path, std::ios::trunc) << kLogHeader << "\n";
    }
    write_config(out / "config.txt", trainer.config());

    TrainSummary summary;
    std::ofstream log(log_path, std::ios::app);
    const std::uint64_t total = trainer.total_steps();
    const std::size_t per_epoch = trainer.steps_per_epoch();
    while (trainer.steps_done() < total) {
        const StepRecord r = trainer.step();
        log << log_line(r) << "\n";
        summary.records.push_back(r);
        const bool epoch_end = r.step % per_epoch == 0;
        if (epoch_end || r.step == total) {
            log.flush();
            trainer.save(epoch_checkpoint(out, static_cast<std::size_t>((r.step + per_epoch - 1) / per_epoch)));
        }
        if (progress && (r.step % 100 == 0 || r.step == total))
            *progress << "step " << r.step << "/" << total << " loss " << r.total << std::endl;
    }
    log.flush();
    summary.steps = trainer.steps_done();
    summary.final_checkpoint = out / "final.ckpt";
    trainer.save(summary.final_checkpoint);
    return summary;
}

}  // namespace mvt::app
