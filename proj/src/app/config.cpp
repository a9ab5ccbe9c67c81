#include "mvtryon/app/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mvtryon/errors.hpp"

namespace mvt::app {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw UsageError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out))
        throw UsageError("config key '" + key + "': expected a finite number, got '" + v + "'");
    return out;
}

// Shortest text that reads back to the same double.
std::string real_str(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general);
    (void)ec;
    return std::string(buf, end);
}

struct Field {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <class T>
Field size_field(T RunConfig::*m) {
    return {[m](const RunConfig& c) { return std::to_string(c.*m); },
            [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = static_cast<T>(parse_uint(k, v)); }};
}

Field model_size(std::size_t diff::ModelConfig::*m) {
    return {[m](const RunConfig& c) { return std::to_string(c.model.*m); },
            [m](RunConfig& c, const std::string& k, const std::string& v) { c.model.*m = parse_uint(k, v); }};
}

template <class Getter>
Field real_field(Getter g) {
    return {[g](const RunConfig& c) { return real_str(g(const_cast<RunConfig&>(c))); },
            [g](RunConfig& c, const std::string& k, const std::string& v) { g(c) = parse_real(k, v); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> f = {
        {"image_h", model_size(&diff::ModelConfig::image_h)},
        {"image_w", model_size(&diff::ModelConfig::image_w)},
        {"width", model_size(&diff::ModelConfig::width)},
        {"global_dim", model_size(&diff::ModelConfig::global_dim)},
        {"pose_dim", model_size(&diff::ModelConfig::pose_dim)},
        {"local_dim", model_size(&diff::ModelConfig::local_dim)},
        {"local_levels", size_field(&RunConfig::local_levels)},
        {"variant",
         {[](const RunConfig& c) { return diff::to_string(c.model.variant); },
          [](RunConfig& c, const std::string&, const std::string& v) { c.model.variant = diff::parse_variant(v); }}},
        {"timesteps", size_field(&RunConfig::timesteps)},
        {"beta_start", real_field([](RunConfig& c) -> double& { return c.beta_start; })},
        {"beta_end", real_field([](RunConfig& c) -> double& { return c.beta_end; })},
        {"sample_steps", size_field(&RunConfig::sample_steps)},
        {"lambda_l1", real_field([](RunConfig& c) -> double& { return c.loss.lambda_l1; })},
        {"lambda_perc", real_field([](RunConfig& c) -> double& { return c.loss.lambda_perc; })},
        {"perceptual_seed", size_field(&RunConfig::perceptual_seed)},
        {"lr", real_field([](RunConfig& c) -> double& { return c.optim.lr; })},
        {"adam_beta1", real_field([](RunConfig& c) -> double& { return c.optim.beta1; })},
        {"adam_beta2", real_field([](RunConfig& c) -> double& { return c.optim.beta2; })},
        {"adam_eps", real_field([](RunConfig& c) -> double& { return c.optim.eps; })},
        {"weight_decay", real_field([](RunConfig& c) -> double& { return c.optim.weight_decay; })},
        {"clip_norm", real_field([](RunConfig& c) -> double& { return c.optim.clip_norm; })},
        {"batch_size", size_field(&RunConfig::batch_size)},
        {"epochs", size_field(&RunConfig::epochs)},
        {"max_steps", size_field(&RunConfig::max_steps)},
        {"seed", size_field(&RunConfig::seed)},
        {"data",
         {[](const RunConfig& c) { return c.data; },
          [](RunConfig& c, const std::string&, const std::string& v) { c.data = v; }}},
        {"out",
         {[](const RunConfig& c) { return c.out; },
          [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }}},
    };
    return f;
}

const Field& field(const std::string& key) {
    for (const auto& [k, f] : fields())
        if (k == key) return f;
    throw UsageError("unknown config key '" + key + "'");
}

}  // namespace

diff::NoiseSchedule RunConfig::schedule() const { return diff::make_schedule(timesteps, beta_start, beta_end); }

void RunConfig::validate() const {
    auto bad = [](const std::string& key, const std::string& why) { throw UsageError("config key '" + key + "': " + why); };
    try {
        model.validate();
    } catch (const ContractError& e) {
        throw UsageError(std::string("model size: ") + e.what());
    }
    if (model.width == 0 || model.global_dim == 0 || model.pose_dim == 0 || model.local_dim == 0)
        bad("width", "model widths must be positive");
    if (model.width % 2) bad("width", "must be even");
    if (local_levels != 2) bad("local_levels", "the backbone attends at exactly two scales");
    if (timesteps == 0) bad("timesteps", "must be positive");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) bad("beta_start", "need 0 < beta_start <= beta_end < 1");
    if (sample_steps == 0 || sample_steps > timesteps) bad("sample_steps", "must lie in [1, timesteps]");
    if (loss.lambda_l1 < 0.0) bad("lambda_l1", "must be non-negative");
    if (loss.lambda_perc < 0.0) bad("lambda_perc", "must be non-negative");
    if (optim.lr < 0.0) bad("lr", "must be non-negative");
    if (!(optim.beta1 >= 0.0 && optim.beta1 < 1.0)) bad("adam_beta1", "must lie in [0, 1)");
    if (!(optim.beta2 >= 0.0 && optim.beta2 < 1.0)) bad("adam_beta2", "must lie in [0, 1)");
    if (optim.eps <= 0.0) bad("adam_eps", "must be positive");
    if (optim.weight_decay < 0.0) bad("weight_decay", "must be non-negative");
    if (optim.clip_norm < 0.0) bad("clip_norm", "must be non-negative");
    if (batch_size == 0) bad("batch_size", "must be positive");
    if (epochs == 0) bad("epochs", "must be positive");
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : fields()) keys.push_back(k);
    return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    try {
        field(key).set(cfg, key, value);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError("config key '" + key + "': " + e.what());
    }
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) { return field(key).get(cfg); }

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        try {
            set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const UsageError& e) {
            throw UsageError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    apply_config_text(cfg, ss.str(), path.string());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw UsageError("override '" + assignment + "' is not key=value");
    set_config_value(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string format_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& [k, f] : fields()) out += k + "=" + f.get(cfg) + "\n";
    return out;
}

void write_config(const std::filesystem::path& path, const RunConfig& cfg) {
    std::ofstream f(path);
    if (!(f << format_config(cfg))) throw std::runtime_error("cannot write " + path.string());
}

bool env_seed(std::uint64_t& seed) {
    const char* v = std::getenv("MVTRYON_SEED");
    if (!v || !*v) return false;
    seed = parse_uint("MVTRYON_SEED", v);
    return true;
}

RunConfig resolve_config(const std::filesystem::path* file, const std::vector<std::string>& overrides) {
    RunConfig cfg;
    env_seed(cfg.seed);
    if (file) apply_config_file(cfg, *file);
    for (const auto& o : overrides) apply_override(cfg, o);
    cfg.validate();
    return cfg;
}

}  // namespace mvt::app
