#include "mvtryon/metrics/evaluate.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mvtryon/errors.hpp"

namespace mvt::metrics {

namespace {

std::string number(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace

std::string to_string(Protocol p) { return p == Protocol::Paired ? "paired" : "unpaired"; }

Protocol parse_protocol(const std::string& s) {
    if (s == "paired") return Protocol::Paired;
    if (s == "unpaired") return Protocol::Unpaired;
    throw ContractError("unknown protocol '" + s + "' (expected paired or unpaired)");
}

bool Report::all_finite() const {
    for (const auto& [_, v] : metrics)
        if (!std::isfinite(v)) return false;
    return true;
}

double Report::metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
        if (k == name) return v;
    throw ContractError("report has no metric '" + name + "'");
}

std::vector<std::size_t> garment_assignment(std::size_t n, std::uint64_t seed) {
    if (n < 2) throw ContractError("unpaired assignment needs at least two samples");
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    // Sattolo's shuffle yields one n-cycle, hence no fixed points.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(p[i], p[pick(rng)]);
    }
    return p;
}

Report evaluate(Protocol protocol, const TryOnFn& tryon, const std::vector<data::MvgSample>& samples,
                const FeatureExtractor& net, const EvalOptions& opt) {
    if (samples.empty()) throw ContractError("evaluate needs at least one sample");
    std::vector<std::size_t> wear(samples.size());
    std::iota(wear.begin(), wear.end(), 0);
    if (protocol == Protocol::Unpaired) wear = garment_assignment(samples.size(), opt.shuffle_seed);

    std::vector<Tensor> generated, real;
    double lpips = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        for (std::size_t v = 0; v < data::kNumViews; ++v) {
            data::TryOnSample t = data::make_tryon(s.views[v], s.parsing[v], s.poses[v], samples[wear[i]].garments);
            Tensor out = tryon(t);
            if (out.shape() != s.views[v].shape())
                throw DimensionError("try-on output " + shape_str(out.shape()) + " does not match " +
                                     shape_str(s.views[v].shape()));
            if (protocol == Protocol::Paired) {
                lpips += lpips_proxy(out, s.views[v], net);
                ss += ssim(out, s.views[v]);
            }
            generated.push_back(std::move(out));
            real.push_back(s.views[v]);
        }
    }
    const auto n = static_cast<double>(generated.size());
    const FeatureSet fg = extract_features(generated, net), fr = extract_features(real, net);
    const double fid = frechet_distance(fg, fr);
    const KidResult kid = kernel_distance(fg, fr, opt.kid_seed);

    Report r;
    r.protocol = protocol;
    r.info.emplace_back("images", std::to_string(generated.size()));
    if (protocol == Protocol::Paired) {
        r.metrics = {{"lpips_proxy", lpips / n}, {"ssim_proxy", ss / n}, {"fid_proxy", fid}, {"kid_proxy", kid.mean}};
        r.info.emplace_back("kid_proxy_std", number(kid.std));
    } else {
        r.metrics = {{"fidu_proxy", fid}, {"kidu_proxy", kid.mean}};
        r.info.emplace_back("kidu_proxy_std", number(kid.std));
        r.info.emplace_back("shuffle_seed", std::to_string(opt.shuffle_seed));
    }
    r.info.emplace_back("kid_seed", std::to_string(opt.kid_seed));
    r.info.emplace_back("feature_seed", std::to_string(net.seed()));
    return r;
}

std::string format_report_text(const Report& r) {
    std::ostringstream os;
    os << "protocol=" << to_string(r.protocol) << "\n";
    for (const auto& [k, v] : r.info) os << k << "=" << v << "\n";
    for (const auto& [k, v] : r.metrics) os << k << "=" << number(v) << "\n";
    return os.str();
}

std::string format_report_json(const Report& r) {
    nlohmann::ordered_json j;
    j["protocol"] = to_string(r.protocol);
    j["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.metrics) {
        if (std::isfinite(v)) j["metrics"][k] = v;
        else j["metrics"][k] = nullptr;
    }
    j["info"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.info) j["info"][k] = v;
    return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& stem, const Report& r) {
    auto put = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p);
        if (!(f << text)) throw std::runtime_error("cannot write " + p.string());
    };
    std::filesystem::path txt = stem, json = stem;
    put(txt.replace_extension(".txt"), format_report_text(r));
    put(json.replace_extension(".json"), format_report_json(r));
}

}  // namespace mvt::metrics
