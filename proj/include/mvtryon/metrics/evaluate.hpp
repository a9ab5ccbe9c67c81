#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mvtryon/data/agnostic.hpp"
#include "mvtryon/data/dataset.hpp"
#include "mvtryon/metrics/metrics.hpp"

namespace mvt::metrics {

enum class Protocol { Paired, Unpaired };

std::string to_string(Protocol p);
// Unknown names throw ContractError.
Protocol parse_protocol(const std::string& s);

struct Report {
    Protocol protocol = Protocol::Paired;
    std::vector<std::pair<std::string, double>> metrics;   // in report order
    std::vector<std::pair<std::string, std::string>> info;  // run facts, not metrics

    bool all_finite() const;
    double metric(const std::string& name) const;
};

// Produces the try-on image for one prepared view. The sample's garments are
// the ones to put on, which under the unpaired protocol belong to another
// identity.
using TryOnFn = std::function<Tensor(const data::TryOnSample&)>;

struct EvalOptions {
    std::uint64_t shuffle_seed = 0;
    std::uint64_t kid_seed = 0;
};

// A seeded single-cycle permutation: entry i is the identity whose garments
// sample i wears. No sample keeps its own garments. n >= 2.
std::vector<std::size_t> garment_assignment(std::size_t n, std::uint64_t seed);

// Runs every view of every sample through `tryon`.
// Paired: lpips_proxy, ssim_proxy, fid_proxy, kid_proxy against the ground truth.
// Unpaired: garments reassigned by garment_assignment; fidu_proxy, kidu_proxy
// against the real views.
Report evaluate(Protocol protocol, const TryOnFn& tryon, const std::vector<data::MvgSample>& samples,
                const FeatureExtractor& net, const EvalOptions& opt = {});

// key=value lines: protocol, info entries, metrics.
std::string format_report_text(const Report& r);
// {"protocol": ..., "metrics": {...}, "info": {...}}
std::string format_report_json(const Report& r);
// Writes <stem>.txt and <stem>.json.
void write_report(const std::filesystem::path& stem, const Report& r);

}  // namespace mvt::metrics
