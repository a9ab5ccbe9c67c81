#include "mvtryon/pose/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mvtryon/errors.hpp"

namespace mvt::pose {
namespace {

Keypoint clamped(Keypoint k) {
    if (!std::isfinite(k.x) || !std::isfinite(k.y) || !std::isfinite(k.conf))
        throw FormatError("non-finite keypoint value");
    k.x = std::clamp(k.x, 0.0, 1.0);
    k.y = std::clamp(k.y, 0.0, 1.0);
    k.conf = std::clamp(k.conf, 0.0, 1.0);
    return k;
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

}  // namespace

PoseSkeleton::PoseSkeleton(const std::array<Keypoint, kNumKeypoints>& kps) {
    for (std::size_t j = 0; j < kNumKeypoints; ++j) kps_[j] = clamped(kps[j]);
}

void PoseSkeleton::set(std::size_t j, Keypoint kp) { kps_.at(j) = clamped(kp); }

const std::vector<std::pair<std::size_t, std::size_t>>& mirror_pairs() {
    static const std::vector<std::pair<std::size_t, std::size_t>> pairs{
        {RShoulder, LShoulder}, {RElbow, LElbow}, {RWrist, LWrist}, {RHip, LHip},
        {RKnee, LKnee},         {RAnkle, LAnkle}, {REye, LEye},     {REar, LEar}};
    return pairs;
}

PoseSkeleton mirror(const PoseSkeleton& s, bool swap_labels) {
    auto kps = s.keypoints();
    for (auto& k : kps) k.x = 1.0 - k.x;
    if (swap_labels)
        for (auto [r, l] : mirror_pairs()) std::swap(kps[r], kps[l]);
    return PoseSkeleton(kps);
}

PoseSkeleton translate_x(const PoseSkeleton& s, double dx) {
    auto kps = s.keypoints();
    for (auto& k : kps) k.x += dx;
    return PoseSkeleton(kps);
}

const std::vector<Limb>& limbs() {
    // OpenPose body-18 connectivity and palette.
    static const std::vector<Limb> table = [] {
        const std::vector<std::pair<std::size_t, std::size_t>> pairs{
            {Neck, RShoulder}, {Neck, LShoulder}, {RShoulder, RElbow}, {RElbow, RWrist}, {LShoulder, LElbow},
            {LElbow, LWrist},  {Neck, RHip},      {RHip, RKnee},       {RKnee, RAnkle},  {Neck, LHip},
            {LHip, LKnee},     {LKnee, LAnkle},   {Neck, Nose},        {Nose, REye},     {REye, REar},
            {Nose, LEye},      {LEye, LEar}};
        const int palette[17][3] = {{255, 0, 0},   {255, 85, 0},  {255, 170, 0}, {255, 255, 0}, {170, 255, 0},
                                    {85, 255, 0},  {0, 255, 0},   {0, 255, 85},  {0, 255, 170}, {0, 255, 255},
                                    {0, 170, 255}, {0, 85, 255},  {0, 0, 255},   {85, 0, 255},  {170, 0, 255},
                                    {255, 0, 255}, {255, 0, 170}};
        std::vector<Limb> out;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            out.push_back({pairs[i].first, pairs[i].second,
                           {palette[i][0] / 255.0, palette[i][1] / 255.0, palette[i][2] / 255.0}});
        return out;
    }();
    return table;
}

Tensor render_skeleton(const PoseSkeleton& s, std::size_t h, std::size_t w) {
    if (h < 8 || w < 8 || h % 8 != 0 || w % 8 != 0)
        throw ContractError("skeleton raster " + std::to_string(h) + "x" + std::to_string(w) +
                            " must be at least 8 and divisible by 8");
    Tensor out({3, h, w});
    const double sx = static_cast<double>(w - 1), sy = static_cast<double>(h - 1);
    for (const Limb& limb : limbs()) {
        if (!s.visible(limb.a) || !s.visible(limb.b)) continue;
        const double ax = s[limb.a].x * sx, ay = s[limb.a].y * sy;
        const double bx = s[limb.b].x * sx, by = s[limb.b].y * sy;
        // Only pixels within one pixel of the segment can be lit.
        const auto lo_x = static_cast<long>(std::floor(std::min(ax, bx) - 1.0));
        const auto hi_x = static_cast<long>(std::ceil(std::max(ax, bx) + 1.0));
        const auto lo_y = static_cast<long>(std::floor(std::min(ay, by) - 1.0));
        const auto hi_y = static_cast<long>(std::ceil(std::max(ay, by) + 1.0));
        for (long y = std::max(0L, lo_y); y <= std::min<long>(hi_y, h - 1); ++y)
            for (long x = std::max(0L, lo_x); x <= std::min<long>(hi_x, w - 1); ++x) {
                const double a = 1.0 - segment_distance(x, y, ax, ay, bx, by);
                if (a <= 0.0) continue;
                for (std::size_t c = 0; c < 3; ++c) {
                    double& px = out.at(c, y, x);
                    px = std::max(px, a * limb.rgb[c]);
                }
            }
    }
    return out;
}

PoseSkeleton parse_pose_record(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("pose record is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("keypoints") || !j["keypoints"].is_array())
        throw FormatError("pose record lacks a \"keypoints\" array");
    const auto& arr = j["keypoints"];
    if (arr.size() != kNumKeypoints)
        throw FormatError("pose record has " + std::to_string(arr.size()) + " keypoints, expected 18");
    std::array<Keypoint, kNumKeypoints> kps;
    for (std::size_t i = 0; i < kNumKeypoints; ++i) {
        const auto& t = arr[i];
        if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number() || !t[2].is_number())
            throw FormatError("keypoint " + std::to_string(i) + " is not an [x, y, conf] triple");
        kps[i] = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
    }
    return PoseSkeleton(kps);
}

std::string format_pose_record(const PoseSkeleton& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& k : s.keypoints()) arr.push_back({k.x, k.y, k.conf});
    return nlohmann::json{{"keypoints", arr}}.dump();
}

std::vector<PoseSkeleton> read_pose_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<PoseSkeleton> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_pose_record(line));
        } catch (const FormatError& e) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_pose_jsonl(const std::filesystem::path& path, const std::vector<PoseSkeleton>& poses) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const auto& p : poses) out << format_pose_record(p) << '\n';
}

}  // namespace mvt::pose
