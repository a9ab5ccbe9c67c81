#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "mvtryon/conditioning/garment.hpp"
#include "mvtryon/data/image_io.hpp"

namespace mvt::data {

inline constexpr std::size_t kNumViews = 5;
inline constexpr std::array<int, kNumViews> kViewAngles = {0, 45, 90, 135, 180};

// One identity seen from the five view angles, in angle order.
struct MvgSample {
    std::string id;
    std::array<Tensor, kNumViews> views;
    std::array<LabelMap, kNumViews> parsing;
    std::array<pose::PoseSkeleton, kNumViews> poses;
    cond::GarmentPair garments;

    friend bool operator==(const MvgSample&, const MvgSample&) = default;
};

struct DatasetLoad {
    std::vector<MvgSample> samples;
    std::vector<std::string> warnings;  // one per skipped sample directory
};

// root/<id>/view_<angle>.png, parse_<angle>.png, pose_<angle>.jsonl for every
// angle, plus garment_{front,back}.png and pose_garment_{front,back}.jsonl.
// Sample directories are visited in name order. A directory missing any of
// these files is skipped with a warning; any other file (dense-pose maps,
// notes) is ignored. Malformed content throws FormatError.
DatasetLoad load_dataset(const std::filesystem::path& root);
MvgSample load_sample(const std::filesystem::path& dir);

// Writes one sample directory under root in the layout above.
void write_sample(const std::filesystem::path& root, const MvgSample& sample);

// Pose files hold exactly one record.
pose::PoseSkeleton read_single_pose(const std::filesystem::path& path);

}  // namespace mvt::data
