#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mvtryon/numerics/tensor.hpp"

namespace mvt::pose {

inline constexpr std::size_t kNumKeypoints = 18;

// COCO-18 keypoint order as produced by OpenPose.
enum Joint : std::size_t {
    Nose = 0,
    Neck,
    RShoulder,
    RElbow,
    RWrist,
    LShoulder,
    LElbow,
    LWrist,
    RHip,
    RKnee,
    RAnkle,
    LHip,
    LKnee,
    LAnkle,
    REye,
    LEye,
    REar,
    LEar,
};

struct Keypoint {
    double x = 0.0;  // normalized, 0 = left image edge
    double y = 0.0;  // normalized, 0 = top image edge
    double conf = 0.0;

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

// Coordinates and confidences are clamped to [0,1] on construction and set().
// Confidence 0 marks a missing joint.
class PoseSkeleton {
   public:
    PoseSkeleton() = default;
    explicit PoseSkeleton(const std::array<Keypoint, kNumKeypoints>& kps);

    const Keypoint& operator[](std::size_t j) const { return kps_.at(j); }
    void set(std::size_t j, Keypoint kp);
    bool visible(std::size_t j) const { return kps_.at(j).conf > 0.0; }
    const std::array<Keypoint, kNumKeypoints>& keypoints() const { return kps_; }

    friend bool operator==(const PoseSkeleton&, const PoseSkeleton&) = default;

   private:
    std::array<Keypoint, kNumKeypoints> kps_{};
};

// Left/right joint pairs (right first).
const std::vector<std::pair<std::size_t, std::size_t>>& mirror_pairs();

// x -> 1 - x. With `swap_labels` left and right joints also trade places,
// which is what a horizontally flipped photo would be re-detected as.
PoseSkeleton mirror(const PoseSkeleton& s, bool swap_labels = true);

// Shifts every joint horizontally. No clamping is applied to the shift, so
// the caller keeps the skeleton inside [0,1].
PoseSkeleton translate_x(const PoseSkeleton& s, double dx);

// Connected joint pairs drawn by render_skeleton, with their RGB colours in [0,1].
struct Limb {
    std::size_t a, b;
    std::array<double, 3> rgb;
};
const std::vector<Limb>& limbs();

// Anti-aliased stick figure: each limb contributes colour * max(0, 1 - d),
// d the pixel-centre distance in pixels to the segment; channels take the max
// over limbs. Joint (x, y) maps to pixel (x * (W-1), y * (H-1)).
Tensor render_skeleton(const PoseSkeleton& s, std::size_t h, std::size_t w);

// One JSON object per line: {"keypoints": [[x, y, conf], ... 18 entries]}.
std::vector<PoseSkeleton> read_pose_jsonl(const std::filesystem::path& path);
void write_pose_jsonl(const std::filesystem::path& path, const std::vector<PoseSkeleton>& poses);
PoseSkeleton parse_pose_record(const std::string& line);
std::string format_pose_record(const PoseSkeleton& s);

}  // namespace mvt::pose
