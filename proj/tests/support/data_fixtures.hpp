#pragma once

// A hand-built two-identity dataset at 16x16, independent of the generator.

#include <fstream>

#include "mvtryon/data/dataset.hpp"

namespace mvt::testing {

inline pose::PoseSkeleton fixture_pose(double shift) {
    std::array<pose::Keypoint, pose::kNumKeypoints> kps{};
    for (std::size_t j = 0; j < pose::kNumKeypoints; ++j)
        kps[j] = {0.1 + 0.04 * static_cast<double>(j) + shift, 0.05 * static_cast<double>(j), 1.0};
    return pose::PoseSkeleton(kps);
}

// Pixel value from a byte so the PNG round trip is exact.
inline Tensor fixture_image(std::size_t seed) {
    Tensor t({3, 16, 16});
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = data::byte_to_unit(static_cast<std::uint8_t>((i * 7 + seed * 31) % 256));
    return t;
}

inline data::MvgSample fixture_sample(const std::string& id, std::size_t seed) {
    data::MvgSample s;
    s.id = id;
    for (std::size_t v = 0; v < data::kNumViews; ++v) {
        s.views[v] = fixture_image(seed * 10 + v);
        s.parsing[v] = data::make_label_map(16, 16);
        for (std::size_t y = 4; y < 12; ++y)
            for (std::size_t x = 5; x < 11; ++x) s.parsing[v].at(y, x) = data::UpperGarment;
        s.parsing[v].at(0, v) = data::Hair;
        s.poses[v] = fixture_pose(0.01 * static_cast<double>(v));
    }
    s.garments.front_image = fixture_image(seed * 10 + 7);
    s.garments.back_image = fixture_image(seed * 10 + 8);
    s.garments.front_pose = fixture_pose(0.0);
    s.garments.back_pose = fixture_pose(0.02);
    return s;
}

inline void touch(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

}  // namespace mvt::testing
