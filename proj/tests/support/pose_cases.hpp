#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "mvtryon/pose/select.hpp"

namespace mvt::testing {

// Front-facing standing figure; the person's right side is on the image left.
inline pose::PoseSkeleton canonical_skeleton() {
    using namespace mvt::pose;
    std::array<Keypoint, kNumKeypoints> k{};
    auto put = [&](std::size_t j, double x, double y) { k[j] = {x, y, 1.0}; };
    put(Nose, 0.50, 0.12);
    put(Neck, 0.50, 0.25);
    put(RShoulder, 0.35, 0.27);
    put(RElbow, 0.28, 0.42);
    put(RWrist, 0.25, 0.56);
    put(LShoulder, 0.65, 0.27);
    put(LElbow, 0.72, 0.42);
    put(LWrist, 0.75, 0.56);
    put(RHip, 0.42, 0.58);
    put(RKnee, 0.41, 0.76);
    put(RAnkle, 0.40, 0.94);
    put(LHip, 0.58, 0.58);
    put(LKnee, 0.59, 0.76);
    put(LAnkle, 0.60, 0.94);
    put(REye, 0.47, 0.10);
    put(LEye, 0.53, 0.10);
    put(REar, 0.44, 0.11);
    put(LEar, 0.56, 0.11);
    return PoseSkeleton(k);
}

// Straight-line restatement of the arm rule, kept apart from the library.
inline pose::ViewChoice arm_rule(const pose::PoseSkeleton& s) {
    double r = 0, l = 0;
    int nr = 0, nl = 0;
    for (std::size_t j : {2u, 3u, 4u})
        if (s[j].conf > 0) r += s[j].x, ++nr;
    for (std::size_t j : {5u, 6u, 7u})
        if (s[j].conf > 0) l += s[j].x, ++nl;
    return r / nr <= l / nl ? pose::ViewChoice::Front : pose::ViewChoice::Back;
}

struct HardSelectCase {
    pose::PoseSkeleton skeleton;
    pose::ViewChoice expected;
    const char* kind;
};

// 200 skeletons: 95 random ones, their 95 horizontal flips (x -> 1 - x,
// labels kept, so the answer flips), and 10 exact ties. Random cases drop up
// to two joints per arm, never the whole arm.
inline std::vector<HardSelectCase> hard_select_suite(std::uint64_t seed = 2024) {
    using namespace mvt::pose;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    std::uniform_int_distribution<int> drop(0, 5);
    std::vector<HardSelectCase> out;
    for (int i = 0; i < 95; ++i) {
        std::array<Keypoint, kNumKeypoints> k{};
        for (auto& kp : k) kp = {u(rng), u(rng), 1.0};
        for (std::size_t arm : {2u, 5u}) {
            std::array<std::size_t, 3> order{0, 1, 2};
            std::shuffle(order.begin(), order.end(), rng);
            const int n_drop = drop(rng) % 3;
            for (int d = 0; d < n_drop; ++d) k[arm + order[d]].conf = 0.0;
        }
        PoseSkeleton s(k);
        out.push_back({s, arm_rule(s), "random"});
        PoseSkeleton m = mirror(s, false);
        out.push_back({m, arm_rule(m), "flipped"});
    }
    for (int i = 0; i < 10; ++i) {
        std::array<Keypoint, kNumKeypoints> k{};
        for (auto& kp : k) kp = {u(rng), u(rng), 1.0};
        // Identical arm x values; the y values still differ.
        for (std::size_t j = 0; j < 3; ++j) k[5 + j].x = k[2 + j].x;
        if (i % 2 == 1) k[3].conf = k[6].conf = 0.0;
        out.push_back({PoseSkeleton(k), ViewChoice::Front, "tie"});
    }
    return out;
}

}  // namespace mvt::testing
