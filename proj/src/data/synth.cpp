#include "mvtryon/data/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "mvtryon/errors.hpp"
#include "mvtryon/nn/params.hpp"

namespace mvt::data {

namespace {

using Rgb = std::array<double, 3>;

// cos of each view angle, with the side view an exact tie.
constexpr std::array<double, kNumViews> kFacing = {1.0, 0.70710678118654752, 0.0, -0.70710678118654752, -1.0};

struct Identity {
    Rgb background, skin, hair, lower;
    std::array<Rgb, 2> front_colors, back_colors;
    double front_period, back_period;
    double cx;           // pixels
    double torso_half;   // pixels, at the frontal view
};

Rgb scaled(const Rgb& c, double s) { return {c[0] * s, c[1] * s, c[2] * s}; }

Identity draw_identity(std::mt19937_64& rng, std::size_t h, std::size_t w) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Identity id;
    const double g = 0.15 + 0.2 * u(rng);
    id.background = {g, g + 0.05 * u(rng), g + 0.05 * u(rng)};
    id.skin = {0.8 + 0.15 * u(rng), 0.6 + 0.1 * u(rng), 0.45 + 0.1 * u(rng)};
    id.hair = {0.05 + 0.15 * u(rng), 0.04 + 0.1 * u(rng), 0.03 + 0.05 * u(rng)};
    id.lower = {0.1 + 0.1 * u(rng), 0.1 + 0.15 * u(rng), 0.3 + 0.2 * u(rng)};
    // Warm front, cool back: every front colour differs from every back colour.
    const Rgb warm = {0.8 + 0.2 * u(rng), 0.2 + 0.5 * u(rng), 0.1 + 0.2 * u(rng)};
    const Rgb cool = {0.1 + 0.2 * u(rng), 0.3 + 0.4 * u(rng), 0.7 + 0.3 * u(rng)};
    id.front_colors = {warm, scaled(warm, 0.55)};
    id.back_colors = {cool, scaled(cool, 0.55)};
    id.front_period = 6.0 + 6.0 * u(rng);
    id.back_period = 8.0 + 8.0 * u(rng);
    id.cx = 0.5 * static_cast<double>(w) + 4.0 * (u(rng) - 0.5);
    id.torso_half = static_cast<double>(w) * (0.2 + 0.04 * u(rng));
    (void)h;
    return id;
}

double quantize(double unit01) { return byte_to_unit(unit_to_byte(2.0 * unit01 - 1.0)); }

// Front: horizontal stripes. Back: checkerboard.
Tensor garment_image(const Identity& id, bool back, std::size_t h, std::size_t w) {
    Tensor img({3, h, w});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            std::size_t k;
            if (!back) {
                k = static_cast<std::size_t>(std::floor(static_cast<double>(y) / id.front_period)) % 2;
            } else {
                const auto a = static_cast<std::size_t>(std::floor(static_cast<double>(y) / id.back_period));
                const auto b = static_cast<std::size_t>(std::floor(static_cast<double>(x) / id.back_period));
                k = (a + b) % 2;
            }
            const Rgb& c = back ? id.back_colors[k] : id.front_colors[k];
            for (std::size_t ch = 0; ch < 3; ++ch) img.at(ch, y, x) = quantize(c[ch]);
        }
    return img;
}

struct Geometry {
    double head_cy, head_r;
    double torso_y0, torso_y1, torso_x0, torso_x1;
    double arm_half, arm_y0, arm_y1, arm_right_x, arm_left_x;
    double lower_y1, lower_x0, lower_x1;
};

Geometry layout(const Identity& id, double facing, std::size_t h) {
    const auto H = static_cast<double>(h);
    Geometry g;
    g.head_r = 0.085 * H;
    g.head_cy = 0.13 * H;
    const double half = id.torso_half * (0.65 + 0.35 * std::abs(facing));
    g.torso_y0 = 0.23 * H;
    g.torso_y1 = 0.60 * H;
    g.torso_x0 = id.cx - half;
    g.torso_x1 = id.cx + half;
    g.arm_half = 0.04 * H * 0.75;
    g.arm_y0 = g.torso_y0 + 1.0;
    g.arm_y1 = 0.58 * H;
    const double offset = facing * (id.torso_half + g.arm_half + 1.0);
    g.arm_right_x = id.cx - offset;
    g.arm_left_x = id.cx + offset;
    g.lower_y1 = 0.97 * H;
    g.lower_x0 = id.cx - 0.9 * half;
    g.lower_x1 = id.cx + 0.9 * half;
    return g;
}

pose::PoseSkeleton skeleton(const Identity& id, const Geometry& g, double facing, std::size_t h, std::size_t w) {
    const double sx = 1.0 / static_cast<double>(w - 1), sy = 1.0 / static_cast<double>(h - 1);
    pose::PoseSkeleton s;
    auto put = [&](std::size_t j, double x, double y, bool vis = true) {
        s.set(j, {(x - 0.5) * sx, (y - 0.5) * sy, vis ? 1.0 : 0.0});
    };
    const bool front = facing > 0.25, away = facing < -0.25;
    const double arm_mid = 0.5 * (g.arm_y0 + g.arm_y1);
    put(pose::Nose, id.cx, g.head_cy + 0.2 * g.head_r, !away);
    put(pose::Neck, id.cx, g.torso_y0);
    put(pose::RShoulder, g.arm_right_x, g.arm_y0);
    put(pose::RElbow, g.arm_right_x, arm_mid);
    put(pose::RWrist, g.arm_right_x, g.arm_y1);
    put(pose::LShoulder, g.arm_left_x, g.arm_y0);
    put(pose::LElbow, g.arm_left_x, arm_mid);
    put(pose::LWrist, g.arm_left_x, g.arm_y1);
    const double hip = 0.5 * id.torso_half * facing;
    const double knee_y = 0.5 * (g.torso_y1 + g.lower_y1);
    put(pose::RHip, id.cx - hip, g.torso_y1);
    put(pose::RKnee, id.cx - hip, knee_y);
    put(pose::RAnkle, id.cx - hip, g.lower_y1 - 1.0);
    put(pose::LHip, id.cx + hip, g.torso_y1);
    put(pose::LKnee, id.cx + hip, knee_y);
    put(pose::LAnkle, id.cx + hip, g.lower_y1 - 1.0);
    put(pose::REye, id.cx - 0.35 * g.head_r * facing, g.head_cy - 0.2 * g.head_r, front);
    put(pose::LEye, id.cx + 0.35 * g.head_r * facing, g.head_cy - 0.2 * g.head_r, front);
    put(pose::REar, id.cx - g.head_r * facing, g.head_cy);
    put(pose::LEar, id.cx + g.head_r * facing, g.head_cy);
    return s;
}

void render_view(const Identity& id, const Tensor& front, const Tensor& back, double facing, std::size_t h,
                 std::size_t w, Tensor& image, LabelMap& parsing) {
    const Geometry g = layout(id, facing, h);
    image = Tensor({3, h, w});
    parsing = make_label_map(h, w);
    const double gh = static_cast<double>(front.dim(1) - 1), gw = static_cast<double>(front.dim(2) - 1);

    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const double py = static_cast<double>(y) + 0.5, px = static_cast<double>(x) + 0.5;
            Rgb col = id.background;
            std::uint8_t label = Background;
            const Tensor* garment = nullptr;
            double gy = 0, gx = 0;

            if (py >= g.torso_y1 && py < g.lower_y1 && px >= g.lower_x0 && px < g.lower_x1) {
                col = id.lower;
                label = LowerBody;
            }
            if (py >= g.torso_y0 && py < g.torso_y1 && px >= g.torso_x0 && px < g.torso_x1) {
                label = UpperGarment;
                const double v = (px - g.torso_x0) / (g.torso_x1 - g.torso_x0);
                const double u = (py - g.torso_y0) / (g.torso_y1 - g.torso_y0);
                if (facing > 0.25) garment = &front;
                else if (facing < -0.25) garment = &back;
                else garment = v < 0.5 ? &front : &back;
                gy = std::round(u * gh);
                gx = std::round(v * gw);
            }
            const bool in_arm_rows = py >= g.arm_y0 && py < g.arm_y1;
            if (in_arm_rows && std::abs(px - g.arm_right_x) < g.arm_half) {
                col = id.skin, label = RightArm, garment = nullptr;
            } else if (in_arm_rows && std::abs(px - g.arm_left_x) < g.arm_half) {
                col = id.skin, label = LeftArm, garment = nullptr;
            }
            const double dy = py - g.head_cy, dx = px - id.cx;
            if (dy * dy + dx * dx < g.head_r * g.head_r) {
                const double hairline = facing > 0.25 ? -0.3 : (facing < -0.25 ? 2.0 : 0.3);
                const bool hair = dy < hairline * g.head_r;
                col = hair ? id.hair : id.skin;
                label = hair ? Hair : Face;
                garment = nullptr;
            }
            parsing.at(y, x) = label;
            for (std::size_t c = 0; c < 3; ++c)
                image.at(c, y, x) = garment ? garment->at(c, static_cast<std::size_t>(gy), static_cast<std::size_t>(gx))
                                            : quantize(col[c]);
        }
}

}  // namespace

Tensor garment_region(const LabelMap& parsing) {
    Tensor m({1, parsing.h, parsing.w});
    for (std::size_t i = 0; i < parsing.labels.size(); ++i) m[i] = parsing.labels[i] == UpperGarment ? 1.0 : 0.0;
    return m;
}

std::vector<MvgSample> synth_generate(std::uint64_t seed, std::size_t n, const SynthOptions& opt) {
    if (n == 0) throw ContractError("synth_generate needs at least one sample");
    if (opt.h < 16 || opt.w < 16) throw ContractError("synthetic images must be at least 16x16");
    std::vector<MvgSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 rng(nn::mix_seed(seed, i));
        const Identity id = draw_identity(rng, opt.h, opt.w);
        MvgSample s;
        char name[32];
        std::snprintf(name, sizeof name, "s%04zu", i);
        s.id = name;
        s.garments.front_image = garment_image(id, false, opt.h, opt.w);
        s.garments.back_image = garment_image(id, true, opt.h, opt.w);
        for (std::size_t v = 0; v < kNumViews; ++v) {
            render_view(id, s.garments.front_image, s.garments.back_image, kFacing[v], opt.h, opt.w, s.views[v],
                        s.parsing[v]);
            s.poses[v] = skeleton(id, layout(id, kFacing[v], opt.h), kFacing[v], opt.h, opt.w);
        }
        s.garments.front_pose = s.poses.front();
        s.garments.back_pose = s.poses.back();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace mvt::data
