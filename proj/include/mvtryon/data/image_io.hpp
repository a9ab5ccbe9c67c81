#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvtryon/numerics/tensor.hpp"

namespace mvt::data {

// Person-parsing classes stored as 8-bit grey PNG values.
enum Label : std::uint8_t {
    Background = 0,
    Hair = 1,
    Face = 2,
    UpperGarment = 3,
    LeftArm = 4,
    RightArm = 5,
    LowerBody = 6,
};
inline constexpr std::uint8_t kNumLabels = 7;

struct LabelMap {
    std::size_t h = 0, w = 0;
    std::vector<std::uint8_t> labels;  // row-major

    std::uint8_t at(std::size_t y, std::size_t x) const { return labels[y * w + x]; }
    std::uint8_t& at(std::size_t y, std::size_t x) { return labels[y * w + x]; }
    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

LabelMap make_label_map(std::size_t h, std::size_t w, std::uint8_t fill = Background);

// Pixel value p in 0..255 maps to p / 127.5 - 1; writing rounds the inverse
// and clamps to the byte range.
double byte_to_unit(std::uint8_t p);
std::uint8_t unit_to_byte(double v);

// Any PNG colour type is converted to RGB. Returns [3 x H x W] in [-1, 1].
Tensor read_png(const std::filesystem::path& path);
// image: [3 x H x W] or [1 x H x W].
void write_png(const std::filesystem::path& path, const Tensor& image);

// Grey 8-bit PNG; colour images are rejected. Values outside the label set
// throw FormatError.
LabelMap read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const LabelMap& labels);

}  // namespace mvt::data
