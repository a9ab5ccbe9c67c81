#include "mvtryon/data/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mvtryon/errors.hpp"

namespace mvt::data {

namespace {

struct ImageGuard {
    png_image img;
    ImageGuard() {
        std::memset(&img, 0, sizeof img);
        img.version = PNG_IMAGE_VERSION;
    }
    ~ImageGuard() { png_image_free(&img); }
};

std::vector<std::uint8_t> read_raw(const std::filesystem::path& path, png_uint_32 format, std::size_t& h,
                                   std::size_t& w, bool require_grey) {
    ImageGuard g;
    if (!png_image_begin_read_from_file(&g.img, path.c_str()))
        throw FormatError(path.string() + ": " + g.img.message);
    if (require_grey && (g.img.format & PNG_FORMAT_FLAG_COLOR))
        throw FormatError(path.string() + ": label map must be a greyscale PNG");
    g.img.format = format;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(g.img));
    if (!png_image_finish_read(&g.img, nullptr, buf.data(), 0, nullptr))
        throw FormatError(path.string() + ": " + g.img.message);
    h = g.img.height;
    w = g.img.width;
    return buf;
}

void write_raw(const std::filesystem::path& path, png_uint_32 format, std::size_t h, std::size_t w,
               const std::vector<std::uint8_t>& buf) {
    ImageGuard g;
    g.img.format = format;
    g.img.height = static_cast<png_uint_32>(h);
    g.img.width = static_cast<png_uint_32>(w);
    if (!png_image_write_to_file(&g.img, path.c_str(), 0, buf.data(), 0, nullptr))
        throw FormatError(path.string() + ": " + g.img.message);
}

}  // namespace

LabelMap make_label_map(std::size_t h, std::size_t w, std::uint8_t fill) {
    return {h, w, std::vector<std::uint8_t>(h * w, fill)};
}

double byte_to_unit(std::uint8_t p) { return static_cast<double>(p) / 127.5 - 1.0; }

std::uint8_t unit_to_byte(double v) {
    const double p = std::round((v + 1.0) * 127.5);
    return static_cast<std::uint8_t>(std::clamp(p, 0.0, 255.0));
}

Tensor read_png(const std::filesystem::path& path) {
    std::size_t h = 0, w = 0;
    auto buf = read_raw(path, PNG_FORMAT_RGB, h, w, false);
    Tensor out({3, h, w});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) out.at(c, y, x) = byte_to_unit(buf[(y * w + x) * 3 + c]);
    return out;
}

void write_png(const std::filesystem::path& path, const Tensor& image) {
    if (image.rank() != 3 || (image.dim(0) != 3 && image.dim(0) != 1))
        throw DimensionError("write_png expects [3 x H x W] or [1 x H x W], got " + shape_str(image.shape()));
    const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
    std::vector<std::uint8_t> buf(c * h * w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t ch = 0; ch < c; ++ch) buf[(y * w + x) * c + ch] = unit_to_byte(image.at(ch, y, x));
    write_raw(path, c == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY, h, w, buf);
}

LabelMap read_labels(const std::filesystem::path& path) {
    LabelMap m;
    m.labels = read_raw(path, PNG_FORMAT_GRAY, m.h, m.w, true);
    for (std::uint8_t v : m.labels)
        if (v >= kNumLabels) throw FormatError(path.string() + ": unknown parsing label " + std::to_string(v));
    return m;
}

void write_labels(const std::filesystem::path& path, const LabelMap& labels) {
    write_raw(path, PNG_FORMAT_GRAY, labels.h, labels.w, labels.labels);
}

}  // namespace mvt::data
