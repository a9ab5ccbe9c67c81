#include "mvtryon/data/dataset.hpp"

#include <algorithm>

#include "mvtryon/errors.hpp"

namespace mvt::data {

namespace fs = std::filesystem;

namespace {

std::string angle(std::size_t v) { return std::to_string(kViewAngles[v]); }

std::vector<std::string> required_files() {
    std::vector<std::string> names;
    for (std::size_t v = 0; v < kNumViews; ++v) {
        names.push_back("view_" + angle(v) + ".png");
        names.push_back("parse_" + angle(v) + ".png");
        names.push_back("pose_" + angle(v) + ".jsonl");
    }
    for (const char* n : {"garment_front.png", "garment_back.png", "pose_garment_front.jsonl", "pose_garment_back.jsonl"})
        names.emplace_back(n);
    return names;
}

}  // namespace

pose::PoseSkeleton read_single_pose(const fs::path& path) {
    auto poses = pose::read_pose_jsonl(path);
    if (poses.size() != 1)
        throw FormatError(path.string() + ": expected one pose record, found " + std::to_string(poses.size()));
    return poses.front();
}

MvgSample load_sample(const fs::path& dir) {
    MvgSample s;
    s.id = dir.filename().string();
    for (std::size_t v = 0; v < kNumViews; ++v) {
        s.views[v] = read_png(dir / ("view_" + angle(v) + ".png"));
        s.parsing[v] = read_labels(dir / ("parse_" + angle(v) + ".png"));
        s.poses[v] = read_single_pose(dir / ("pose_" + angle(v) + ".jsonl"));
        if (s.parsing[v].h != s.views[v].dim(1) || s.parsing[v].w != s.views[v].dim(2))
            throw FormatError((dir / ("parse_" + angle(v) + ".png")).string() + ": size differs from the view image");
    }
    s.garments.front_image = read_png(dir / "garment_front.png");
    s.garments.back_image = read_png(dir / "garment_back.png");
    s.garments.front_pose = read_single_pose(dir / "pose_garment_front.jsonl");
    s.garments.back_pose = read_single_pose(dir / "pose_garment_back.jsonl");
    return s;
}

DatasetLoad load_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw FormatError(root.string() + ": not a directory");
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());

    DatasetLoad out;
    const auto required = required_files();
    for (const auto& dir : dirs) {
        std::vector<std::string> missing;
        for (const auto& n : required)
            if (!fs::is_regular_file(dir / n)) missing.push_back(n);
        if (!missing.empty()) {
            std::string msg = dir.filename().string() + ": skipped, missing";
            for (const auto& m : missing) msg += " " + m;
            out.warnings.push_back(std::move(msg));
            continue;
        }
        out.samples.push_back(load_sample(dir));
    }
    return out;
}

void write_sample(const fs::path& root, const MvgSample& s) {
    const fs::path dir = root / s.id;
    fs::create_directories(dir);
    for (std::size_t v = 0; v < kNumViews; ++v) {
        write_png(dir / ("view_" + angle(v) + ".png"), s.views[v]);
        write_labels(dir / ("parse_" + angle(v) + ".png"), s.parsing[v]);
        pose::write_pose_jsonl(dir / ("pose_" + angle(v) + ".jsonl"), {s.poses[v]});
    }
    write_png(dir / "garment_front.png", s.garments.front_image);
    write_png(dir / "garment_back.png", s.garments.back_image);
    pose::write_pose_jsonl(dir / "pose_garment_front.jsonl", {s.garments.front_pose});
    pose::write_pose_jsonl(dir / "pose_garment_back.jsonl", {s.garments.back_pose});
}

}  // namespace mvt::data
