#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "mvtryon/nn/params.hpp"

namespace mvt::nn {

// File layout, all integers little-endian:
//   "MVTC"  u32 version
//   repeated until EOF:
//     u32 name_len, name bytes, u32 rank, rank x u32 dims, numel x f64
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_tensors(const std::map<std::string, Tensor>& tensors, const std::filesystem::path& path);
std::map<std::string, Tensor> load_tensors(const std::filesystem::path& path);

// Written to a sibling temp file and renamed into place.
void save_checkpoint(const ParamStore& store, const std::filesystem::path& path);
ParamStore load_checkpoint(const std::filesystem::path& path);

}  // namespace mvt::nn
