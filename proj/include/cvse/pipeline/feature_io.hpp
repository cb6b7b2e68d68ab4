#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cvse/model/feature_map.hpp"

namespace cvse::pipeline {

/// "CVFM" file: u16 version, u32 w, u32 h, u32 channels, then f32 values, all little-endian.
std::vector<std::uint8_t> encode_feature_map(const model::FeatureMap& map);
/// Throws DataError naming `what` on malformed input.
model::FeatureMap decode_feature_map(std::span<const std::uint8_t> bytes, const std::string& what);

model::FeatureMap read_feature_map(const std::filesystem::path& path);
/// Values are narrowed to f32; reading back returns exactly the narrowed values.
void write_feature_map(const std::filesystem::path& path, const model::FeatureMap& map);

}  // namespace cvse::pipeline
