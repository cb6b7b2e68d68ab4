#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cvse/model/cvse_model.hpp"

namespace cvse::model {

// Checkpoint layout, all integers and reals little-endian:
//
//   "CVSE"                     4 bytes magic
//   version                    u16 (currently 1)
//   d1, d2, d, d_att           u32 each
//   7 x { count: u64, count x f64 }   parameters in CvseModel order
//   checksum                   u64 FNV-1a over every preceding byte
//
// Margin and negative count are run configuration, not part of the file.

inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const CvseModel& model);
/// Throws DataError on a bad magic, version, shape or checksum.
CvseModel decode_checkpoint(std::span<const std::uint8_t> bytes, CvseHyper hyper = {});

void save_checkpoint(const CvseModel& model, const std::filesystem::path& path);
CvseModel load_checkpoint(const std::filesystem::path& path, CvseHyper hyper = {});

}  // namespace cvse::model
