#include "cvse/pipeline/feature_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "cvse/pipeline/binary_io.hpp"

namespace cvse {

namespace io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string read_text(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

}  // namespace io

namespace pipeline {

namespace {
constexpr char kMagic[4] = {'C', 'V', 'F', 'M'};
constexpr std::uint16_t kVersion = 1;
}  // namespace

std::vector<std::uint8_t> encode_feature_map(const model::FeatureMap& map) {
  io::ByteWriter w;
  w.bytes(kMagic, 4);
  w.le<std::uint16_t>(kVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(map.width()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(map.height()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(map.channels()));
  for (double x : map.regions().values()) w.f32(static_cast<float>(x));
  return w.take();
}

model::FeatureMap decode_feature_map(std::span<const std::uint8_t> bytes, const std::string& what) {
  io::ByteReader r(bytes, what);
  auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw DataError(what + ": not a CVFM feature map");
  const auto version = r.le<std::uint16_t>();
  if (version != kVersion) throw DataError(what + ": unsupported CVFM version " + std::to_string(version));
  const std::size_t w = r.le<std::uint32_t>();
  const std::size_t h = r.le<std::uint32_t>();
  const std::size_t c = r.le<std::uint32_t>();
  if (w == 0 || h == 0 || c == 0) throw DataError(what + ": zero-sized feature map");
  const std::size_t n = w * h * c;
  if (r.remaining() != n * 4) {
    throw DataError(what + ": expected " + std::to_string(n * 4) + " value bytes, found " +
                    std::to_string(r.remaining()));
  }
  std::vector<double> values(n);
  for (auto& v : values) {
    v = r.f32();
    if (!std::isfinite(v)) throw DataError(what + ": non-finite feature value");
  }
  return model::FeatureMap(w, h, c, std::move(values));
}

model::FeatureMap read_feature_map(const std::filesystem::path& path) {
  return decode_feature_map(io::read_file(path), path.string());
}

void write_feature_map(const std::filesystem::path& path, const model::FeatureMap& map) {
  io::write_file(path, encode_feature_map(map));
}

}  // namespace pipeline
}  // namespace cvse
