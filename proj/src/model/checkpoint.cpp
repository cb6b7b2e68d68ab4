#include "cvse/model/checkpoint.hpp"

#include <cstring>
#include <string>

#include "cvse/errors.hpp"
#include "cvse/num/random.hpp"
#include "cvse/pipeline/binary_io.hpp"

namespace cvse::model {

std::vector<std::uint8_t> encode_checkpoint(const CvseModel& model) {
  io::ByteWriter w;
  w.bytes("CVSE", 4);
  w.le<std::uint16_t>(kCheckpointVersion);
  const CvseDims& d = model.dims();
  for (std::size_t v : {d.text_dim, d.region_dim, d.joint_dim, d.attention_dim}) {
    w.le<std::uint32_t>(static_cast<std::uint32_t>(v));
  }
  for (const num::Matrix& p : model.parameters()) {
    w.le<std::uint64_t>(p.size());
    for (double x : p.span()) w.f64(x);
  }
  const std::uint64_t checksum = num::fnv1a64(w.data().data(), w.data().size());
  w.le<std::uint64_t>(checksum);
  return w.take();
}

CvseModel decode_checkpoint(std::span<const std::uint8_t> bytes, CvseHyper hyper) {
  if (bytes.size() < 8) throw DataError("checkpoint: file too short");
  io::ByteReader r(bytes, "checkpoint");
  auto magic = r.bytes(4);
  if (std::memcmp(magic.data(), "CVSE", 4) != 0) throw DataError("checkpoint: bad magic");
  const auto version = r.le<std::uint16_t>();
  if (version != kCheckpointVersion) throw DataError("checkpoint: unsupported version " + std::to_string(version));
  CvseDims dims;
  dims.text_dim = r.le<std::uint32_t>();
  dims.region_dim = r.le<std::uint32_t>();
  dims.joint_dim = r.le<std::uint32_t>();
  dims.attention_dim = r.le<std::uint32_t>();
  if (dims.text_dim == 0 || dims.region_dim == 0 || dims.joint_dim == 0 || dims.attention_dim == 0) {
    throw DataError("checkpoint: zero dimension in header");
  }

  const std::size_t d = dims.joint_dim, att = dims.attention_dim;
  const std::array<std::pair<std::size_t, std::size_t>, kParamCount> shapes{{
      {d, dims.text_dim}, {d, 1}, {d, dims.region_dim}, {d, 1}, {att, 2 * d}, {att, 1}, {att, 1}}};
  std::array<num::Matrix, kParamCount> params;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto count = r.le<std::uint64_t>();
    const auto [rows, cols] = shapes[i];
    if (count != rows * cols) {
      throw DataError("checkpoint: tensor " + std::to_string(i) + " has " + std::to_string(count) +
                      " values, expected " + std::to_string(rows * cols));
    }
    r.need(count * 8);
    std::vector<double> values(count);
    for (double& x : values) x = r.f64();
    params[i] = num::Matrix(rows, cols, std::move(values));
  }
  const std::size_t payload = r.position();
  const auto stored = r.le<std::uint64_t>();
  if (r.remaining() != 0) throw DataError("checkpoint: trailing bytes");
  if (stored != num::fnv1a64(bytes.data(), payload)) throw DataError("checkpoint: checksum mismatch");
  return CvseModel(dims, hyper, std::move(params));
}

void save_checkpoint(const CvseModel& model, const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint(model));
}

CvseModel load_checkpoint(const std::filesystem::path& path, CvseHyper hyper) {
  return decode_checkpoint(io::read_file(path), hyper);
}

}  // namespace cvse::model
