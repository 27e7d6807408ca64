#include "ibx/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "ibx/error.hpp"
#include "json.hpp"

namespace ibx {

namespace {

using nlohmann::json;
using Kind = CheckpointError::Kind;

void put_u64_le(std::ofstream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64_le(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw CheckpointError(Kind::corrupt_manifest, "checkpoint: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_f64_le(std::ofstream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

double get_f64_le(const unsigned char* buf) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void checkpoint_save(const ParamSet& params, const std::string& path) {
  json manifest;
  manifest["version"] = kCheckpointVersion;
  json tensors = json::array();
  std::uint64_t offset = 0;
  for (const std::string& name : params.names()) {
    const Tensor& t = params.at(name);
    tensors.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.numel() * 8;
  }
  manifest["tensors"] = std::move(tensors);
  manifest["payload_bytes"] = offset;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(Kind::io, "checkpoint: cannot open " + path + " for writing");
  std::string mtext = manifest.dump();
  put_u64_le(out, mtext.size());
  out.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));
  for (const std::string& name : params.names()) {
    for (double d : params.at(name).data) put_f64_le(out, d);
  }
  out.flush();
  if (!out) throw CheckpointError(Kind::io, "checkpoint: write failed for " + path);
}

ParamSet checkpoint_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::io, "checkpoint: cannot open " + path);
  std::uint64_t mlen = get_u64_le(in);
  std::string mtext(mlen, '\0');
  in.read(mtext.data(), static_cast<std::streamsize>(mlen));
  if (!in) throw CheckpointError(Kind::corrupt_manifest, "checkpoint: truncated manifest");
  json manifest = json::parse(mtext, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object() || !manifest.contains("tensors") ||
      !manifest.contains("version") || !manifest.contains("payload_bytes")) {
    throw CheckpointError(Kind::corrupt_manifest, "checkpoint: corrupt manifest");
  }
  int version = manifest["version"].get<int>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::version_mismatch,
                          "checkpoint: version " + std::to_string(version) + " unsupported");
  }

  std::uint64_t payload_bytes = manifest["payload_bytes"].get<std::uint64_t>();
  std::vector<unsigned char> payload(payload_bytes);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload_bytes));
  if (static_cast<std::uint64_t>(in.gcount()) != payload_bytes) {
    throw CheckpointError(Kind::payload_length,
                          "checkpoint: payload shorter than manifest declares");
  }

  ParamSet params;
  std::uint64_t expected_offset = 0;
  for (const json& entry : manifest["tensors"]) {
    if (!entry.contains("name") || !entry.contains("shape") || !entry.contains("offset")) {
      throw CheckpointError(Kind::corrupt_manifest, "checkpoint: malformed tensor entry");
    }
    std::string name = entry["name"].get<std::string>();
    std::vector<std::size_t> shape = entry["shape"].get<std::vector<std::size_t>>();
    std::uint64_t offset = entry["offset"].get<std::uint64_t>();
    if (offset != expected_offset) {
      throw CheckpointError(Kind::shape_mismatch,
                            "checkpoint: shape/offset mismatch at tensor " + name);
    }
    std::uint64_t n = Tensor::count(shape);
    if (offset + n * 8 > payload_bytes) {
      throw CheckpointError(Kind::shape_mismatch,
                            "checkpoint: shape of tensor " + name + " overruns payload");
    }
    Tensor t(shape);
    for (std::uint64_t i = 0; i < n; ++i) {
      t.data[i] = get_f64_le(&payload[offset + i * 8]);
    }
    params.add(name, std::move(t));
    expected_offset = offset + n * 8;
  }
  if (expected_offset != payload_bytes) {
    throw CheckpointError(Kind::payload_length, "checkpoint: payload longer than manifest");
  }
  return params;
}

}  // namespace ibx
