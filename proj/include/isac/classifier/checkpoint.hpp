#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "isac/binary_io.hpp"
#include "isac/classifier/model.hpp"
#include "isac/error.hpp"
#include "isac/seed.hpp"

namespace isac::classifier {

// Layout (little-endian):
//   char[8] "ISACCKP1", u32 version, u64 rng_seed
//   u32 n_blocks, then per block: u32 name length, name, u32 rank, u64 dims[rank]
//   u64 adam step
//   f64 blocks in manifest order: model state tensors, then adam m, then adam v
inline constexpr char kCheckpointMagic[8] = {'I', 'S', 'A', 'C', 'C', 'K', 'P', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

struct Block {
  std::string name;
  Tensor<double>* tensor;
};

inline std::vector<Block> checkpoint_blocks(ClassifierModel<double>& model) {
  std::vector<Block> blocks;
  for (auto& t : model.state_tensors()) blocks.push_back({t.name, t.tensor});
  const auto params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) blocks.push_back({"adam.m." + params[i].name, &model.adam.m[i]});
  for (std::size_t i = 0; i < params.size(); ++i) blocks.push_back({"adam.v." + params[i].name, &model.adam.v[i]});
  return blocks;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& os, ClassifierModel<double>& model) {
  const auto blocks = detail::checkpoint_blocks(model);
  os.write(kCheckpointMagic, 8);
  io::put_le<std::uint32_t>(os, kCheckpointVersion);
  io::put_le<std::uint64_t>(os, model.rng_seed);
  io::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    io::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(b.name.size()));
    os.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    io::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(b.tensor->rank()));
    for (auto d : b.tensor->shape()) io::put_le<std::uint64_t>(os, d);
  }
  io::put_le<std::uint64_t>(os, model.adam.step);
  for (const auto& b : blocks) {
    for (double v : b.tensor->data()) io::put_le<double>(os, v);
  }
}

inline ClassifierModel<double> read_checkpoint(std::istream& is) {
  io::LeReader rd(is);
  char magic[8];
  rd.read(magic, 8, "magic");
  if (std::string(magic, 8) != std::string(kCheckpointMagic, 8)) throw FormatError("bad checkpoint magic at byte offset 0");
  const auto version = rd.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw UnsupportedVersionError("unsupported checkpoint version " + std::to_string(version) + " at byte offset 8");
  }
  ClassifierModel<double> model(rd.get<std::uint64_t>("rng_seed"));
  const auto blocks = detail::checkpoint_blocks(model);
  const auto offset = rd.offset();
  const auto n = rd.get<std::uint32_t>("block count");
  if (n != blocks.size()) {
    throw FormatError("checkpoint has " + std::to_string(n) + " blocks, model expects " + std::to_string(blocks.size()) +
                      " (byte offset " + std::to_string(offset) + ")");
  }
  for (const auto& b : blocks) {
    const auto at = rd.offset();
    const auto len = rd.get<std::uint32_t>("block name length");
    if (len > 256) throw FormatError("implausible block name length at byte offset " + std::to_string(at));
    std::string name(len, '\0');
    rd.read(name.data(), len, "block name");
    nn::Shape shape(rd.get<std::uint32_t>("rank"));
    for (auto& d : shape) d = rd.get<std::uint64_t>("dim");
    if (name != b.name || shape != b.tensor->shape()) {
      throw FormatError("manifest entry '" + name + "' " + nn::shape_str(shape) + " at byte offset " +
                        std::to_string(at) + " does not match expected '" + b.name + "' " +
                        nn::shape_str(b.tensor->shape()));
    }
  }
  model.adam.step = rd.get<std::uint64_t>("adam step");
  for (const auto& b : blocks) {
    for (auto& v : b.tensor->data()) v = rd.get<double>("parameter block");
  }
  return model;
}

inline void save_checkpoint(const std::string& path, ClassifierModel<double>& model) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp + " for writing");
    write_checkpoint(os, model);
    if (!os) throw IoError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot move checkpoint into place at " + path);
}

inline ClassifierModel<double> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_checkpoint(is);
}

// 16 hex digits of FNV-1a over the serialized checkpoint.
inline std::string checkpoint_hash(ClassifierModel<double>& model) {
  std::ostringstream os;
  write_checkpoint(os, model);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

}  // namespace isac::classifier
