#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "isac/binary_io.hpp"
#include "isac/error.hpp"
#include "isac/sweepgen/frames.hpp"

namespace isac::dataset {

// Binary layout (little-endian):
//   char[8]  "ISACSWP1"
//   u32      version (1)
//   u32      n_tx, n_rx
//   u64      n_frames
//   u32      n_subjects, n_sequences, n_gestures
//   f64      sweeps_per_second
//   u32      note length, then note bytes (units of the payload)
//   f32[n_frames * n_tx * n_rx]  power in dB, frame-major, tx-major
// Sidecar `<path>.idx`, one run per line:
//   subject sequence gesture first_frame frame_count
inline constexpr char kDatasetMagic[8] = {'I', 'S', 'A', 'C', 'S', 'W', 'P', '1'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr const char* kDatasetNote = "power per beam pair in dB, 10*log10(linear)";

struct DatasetInfo {
  double sweeps_per_second = 154.0;
};

inline std::string sidecar_path(const std::string& path) { return path + ".idx"; }

namespace detail {

struct Run {
  sweepgen::FrameTag tag;
  std::uint64_t first = 0;
  std::uint64_t count = 0;
};

inline std::vector<Run> runs_of(const sweepgen::FrameStore& store) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (runs.empty() || !(runs.back().tag == store.tag(i))) {
      runs.push_back({store.tag(i), i, 0});
    }
    ++runs.back().count;
  }
  return runs;
}

}  // namespace detail

inline void save_dataset(const std::string& path, const sweepgen::FrameStore& store, const DatasetInfo& info = {}) {
  std::set<std::uint32_t> subjects, sequences, gestures;
  for (const auto& t : store.tags()) {
    subjects.insert(t.subject_id);
    sequences.insert(t.sequence_id);
    gestures.insert(t.gesture_id);
  }
  {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os.write(kDatasetMagic, 8);
    io::put_le<std::uint32_t>(os, kDatasetVersion);
    io::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(store.n_tx()));
    io::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(store.n_rx()));
    io::put_le<std::uint64_t>(os, store.size());
    io::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(subjects.size()));
    io::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(sequences.size()));
    io::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(gestures.size()));
    io::put_le<double>(os, info.sweeps_per_second);
    const std::string note = kDatasetNote;
    io::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(note.size()));
    os.write(note.data(), static_cast<std::streamsize>(note.size()));
    if constexpr (std::endian::native == std::endian::little) {
      os.write(reinterpret_cast<const char*>(store.raw().data()),
               static_cast<std::streamsize>(store.raw().size() * sizeof(float)));
    } else {
      for (float v : store.raw()) io::put_le<float>(os, v);
    }
    if (!os) throw IoError("write failed for " + path);
  }
  std::ofstream idx(sidecar_path(path), std::ios::trunc);
  if (!idx) throw IoError("cannot open " + sidecar_path(path) + " for writing");
  idx << "# subject sequence gesture first_frame frame_count\n";
  for (const auto& r : detail::runs_of(store)) {
    idx << r.tag.subject_id << ' ' << r.tag.sequence_id << ' ' << r.tag.gesture_id << ' ' << r.first << ' '
        << r.count << '\n';
  }
  if (!idx) throw IoError("write failed for " + sidecar_path(path));
}

struct LoadedDataset {
  sweepgen::FrameStore frames;
  DatasetInfo info;
};

// Either returns the complete dataset or throws; nothing partial escapes.
inline LoadedDataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  io::LeReader rd(is);
  char magic[8];
  rd.read(magic, 8, "magic");
  if (std::memcmp(magic, kDatasetMagic, 8) != 0) throw FormatError("bad dataset magic at byte offset 0");
  const auto version = rd.get<std::uint32_t>("version");
  if (version != kDatasetVersion) {
    throw UnsupportedVersionError("unsupported dataset version " + std::to_string(version) + " at byte offset 8");
  }
  const auto n_tx = rd.get<std::uint32_t>("n_tx");
  const auto n_rx = rd.get<std::uint32_t>("n_rx");
  const auto n_frames = rd.get<std::uint64_t>("n_frames");
  rd.get<std::uint32_t>("n_subjects");
  rd.get<std::uint32_t>("n_sequences");
  rd.get<std::uint32_t>("n_gestures");
  LoadedDataset out{sweepgen::FrameStore(n_tx, n_rx), {}};
  out.info.sweeps_per_second = rd.get<double>("sweeps_per_second");
  const auto note_len = rd.get<std::uint32_t>("note length");
  if (note_len > 4096) throw FormatError("implausible note length at byte offset " + std::to_string(rd.offset() - 4));
  std::string note(note_len, '\0');
  rd.read(note.data(), note_len, "note");
  if (n_tx == 0 || n_rx == 0) throw FormatError("zero beam count in header");

  const std::uint64_t payload_offset = rd.offset();
  const std::uint64_t cells = n_frames * n_tx * n_rx;
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path);
  if (file_size < payload_offset + cells * sizeof(float)) {
    throw FormatError("payload truncated: " + std::to_string(file_size - payload_offset) + " bytes from byte offset " +
                      std::to_string(payload_offset) + ", expected " + std::to_string(cells * sizeof(float)));
  }

  // Sidecar first: it decides the per-frame tags.
  std::ifstream idx(sidecar_path(path));
  if (!idx) throw IoError("cannot open sidecar " + sidecar_path(path));
  std::vector<sweepgen::FrameTag> tags;
  tags.reserve(n_frames);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(idx, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::uint64_t subj, seq, gest, first, count;
    if (!(ls >> subj >> seq >> gest >> first >> count)) throw ParseError(lineno, "expected 5 integers in sidecar");
    if (first != tags.size()) throw ParseError(lineno, "sidecar runs must be contiguous");
    for (std::uint64_t k = 0; k < count; ++k) {
      tags.push_back({static_cast<std::uint32_t>(subj), static_cast<std::uint32_t>(seq),
                      static_cast<std::uint32_t>(gest)});
    }
  }
  if (tags.size() != n_frames) {
    throw FormatError("sidecar covers " + std::to_string(tags.size()) + " frames, header declares " +
                      std::to_string(n_frames));
  }

  std::vector<float> buf(static_cast<std::size_t>(n_tx) * n_rx);
  out.frames.reserve(n_frames);
  for (std::uint64_t f = 0; f < n_frames; ++f) {
    rd.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float), "frame payload");
    if constexpr (std::endian::native == std::endian::big) {
      for (auto& v : buf) {
        auto* b = reinterpret_cast<unsigned char*>(&v);
        std::reverse(b, b + sizeof(float));
      }
    }
    out.frames.push_back(buf, tags[f]);
  }
  return out;
}

}  // namespace isac::dataset
