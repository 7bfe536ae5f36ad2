#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathtracker/config.hpp"
#include "pathtracker/flow.hpp"
#include "pathtracker/scene.hpp"

namespace pathtracker {

inline constexpr int kFormatVersion = 1;
inline constexpr char kRecordMagic[4] = {'P', 'T', 'R', 'K'};
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr int kDefaultRecordsPerShard = 1000;
/// Trajectory coordinates are stored as floor(px * 256).
inline constexpr double kFixedPointScale = 256.0;

/// Fixed size of the record header in bytes.
inline constexpr std::size_t kRecordHeaderBytes = 34;

struct ShardInfo {
  std::string file;
  std::uint64_t records = 0;
  std::uint64_t bytes = 0;
};

struct DatasetManifest {
  int format_version = kFormatVersion;
  GenConfig config;
  std::string prng_id = kPrngId;
  Fold fold = Fold::train;
  /// Layout of the stored frames; differs from config.layout for flow encodings.
  Layout layout = Layout::mixed;
  std::uint64_t sample_count = 0;
  /// FNV-1a 64 over the concatenated shard files in manifest order.
  std::uint64_t checksum = 0;
  int records_per_shard = kDefaultRecordsPerShard;
  std::vector<ShardInfo> shards;
  std::optional<TvL1Params> flow_params;
};

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);

/// Bytes of one serialized record for the given shape.
std::size_t record_bytes(int frames, int dot_count);

/// Serialized record of a sample. Trajectories keep their per-frame positions only.
std::vector<std::uint8_t> encode_record(const VideoSample& sample);

/// The sample as it comes back from disk: positions floored to 1/256 px,
/// base walks dropped. write -> read reproduces exactly this.
VideoSample stored_form(const VideoSample& sample);

/// Incremental FNV-1a 64.
class Fnv1a64 {
 public:
  void update(std::span<const std::uint8_t> bytes);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Streams samples into `dir`, one shard per `records_per_shard` samples.
/// finish() writes the manifest; a writer that is never finished leaves no manifest.
class DatasetWriter {
 public:
  /// `manifest` supplies config, fold, layout and records_per_shard. When
  /// `expected_count` is set, finish() fails unless exactly that many samples were appended.
  DatasetWriter(std::filesystem::path dir, DatasetManifest manifest, std::optional<std::uint64_t> expected_count = {});

  void append(const VideoSample& sample);
  DatasetManifest finish();

 private:
  void close_shard();

  std::filesystem::path dir_;
  DatasetManifest manifest_;
  std::optional<std::uint64_t> expected_;
  std::ofstream shard_;
  Fnv1a64 hash_;
  bool finished_ = false;
};

void write_dataset(std::span<const VideoSample> samples, const DatasetManifest& manifest,
                   const std::filesystem::path& dir);

/// Opens a dataset, validating shard sizes, record headers and the checksum
/// before any sample is handed out. Errors are DataError with kinds
/// truncated, bad_magic, dimension_mismatch, count_mismatch or checksum.
class DatasetReader {
 public:
  explicit DatasetReader(std::filesystem::path dir);

  const DatasetManifest& manifest() const { return manifest_; }
  /// Next sample in written order, or nullopt at the end.
  std::optional<VideoSample> next();
  /// Labels of all samples in order, read from the record headers only.
  std::vector<Label> labels() const;

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
  std::size_t shard_ = 0;
  std::uint64_t record_in_shard_ = 0;
  std::ifstream in_;
};

std::pair<DatasetManifest, std::vector<VideoSample>> read_dataset(const std::filesystem::path& dir);

/// Writes frame_000.png ... one RGB PNG per frame.
void export_png(const VideoSample& sample, const std::filesystem::path& dir);

}  // namespace pathtracker
