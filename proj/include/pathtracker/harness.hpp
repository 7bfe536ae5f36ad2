#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathtracker/dataio.hpp"
#include "pathtracker/tracker.hpp"

namespace pathtracker {

struct Accuracy {
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  /// Wilson score interval at 95%.
  double ci_low = 0.0;
  double ci_high = 0.0;
  double ci95_halfwidth = 0.0;
};

/// Throws DataError (length_mismatch, empty_input).
Accuracy evaluate(std::span<const Label> predictions, std::span<const Label> truths);

struct SweepSpec {
  std::vector<int> distractor_levels{1, 6, 15, 26};
  std::vector<int> frame_levels{32, 64, 128};
  std::vector<int> speed_levels{1, 2, 4};
  int samples_per_cell = 1000;
  std::uint64_t master_seed = 0;
  Layout layout = Layout::mixed;
  int max_resample_attempts = 1000;
};

struct SweepRow {
  int distractors = 0;
  int frames = 0;
  int speed = 0;
  std::size_t n = 0;
  double accuracy = 0.0;
  double ci95_halfwidth = 0.0;
  double mean_crossings = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

struct Cell {
  int frames;
  int speed;
  int distractors;
};

/// Valid cells of a sweep ordered by (frames, speed, distractors); invalid
/// (frames, speed) pairs are dropped.
std::vector<Cell> sweep_cells(const SweepSpec& spec);

/// Generator config for one cell; every cell draws from its own seed stream.
GenConfig cell_config(const SweepSpec& spec, const Cell& cell);

/// Generates and classifies samples_per_cell balanced samples per cell.
SweepRow run_cell(const SweepSpec& spec, const Cell& cell);
SweepReport run_sweep(const SweepSpec& spec);

std::string report_csv(const SweepReport& report);
void print_report_table(const SweepReport& report, std::ostream& os);

/// Predictions CSV: header `sample_index,label`, labels positive|negative.
void write_predictions_csv(std::span<const Prediction> predictions, const std::filesystem::path& path);
std::vector<std::pair<std::uint64_t, Label>> read_predictions_csv(const std::filesystem::path& path);

/// Accuracy of an external predictions file against a stored fold. Every
/// sample index must appear exactly once.
SweepRow score_external(const std::filesystem::path& predictions_file, const std::filesystem::path& dataset_dir);

/// Writes `count` samples of `fold` (count defaults to the config's fold size).
DatasetManifest generate_dataset(const GenConfig& cfg, Fold fold, const std::filesystem::path& dir,
                                 std::optional<std::uint64_t> count = {},
                                 int records_per_shard = kDefaultRecordsPerShard);

/// Flow-encodes every sample of a stored dataset into a new directory.
DatasetManifest encode_flow_dataset(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                                    const TvL1Params& params = {});

/// Runs the oracle over a stored dataset, in sample order.
std::vector<Prediction> track_dataset(const std::filesystem::path& dataset_dir);

struct DatasetStats {
  std::size_t n = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double mean_crossings = 0.0;
  std::size_t invalid = 0;
  /// First problem of each invalid sample, prefixed with its index.
  std::vector<std::string> problems;
};

DatasetStats dataset_stats(const std::filesystem::path& dataset_dir);

}  // namespace pathtracker
