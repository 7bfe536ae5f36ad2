#include "pathtracker/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "pathtracker/errors.hpp"

namespace pathtracker {
namespace fs = std::filesystem;

namespace {

constexpr double kZ95 = 1.959963984540054;

std::string cell_tag(const Cell& c) {
  return "cell(frames=" + std::to_string(c.frames) + ", speed=" + std::to_string(c.speed) +
         ", distractors=" + std::to_string(c.distractors) + ")";
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace

Accuracy evaluate(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size())
    throw DataError(DataErrorKind::length_mismatch, std::to_string(predictions.size()) + " predictions vs " +
                                                        std::to_string(truths.size()) + " truths");
  if (truths.empty()) throw DataError(DataErrorKind::empty_input, "nothing to evaluate");
  Accuracy a;
  a.n = truths.size();
  for (std::size_t i = 0; i < a.n; ++i) a.correct += predictions[i] == truths[i] ? 1 : 0;
  const double n = static_cast<double>(a.n);
  const double p = static_cast<double>(a.correct) / n;
  a.accuracy = p;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  a.ci_low = center - half;
  a.ci_high = center + half;
  a.ci95_halfwidth = half;
  return a;
}

std::vector<Cell> sweep_cells(const SweepSpec& spec) {
  std::vector<Cell> cells;
  for (int f : spec.frame_levels)
    for (int s : spec.speed_levels)
      if (is_valid_frames_speed(f, s))
        for (int d : spec.distractor_levels) cells.push_back({f, s, d});
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return std::tie(a.frames, a.speed, a.distractors) < std::tie(b.frames, b.speed, b.distractors);
  });
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](const Cell& a, const Cell& b) {
                            return a.frames == b.frames && a.speed == b.speed && a.distractors == b.distractors;
                          }),
              cells.end());
  return cells;
}

GenConfig cell_config(const SweepSpec& spec, const Cell& cell) {
  GenConfig cfg;
  cfg.frames = cell.frames;
  cfg.speed = cell.speed;
  cfg.distractors = cell.distractors;
  cfg.layout = spec.layout;
  cfg.max_resample_attempts = spec.max_resample_attempts;
  cfg.train_count = 0;
  cfg.test_count = spec.samples_per_cell;
  cfg.master_seed = mix_seed({spec.master_seed, static_cast<std::uint64_t>(cell.frames),
                              static_cast<std::uint64_t>(cell.speed), static_cast<std::uint64_t>(cell.distractors)});
  return cfg;
}

SweepRow run_cell(const SweepSpec& spec, const Cell& cell) {
  if (spec.samples_per_cell < 1) throw ConfigError("samples_per_cell must be >= 1");
  const GenConfig cfg = cell_config(spec, cell);
  std::vector<Label> predicted, truth;
  predicted.reserve(static_cast<std::size_t>(spec.samples_per_cell));
  truth.reserve(static_cast<std::size_t>(spec.samples_per_cell));
  double crossings = 0.0;
  for (int i = 0; i < spec.samples_per_cell; ++i) {
    try {
      const VideoSample s = generate_sample(cfg, Fold::test, static_cast<std::uint64_t>(i));
      truth.push_back(s.label);
      predicted.push_back(classify_sample(s));
      crossings += crossing_stats(s);
    } catch (const GenerationError& e) {
      throw GenerationError(cell_tag(cell) + " sample " + std::to_string(i) + ": " + e.what());
    } catch (const TrackingError& e) {
      throw TrackingError(cell_tag(cell) + " sample " + std::to_string(i) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(cell_tag(cell) + ": " + e.what());
    }
  }
  const Accuracy acc = evaluate(predicted, truth);
  return {cell.distractors, cell.frames, cell.speed, acc.n, acc.accuracy, acc.ci95_halfwidth,
          crossings / static_cast<double>(acc.n)};
}

SweepReport run_sweep(const SweepSpec& spec) {
  SweepReport r;
  for (const Cell& c : sweep_cells(spec)) r.rows.push_back(run_cell(spec, c));
  return r;
}

std::string report_csv(const SweepReport& report) {
  std::ostringstream os;
  os << "distractors,frames,speed,n,accuracy,ci95_halfwidth,mean_crossings\n";
  for (const auto& r : report.rows)
    os << r.distractors << ',' << r.frames << ',' << r.speed << ',' << r.n << ',' << fmt(r.accuracy, 6) << ','
       << fmt(r.ci95_halfwidth, 6) << ',' << fmt(r.mean_crossings, 6) << '\n';
  return os.str();
}

void print_report_table(const SweepReport& report, std::ostream& os) {
  os << std::left << std::setw(12) << "distractors" << std::setw(8) << "frames" << std::setw(11) << "speed"
     << std::setw(8) << "n" << std::setw(18) << "accuracy (%)" << "mean crossings\n";
  for (const auto& r : report.rows) {
    os << std::left << std::setw(12) << r.distractors << std::setw(8) << r.frames << std::setw(11)
       << speed_name(r.speed) << std::setw(8) << r.n << std::setw(18)
       << (fmt(100.0 * r.accuracy, 2) + " +/- " + fmt(100.0 * r.ci95_halfwidth, 2)) << fmt(r.mean_crossings, 2)
       << '\n';
  }
}

void write_predictions_csv(std::span<const Prediction> predictions, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(DataErrorKind::io, "cannot write " + path.string());
  out << "sample_index,label\n";
  for (const auto& p : predictions) out << p.sample_index << ',' << to_string(p.label) << '\n';
  if (!out) throw DataError(DataErrorKind::io, "write failed for " + path.string());
}

std::vector<std::pair<std::uint64_t, Label>> read_predictions_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::io, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "sample_index,label")
    throw DataError(DataErrorKind::malformed, path.string() + ": expected header 'sample_index,label'");
  std::vector<std::pair<std::uint64_t, Label>> out;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (comma == std::string::npos) throw DataError(DataErrorKind::malformed, where + ": expected two fields");
    const std::string index_text = trim(line.substr(0, comma));
    std::uint64_t index = 0;
    std::size_t used = 0;
    try {
      if (index_text.empty() || index_text.front() == '-') throw std::invalid_argument("sign");
      index = std::stoull(index_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != index_text.size())
      throw DataError(DataErrorKind::malformed, where + ": bad sample_index '" + index_text + "'");
    Label label;
    try {
      label = parse_label(trim(line.substr(comma + 1)));
    } catch (const DataError& e) {
      throw DataError(DataErrorKind::unknown_label, where + ": " + trim(line.substr(comma + 1)));
    }
    out.emplace_back(index, label);
  }
  return out;
}

SweepRow score_external(const fs::path& predictions_file, const fs::path& dataset_dir) {
  const auto predictions = read_predictions_csv(predictions_file);
  DatasetReader reader(dataset_dir);
  const auto& m = reader.manifest();
  const std::uint64_t n = m.sample_count;

  std::vector<Label> predicted(n, Label::negative);
  std::vector<char> seen(n, 0);
  for (const auto& [index, label] : predictions) {
    if (index >= n)
      throw DataError(DataErrorKind::index_out_of_range,
                      "sample_index " + std::to_string(index) + " but the fold has " + std::to_string(n) + " samples");
    if (seen[index]) throw DataError(DataErrorKind::malformed, "sample_index " + std::to_string(index) + " listed twice");
    seen[index] = 1;
    predicted[index] = label;
  }
  for (std::uint64_t i = 0; i < n; ++i)
    if (!seen[i]) throw DataError(DataErrorKind::missing_index, "no prediction for sample_index " + std::to_string(i));

  std::vector<Label> truth;
  truth.reserve(n);
  double crossings = 0.0;
  while (auto s = reader.next()) {
    truth.push_back(s->label);
    crossings += crossing_stats(*s);
  }
  const Accuracy acc = evaluate(predicted, truth);
  return {m.config.distractors, m.config.frames, m.config.speed, acc.n, acc.accuracy, acc.ci95_halfwidth,
          crossings / static_cast<double>(acc.n)};
}

DatasetManifest generate_dataset(const GenConfig& cfg, Fold fold, const fs::path& dir,
                                 std::optional<std::uint64_t> count, int records_per_shard) {
  validate(cfg);
  const std::uint64_t total = count.value_or(static_cast<std::uint64_t>(cfg.fold_count(fold)));
  DatasetManifest m;
  m.config = cfg;
  m.fold = fold;
  m.layout = cfg.layout;
  m.records_per_shard = records_per_shard;
  DatasetWriter writer(dir, m, total);
  for (std::uint64_t i = 0; i < total; ++i) {
    try {
      writer.append(generate_sample(cfg, fold, i));
    } catch (const GenerationError& e) {
      throw GenerationError("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  return writer.finish();
}

DatasetManifest encode_flow_dataset(const fs::path& in_dir, const fs::path& out_dir, const TvL1Params& params) {
  params.validate();
  DatasetReader reader(in_dir);
  DatasetManifest m = reader.manifest();
  if (m.layout == Layout::flow) throw ConfigError(in_dir.string() + " is already flow-encoded");
  const std::uint64_t count = m.sample_count;
  m.layout = Layout::flow;
  m.flow_params = params;
  DatasetWriter writer(out_dir, m, count);
  while (auto s = reader.next()) writer.append(encode_flow_video(*s, params));
  return writer.finish();
}

std::vector<Prediction> track_dataset(const fs::path& dataset_dir) {
  DatasetReader reader(dataset_dir);
  std::vector<Prediction> out;
  out.reserve(reader.manifest().sample_count);
  std::uint64_t index = 0;
  while (auto s = reader.next()) {
    try {
      out.push_back(classify(tracker_input(*s), index));
    } catch (const TrackingError& e) {
      throw TrackingError("sample " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  return out;
}

DatasetStats dataset_stats(const fs::path& dataset_dir) {
  DatasetReader reader(dataset_dir);
  const GenConfig& cfg = reader.manifest().config;
  DatasetStats st;
  double crossings = 0.0;
  std::uint64_t index = 0;
  while (auto s = reader.next()) {
    ++st.n;
    (s->label == Label::positive ? st.positives : st.negatives) += 1;
    crossings += crossing_stats(*s);
    auto problems = check_sample(*s, cfg);
    if (s->label != label_for_index(index)) problems.insert(problems.begin(), "label out of interleaved order");
    if (!problems.empty()) {
      ++st.invalid;
      st.problems.push_back("sample " + std::to_string(index) + ": " + problems.front());
    }
    ++index;
  }
  st.mean_crossings = st.n ? crossings / static_cast<double>(st.n) : 0.0;
  return st;
}

}  // namespace pathtracker
