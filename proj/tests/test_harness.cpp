#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "pathtracker/errors.hpp"
#include "pathtracker/harness.hpp"
#include "temp_dir.hpp"

using namespace pathtracker;

namespace {

std::vector<Label> repeat(Label l, std::size_t n) { return std::vector<Label>(n, l); }

Label flip(Label l) { return l == Label::positive ? Label::negative : Label::positive; }

SweepSpec tiny_spec() {
  SweepSpec spec;
  spec.distractor_levels = {1};
  spec.frame_levels = {32};
  spec.speed_levels = {1};
  spec.samples_per_cell = 20;
  spec.master_seed = 9;
  return spec;
}

struct SmallFold {
  SmallFold() {
    GenConfig cfg;
    cfg.distractors = 1;
    cfg.master_seed = 404;
    manifest = generate_dataset(cfg, Fold::test, dir.path(), 8, 3);
    DatasetReader r(dir.path());
    truth = r.labels();
  }
  void write_csv(const std::string& body) { std::ofstream(csv) << "sample_index,label\n" << body; }
  TempDir dir{"harness"};
  std::filesystem::path csv = dir.path().parent_path() / (dir.path().filename().string() + ".csv");
  DatasetManifest manifest;
  std::vector<Label> truth;
};

DataErrorKind score_error(SmallFold& f) {
  try {
    score_external(f.csv, f.dir.path());
  } catch (const DataError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "score_external accepted a bad file";
  return DataErrorKind::io;
}

}  // namespace

TEST(Evaluate, PerfectAndInverted) {
  const auto t = repeat(Label::positive, 10);
  EXPECT_EQ(evaluate(t, t).accuracy, 1.0);
  EXPECT_EQ(evaluate(repeat(Label::negative, 10), t).accuracy, 0.0);
}

TEST(Evaluate, WilsonInterval) {
  std::vector<Label> truth(10000, Label::positive);
  std::vector<Label> pred = truth;
  for (std::size_t i = 0; i < 612; ++i) pred[i] = Label::negative;
  const Accuracy a = evaluate(pred, truth);
  EXPECT_EQ(a.correct, 9388u);
  EXPECT_DOUBLE_EQ(a.accuracy, 0.9388);
  const double z = 1.959963984540054, n = 10000.0, p = 0.9388;
  const double denom = 1.0 + z * z / n;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  const double mid = (p + z * z / (2 * n)) / denom;
  EXPECT_NEAR(a.ci95_halfwidth, half, 1e-12);
  EXPECT_NEAR(a.ci95_halfwidth, 0.0047, 1e-5);
  EXPECT_NEAR(a.ci_low, mid - half, 1e-12);
  EXPECT_NEAR(a.ci_high, mid + half, 1e-12);
}

TEST(Evaluate, Errors) {
  try {
    evaluate(repeat(Label::positive, 2), repeat(Label::positive, 3));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataErrorKind::length_mismatch);
  }
  try {
    evaluate({}, {});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataErrorKind::empty_input);
  }
}

TEST(Sweep, SingleCell) {
  const SweepReport r = run_sweep(tiny_spec());
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].n, 20u);
  EXPECT_GE(r.rows[0].accuracy, 0.8);
  EXPECT_EQ(report_csv(r).substr(0, 65), "distractors,frames,speed,n,accuracy,ci95_halfwidth,mean_crossings");
}

TEST(Sweep, DefaultGridHasTwentyFourCells) {
  const auto cells = sweep_cells(SweepSpec{});
  ASSERT_EQ(cells.size(), 24u);
  for (const Cell& c : cells) {
    EXPECT_TRUE(is_valid_frames_speed(c.frames, c.speed));
    EXPECT_FALSE(c.frames == 64 && c.speed == 4);
    EXPECT_FALSE(c.frames == 128 && c.speed >= 2);
  }
  EXPECT_EQ(cells.front().frames, 32);
  EXPECT_EQ(cells.front().distractors, 1);
  EXPECT_EQ(cells.back().frames, 128);
  EXPECT_EQ(cells.back().distractors, 26);
}

TEST(Sweep, DeterministicAndCellsIndependent) {
  const SweepSpec spec = tiny_spec();
  EXPECT_EQ(report_csv(run_sweep(spec)), report_csv(run_sweep(spec)));
  const Cell a{32, 1, 1}, b{32, 1, 6};
  EXPECT_NE(cell_config(spec, a).master_seed, cell_config(spec, b).master_seed);
}

TEST(Predictions, CsvRoundTrip) {
  TempDir dir("csv");
  std::vector<Prediction> preds(3);
  for (std::size_t i = 0; i < 3; ++i) {
    preds[i].sample_index = i;
    preds[i].label = i == 1 ? Label::positive : Label::negative;
  }
  write_predictions_csv(preds, dir / "p.csv");
  std::ifstream in(dir / "p.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "sample_index,label");
  const auto back = read_predictions_csv(dir / "p.csv");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[1].second, Label::positive);
}

TEST(ScoreExternal, PerfectAndInverted) {
  SmallFold f;
  std::string perfect, inverted;
  for (std::size_t i = 0; i < f.truth.size(); ++i) {
    perfect += std::to_string(i) + "," + std::string(to_string(f.truth[i])) + "\n";
    inverted += std::to_string(i) + "," + std::string(to_string(flip(f.truth[i]))) + "\n";
  }
  f.write_csv(perfect);
  const SweepRow row = score_external(f.csv, f.dir.path());
  EXPECT_EQ(row.accuracy, 1.0);
  EXPECT_EQ(row.n, 8u);
  f.write_csv(inverted);
  EXPECT_EQ(score_external(f.csv, f.dir.path()).accuracy, 0.0);
  std::filesystem::remove(f.csv);
}

TEST(ScoreExternal, BadFiles) {
  SmallFold f;
  std::string body;
  for (std::size_t i = 0; i < 7; ++i) body += std::to_string(i) + ",positive\n";
  f.write_csv(body);
  EXPECT_EQ(score_error(f), DataErrorKind::missing_index);
  f.write_csv(body + "99,negative\n");
  EXPECT_EQ(score_error(f), DataErrorKind::index_out_of_range);
  f.write_csv(body + "7,perhaps\n");
  EXPECT_EQ(score_error(f), DataErrorKind::unknown_label);
  f.write_csv(body + "6,negative\n");
  EXPECT_EQ(score_error(f), DataErrorKind::malformed);
  std::filesystem::remove(f.csv);
}

TEST(ScoreExternal, TrackedFoldScoresLikeSweep) {
  SmallFold f;
  const auto preds = track_dataset(f.dir.path());
  write_predictions_csv(preds, f.csv);
  const SweepRow row = score_external(f.csv, f.dir.path());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i].label == f.truth[i];
  EXPECT_DOUBLE_EQ(row.accuracy, static_cast<double>(correct) / 8.0);
  std::filesystem::remove(f.csv);
}

TEST(Stats, GeneratedFoldIsValidAndBalanced) {
  SmallFold f;
  const DatasetStats st = dataset_stats(f.dir.path());
  EXPECT_EQ(st.n, 8u);
  EXPECT_EQ(st.positives, 4u);
  EXPECT_EQ(st.negatives, 4u);
  EXPECT_EQ(st.invalid, 0u);
}

TEST(FlowDataset, EncodesStoredFold) {
  SmallFold f;
  TempDir out("flowset");
  TvL1Params p;
  p.warps = 1;
  p.inner_iters = 5;
  const DatasetManifest m = encode_flow_dataset(f.dir.path(), out / "flow", p);
  EXPECT_EQ(m.layout, Layout::flow);
  EXPECT_EQ(m.sample_count, 8u);
  ASSERT_TRUE(m.flow_params.has_value());
  EXPECT_EQ(m.flow_params->warps, 1);
  DatasetReader r(out / "flow");
  EXPECT_EQ(r.labels(), f.truth);
}
