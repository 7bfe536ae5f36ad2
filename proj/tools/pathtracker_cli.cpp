// Command-line front end: dataset generation, flow encoding, oracle tracking,
// scoring and difficulty sweeps.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pathtracker/errors.hpp"
#include "pathtracker/harness.hpp"

namespace fs = std::filesystem;
using namespace pathtracker;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kFailure = 3 };

void add_config_flags(CLI::App& cmd, GenConfig& cfg, std::string& layout) {
  cmd.add_option("--frames", cfg.frames, "Frames per video (32, 64, 128)")->capture_default_str();
  cmd.add_option("--distractors", cfg.distractors, "Distractor dots per video")->capture_default_str();
  cmd.add_option("--speed", cfg.speed, "Speed multiplier (1 normal, 2 fast, 4 very fast)")->capture_default_str();
  cmd.add_option("--layout", layout, "Channel layout (mixed, engineered)")->capture_default_str();
  cmd.add_option("--train-count", cfg.train_count, "Samples in the train fold")->capture_default_str();
  cmd.add_option("--test-count", cfg.test_count, "Samples in the test fold")->capture_default_str();
  cmd.add_option("--seed", cfg.master_seed, "Master seed (64-bit)")->capture_default_str();
  cmd.add_option("--max-resample-attempts", cfg.max_resample_attempts, "Redraw budget per dot")->capture_default_str();
}

void add_flow_flags(CLI::App& cmd, TvL1Params& p) {
  cmd.add_option("--lambda", p.lambda, "TV-L1 data-term weight")->capture_default_str();
  cmd.add_option("--theta", p.theta, "TV-L1 coupling")->capture_default_str();
  cmd.add_option("--tau", p.tau, "TV-L1 dual step")->capture_default_str();
  cmd.add_option("--warps", p.warps, "Warps per pyramid level")->capture_default_str();
  cmd.add_option("--inner-iters", p.inner_iters, "Iteration cap per warp")->capture_default_str();
  cmd.add_option("--pyramid-scale", p.pyramid_scale, "Downsampling factor")->capture_default_str();
  cmd.add_option("--pyramid-levels", p.pyramid_levels, "Pyramid levels")->capture_default_str();
  cmd.add_option("--stop-epsilon", p.stop_epsilon, "Convergence threshold")->capture_default_str();
  cmd.add_option("--support-radius", p.support_radius, "Zero-flow distance from lit pixels (-1 disables)")
      ->capture_default_str();
}

void print_row(const SweepRow& r, std::ostream& os) {
  SweepReport rep;
  rep.rows.push_back(r);
  print_report_table(rep, os);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pathtracker: appearance-free tracking benchmark toolkit"};
  app.require_subcommand(1);

  GenConfig cfg;
  std::string layout = "mixed";
  std::string fold = "both";
  std::string out_dir;
  int records_per_shard = kDefaultRecordsPerShard;
  auto* generate = app.add_subcommand("generate", "Generate train/test folds into a directory");
  add_config_flags(*generate, cfg, layout);
  generate->add_option("--fold", fold, "train, test or both")->capture_default_str();
  generate->add_option("--records-per-shard", records_per_shard)->capture_default_str();
  generate->add_option("--out", out_dir, "Output directory")->required();

  TvL1Params flow_params;
  std::string in_dir;
  auto* encode = app.add_subcommand("encode-flow", "Flow-encode a dataset");
  encode->add_option("--in", in_dir, "Source dataset directory")->required();
  encode->add_option("--out", out_dir, "Output directory")->required();
  add_flow_flags(*encode, flow_params);

  std::string data_dir, predictions_path;
  auto* track = app.add_subcommand("track", "Run the oracle tracker over a dataset");
  track->add_option("--data", data_dir, "Dataset directory")->required();
  track->add_option("--out", predictions_path, "Predictions CSV")->required();

  std::string report_path;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a predictions CSV against a dataset");
  evaluate_cmd->add_option("--predictions", predictions_path, "Predictions CSV")->required();
  evaluate_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  evaluate_cmd->add_option("--report", report_path, "Write the metrics row as CSV");

  SweepSpec spec;
  std::string sweep_layout = "mixed";
  bool table = false;
  auto* sweep = app.add_subcommand("sweep", "Oracle accuracy over a difficulty grid");
  sweep->add_option("--distractors", spec.distractor_levels, "Distractor levels")->capture_default_str();
  sweep->add_option("--frames", spec.frame_levels, "Frame levels")->capture_default_str();
  sweep->add_option("--speeds", spec.speed_levels, "Speed levels")->capture_default_str();
  sweep->add_option("--samples-per-cell", spec.samples_per_cell)->capture_default_str();
  sweep->add_option("--seed", spec.master_seed, "Master seed (64-bit)")->capture_default_str();
  sweep->add_option("--layout", sweep_layout)->capture_default_str();
  sweep->add_option("--max-resample-attempts", spec.max_resample_attempts)->capture_default_str();
  sweep->add_option("--out", report_path, "Report CSV (standard output when omitted)");
  sweep->add_flag("--table", table, "Also print a readable table");

  std::uint64_t index = 0;
  auto* export_cmd = app.add_subcommand("export-png", "Write one sample's frames as PNG files");
  export_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  export_cmd->add_option("--index", index, "Sample index")->required();
  export_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* stats = app.add_subcommand("stats", "Label balance, crossings and invariant recheck");
  stats->add_option("--data", data_dir, "Dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*generate) {
      cfg.layout = parse_layout(layout);
      validate(cfg);
      if (fold != "train" && fold != "test" && fold != "both") throw ConfigError("--fold must be train, test or both");
      for (Fold f : {Fold::train, Fold::test}) {
        if (fold != "both" && parse_fold(fold) != f) continue;
        const fs::path dir = fold == "both" ? fs::path(out_dir) / std::string(to_string(f)) : fs::path(out_dir);
        const DatasetManifest m = generate_dataset(cfg, f, dir, std::nullopt, records_per_shard);
        std::cout << to_string(f) << ": " << m.sample_count << " samples in " << m.shards.size() << " shard(s) -> "
                  << dir.string() << "\n";
      }
    } else if (*encode) {
      const DatasetManifest m = encode_flow_dataset(in_dir, out_dir, flow_params);
      std::cout << "flow-encoded " << m.sample_count << " samples -> " << out_dir << "\n";
    } else if (*track) {
      const auto predictions = track_dataset(data_dir);
      write_predictions_csv(predictions, predictions_path);
      std::cout << "wrote " << predictions.size() << " predictions -> " << predictions_path << "\n";
    } else if (*evaluate_cmd) {
      const SweepRow row = score_external(predictions_path, data_dir);
      print_row(row, std::cout);
      if (!report_path.empty()) {
        SweepReport rep;
        rep.rows.push_back(row);
        std::ofstream(report_path) << report_csv(rep);
      }
    } else if (*sweep) {
      spec.layout = parse_layout(sweep_layout);
      const SweepReport report = run_sweep(spec);
      if (report_path.empty()) {
        std::cout << report_csv(report);
      } else {
        std::ofstream out(report_path);
        out << report_csv(report);
        if (!out) throw DataError(DataErrorKind::io, "cannot write " + report_path);
      }
      if (table) print_report_table(report, std::cout);
    } else if (*export_cmd) {
      DatasetReader reader(data_dir);
      if (index >= reader.manifest().sample_count)
        throw DataError(DataErrorKind::index_out_of_range, "sample " + std::to_string(index));
      for (std::uint64_t i = 0;; ++i) {
        auto s = reader.next();
        if (i == index) {
          export_png(*s, out_dir);
          std::cout << "wrote " << s->frames() << " frames -> " << out_dir << "\n";
          break;
        }
      }
    } else if (*stats) {
      const DatasetStats st = dataset_stats(data_dir);
      std::cout << "samples: " << st.n << "\npositives: " << st.positives << "\nnegatives: " << st.negatives
                << "\nmean crossings: " << st.mean_crossings << "\ninvalid samples: " << st.invalid << "\n";
      for (const auto& p : st.problems) std::cout << "  " << p << "\n";
      if (st.invalid > 0) return kData;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const GenerationError& e) {
    std::cerr << "generation failed: " << e.what() << "\n";
    return kFailure;
  } catch (const TrackingError& e) {
    std::cerr << "tracking failed: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
