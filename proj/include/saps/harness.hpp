// Experiment grids over classes x targets x QPs, the speed-error metric and
// the estimator validation series.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saps/controller.hpp"
#include "saps/pipeline_sim.hpp"
#include "saps/preset_speed_model.hpp"

namespace saps {

struct ClassSpec {
  std::string name;
  int width = 0;
  int height = 0;
  int sequences = 8;
  std::uint64_t seed_base = 0;
};

struct ExperimentConfig {
  std::vector<ClassSpec> classes;
  std::vector<double> targets;
  std::vector<int> qps;
  std::int64_t frames = 300;
  std::int64_t buffer_size = 16;
  ControllerConfig controller;
  PresetSpeedTable table = default_table();

  std::string mode = "synthetic";  // "synthetic" | "trace"
  std::vector<std::string> traces;

  double noise_sigma = 0.2;
  double scale_min = 0.5;
  double scale_max = 2.0;
  std::int64_t gop_period = 250;
  double gop_multiplier = 3.0;
  std::uint64_t seed = 1;
  int jobs = 1;

  void validate() const;
};

/// Three geometry classes (1920x1080, 1280x720, 640x360), eight targets from
/// 16 down to 0.125 fps and QPs {23, 27, 33, 37}.
ExperimentConfig default_experiment();

/// Mean of |v_real - v_target| / v_target. Throws on empty input.
double speed_error(const std::vector<std::pair<double, double>>& runs);

/// True when the target pixel rate lies within [expected(1), expected(12)].
bool reachability(int width, int height, double target_fps, const PresetSpeedTable& table,
                  QpContext qp);

struct RunRecord {
  std::string class_name;
  int sequence = 0;
  int qp = 0;
  double target_fps = 0.0;
  bool reachable = true;
  double sequence_scale = 1.0;
  double real_fps = 0.0;
  double target_seconds = 0.0;
  double total_cpu = 0.0;
  double relative_error = 0.0;
  int initial_preset = 0;
  int final_preset = 0;
  int min_preset = 0;
  int max_preset = 0;
  double mean_preset = 0.0;
  std::string error;  // nonempty when the run failed

  bool ok() const { return error.empty(); }
};

struct CellResult {
  std::string class_name;
  int width = 0;
  int height = 0;
  double target_fps = 0.0;
  bool reachable = true;
  std::int64_t run_count = 0;
  std::int64_t failed_runs = 0;
  std::optional<double> epsilon;
};

struct ClassSummary {
  std::string name;
  std::optional<double> epsilon;  // mean of reachable cells
};

struct Report {
  int schema_version = 1;
  ExperimentConfig config;
  std::vector<CellResult> cells;
  std::vector<ClassSummary> classes;
  std::vector<RunRecord> runs;
  std::optional<double> overall_cell_mean;  // mean over reachable cells
  std::optional<double> overall_run_mean;   // mean over runs in reachable cells
};

/// Synthetic sequence `sequence` of class `cls` at `qp`. Content (scale and
/// noise) depends only on the seeds, not on the QP or target.
SequenceModel make_sequence(const ExperimentConfig& config, const ClassSpec& cls, int sequence,
                            int qp);

Report run_grid(const ExperimentConfig& config);

struct ValidationPoint {
  std::int64_t completed = 0;
  double estimated_fps = 0.0;
  double running_fps = 0.0;  // completed frames / their summed cost
  double real_fps = 0.0;     // whole-run frames / total CPU time
  double ratio = 0.0;        // estimated / real
  bool buffer_boundary = false;
};

struct ValidationSetup {
  int width = 1920;
  int height = 1080;
  std::int64_t frames = 160;
  std::int64_t buffer_size = 16;
  int qp = 27;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  std::optional<int> constant_preset;  // empty: closed loop at target_fps
  double target_fps = 1.0;
  double sequence_scale = 1.0;
  ControllerConfig controller;
  PresetSpeedTable table = default_table();
};

std::vector<ValidationPoint> validate_estimator(const ValidationSetup& setup);

/// Estimator validation over the first class, QP and target of a grid config.
ValidationSetup validation_setup_from(const ExperimentConfig& config, std::int64_t frames);

}  // namespace saps
