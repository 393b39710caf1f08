// Speed-adaptive preset switching: per-frame preset decisions driven by the
// acceleration needed to meet the remaining time budget.
#pragma once

#include <optional>

#include "saps/preset_speed_model.hpp"
#include "saps/speed_estimator.hpp"

namespace saps {

struct ControllerConfig {
  double up_threshold = 1.0;
  double down_threshold = 0.9;
  double up_keep = 0.5;
  double up_double = 2.0;
  double down_keep = 1.8;
  double down_double = 0.45;
  // Evaluate the +1/-1 tests before the +2/-2 tests, as the switching rule is
  // commonly printed. In that order the +2/-2 outcomes can never be reached.
  bool literal_branch_order = false;
  double update_weight = 0.05;
  // Table updates wait until this many full buffers have completed; earlier
  // estimates are biased high while the pipeline is still filling.
  int update_warmup_buffers = 1;

  void validate() const;
};

/// Acceleration factors around the current preset. Neighbours are empty at
/// the ends of the preset range.
struct AccelerationProbe {
  double current = 1.0;
  std::optional<double> faster;
  std::optional<double> slower;
};

/// Pure switching rule; returns a delta in {-2, ..., +2}.
int switching_delta(const AccelerationProbe& a, const ControllerConfig& cfg);

class Controller {
 public:
  Controller(int initial_preset, PresetSpeedTable table, ControllerConfig config, QpContext qp);

  int current_preset() const { return preset_; }
  const PresetSpeedTable& table() const { return table_; }
  const ControllerConfig& config() const { return config_; }
  QpContext qp() const { return qp_; }

  /// a(p) = v_budget / v_table(p) in pixel-rate units. Empty when the budget
  /// is exhausted or nothing remains.
  std::optional<double> acceleration(const EstimatorState& est, double preset) const;

  /// Delta the rule would apply right now, truncated so the result stays in
  /// [1, 12]. An exhausted budget yields the jump to preset 12.
  int decide_delta(const EstimatorState& est) const;

  /// Per-admitted-frame step: refresh the table from the latest estimate (once
  /// past the warm-up), then apply the switching rule. Holds the preset until the first completion.
  int step(const EstimatorState& est);

 private:
  int preset_;
  PresetSpeedTable table_;
  ControllerConfig config_;
  QpContext qp_;
};

/// Controller whose starting preset is the log-nearest to the target speed.
Controller initialize(double target_fps, int width, int height, QpContext qp,
                      PresetSpeedTable table, ControllerConfig config = {});

}  // namespace saps
