#include "saps/controller.hpp"

#include <algorithm>
#include <utility>

namespace saps {

void ControllerConfig::validate() const {
  if (!(down_threshold < up_threshold)) {
    throw ContractViolation("down_threshold must be below up_threshold");
  }
  if (!(up_keep < up_double)) {
    throw ContractViolation("up_keep must be below up_double");
  }
  if (!(down_double < down_keep)) {
    throw ContractViolation("down_double must be below down_keep");
  }
  if (!(update_weight >= 0.0 && update_weight <= 1.0)) {
    throw ContractViolation("update_weight outside [0, 1]");
  }
  if (update_warmup_buffers < 0) {
    throw ContractViolation("update_warmup_buffers must be non-negative");
  }
}

int switching_delta(const AccelerationProbe& a, const ControllerConfig& cfg) {
  if (a.current > cfg.up_threshold) {
    if (!a.faster) {
      return 0;
    }
    const double next = *a.faster;
    if (cfg.literal_branch_order) {
      if (next > cfg.up_keep) return +1;
      if (next > cfg.up_double) return +2;
      return 0;
    }
    if (next > cfg.up_double) return +2;
    if (next > cfg.up_keep) return +1;
    return 0;
  }
  if (a.current < cfg.down_threshold) {
    if (!a.slower) {
      return 0;
    }
    const double prev = *a.slower;
    if (cfg.literal_branch_order) {
      if (prev < cfg.down_keep) return -1;
      if (prev < cfg.down_double) return -2;
      return 0;
    }
    if (prev < cfg.down_double) return -2;
    if (prev < cfg.down_keep) return -1;
    return 0;
  }
  return 0;
}

Controller::Controller(int initial_preset, PresetSpeedTable table, ControllerConfig config,
                       QpContext qp)
    : preset_(initial_preset), table_(std::move(table)), config_(config), qp_(qp) {
  if (initial_preset < kMinPreset || initial_preset > kMaxPreset) {
    throw ContractViolation("initial preset outside [1, 12]");
  }
  config_.validate();
}

std::optional<double> Controller::acceleration(const EstimatorState& est, double preset) const {
  const Budget budget = budget_speed(est);
  if (!budget.ok()) {
    return std::nullopt;
  }
  const double budget_kpps = fps_to_pixel_rate(budget.fps, est.width(), est.height());
  return budget_kpps / expected_speed(table_, preset, qp_);
}

int Controller::decide_delta(const EstimatorState& est) const {
  const Budget budget = budget_speed(est);
  if (budget.status == Budget::Status::kExhausted) {
    return kMaxPreset - preset_;
  }
  if (budget.status == Budget::Status::kDone) {
    return 0;
  }
  AccelerationProbe probe;
  probe.current = *acceleration(est, preset_);
  if (preset_ < kMaxPreset) {
    probe.faster = acceleration(est, preset_ + 1);
  }
  if (preset_ > kMinPreset) {
    probe.slower = acceleration(est, preset_ - 1);
  }
  const int delta = switching_delta(probe, config_);
  return std::clamp(preset_ + delta, kMinPreset, kMaxPreset) - preset_;
}

int Controller::step(const EstimatorState& est) {
  const auto speed_fps = current_speed(est);
  if (!speed_fps) {
    return preset_;
  }
  // The table is anchored at the reference QP, so the observation is divided
  // by the QP factor before it is compared against table entries.
  const bool warmed_up = est.frames_out() >= config_.update_warmup_buffers * est.buffer_size();
  if (const auto p_avg = contributing_average_preset(est); p_avg && warmed_up) {
    const double observed_kpps =
        fps_to_pixel_rate(*speed_fps, est.width(), est.height()) / qp_scale(qp_);
    table_ = update_table(table_, observed_kpps, *p_avg, config_.update_weight);
  }
  preset_ = std::clamp(preset_ + decide_delta(est), kMinPreset, kMaxPreset);
  return preset_;
}

Controller initialize(double target_fps, int width, int height, QpContext qp,
                      PresetSpeedTable table, ControllerConfig config) {
  if (!(target_fps > 0.0)) {
    throw ContractViolation("target speed must be positive");
  }
  const int preset = nearest_preset(table, fps_to_pixel_rate(target_fps, width, height), qp);
  return Controller(preset, std::move(table), config, qp);
}

}  // namespace saps
