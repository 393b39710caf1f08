#include "saps/speed_estimator.hpp"

#include <algorithm>

#include "saps/preset_speed_model.hpp"

namespace saps {

EstimatorState::EstimatorState(std::int64_t total_frames, double target_seconds, int width,
                               int height, std::int64_t buffer_size)
    : n_total_(total_frames),
      t_target_(target_seconds),
      width_(width),
      height_(height),
      buffer_size_(buffer_size) {
  if (total_frames < 0 || buffer_size < 1) {
    throw ContractViolation("estimator needs n_total >= 0 and buffer size >= 1");
  }
  if (width <= 0 || height <= 0) {
    throw ContractViolation("frame dimensions must be positive");
  }
  if (!(target_seconds > 0.0)) {
    throw ContractViolation("target time must be positive");
  }
}

void EstimatorState::record_admission(int preset) {
  if (n_in_ >= n_total_) {
    throw ContractViolation("admission beyond n_total");
  }
  if (n_in_ - n_out_ >= buffer_size_) {
    throw ContractViolation("admission would overfill the pipeline buffer");
  }
  if (preset < kMinPreset || preset > kMaxPreset) {
    throw ContractViolation("admitted preset outside [1, 12]");
  }
  ++n_in_;
  preset_sum_ += preset;
  admitted_prefix_.push_back(admitted_prefix_.back() + preset);
}

double EstimatorState::completed_preset_sum() const {
  return admitted_prefix_[static_cast<std::size_t>(n_out_)];
}

void EstimatorState::record_completion(double cumulative_cpu_seconds) {
  if (n_out_ >= n_in_) {
    throw ContractViolation("completion without an in-flight frame");
  }
  if (!(cumulative_cpu_seconds >= t_cpu_)) {
    throw ContractViolation("cumulative CPU time went backwards");
  }
  ++n_out_;
  t_cpu_ = cumulative_cpu_seconds;
}

double contributing_frames(const EstimatorState& s) {
  return 0.5 * static_cast<double>(s.frames_out() + s.frames_in());
}

std::optional<double> current_speed(const EstimatorState& s) {
  if (s.frames_out() < 1 || !(s.cpu_seconds() > 0.0)) {
    return std::nullopt;
  }
  return contributing_frames(s) / s.cpu_seconds();
}

Budget budget_speed(const EstimatorState& s) {
  const double n_enc = contributing_frames(s);
  const auto remaining = static_cast<double>(s.total_frames()) - n_enc;
  if (remaining <= 0.0) {
    return {Budget::Status::kDone, 0.0};
  }
  if (s.cpu_seconds() >= s.target_seconds()) {
    return {Budget::Status::kExhausted, 0.0};
  }
  return {Budget::Status::kOk, remaining / (s.target_seconds() - s.cpu_seconds())};
}

std::optional<double> average_preset(const EstimatorState& s) {
  if (s.frames_in() < 1) {
    return std::nullopt;
  }
  return s.preset_sum() / contributing_frames(s);
}

std::optional<double> average_preset_for_lookup(const EstimatorState& s) {
  auto p = average_preset(s);
  if (!p) {
    return std::nullopt;
  }
  return std::clamp(*p, static_cast<double>(kMinPreset), static_cast<double>(kMaxPreset));
}

std::optional<double> contributing_average_preset(const EstimatorState& s) {
  if (s.frames_in() < 1) {
    return std::nullopt;
  }
  return (s.completed_preset_sum() + s.preset_sum()) /
         static_cast<double>(s.frames_out() + s.frames_in());
}

double fps_to_pixel_rate(double fps, int width, int height) {
  return static_cast<double>(width) * height * fps / 1000.0;
}

double pixel_rate_to_fps(double kpps, int width, int height) {
  const double area = static_cast<double>(width) * height;
  if (!(area > 0.0)) {
    throw ContractViolation("zero-area frame");
  }
  return kpps * 1000.0 / area;
}

}  // namespace saps
