// Encoding-speed estimate and remaining-time speed budget from pipeline
// counters and cumulative CPU time.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace saps {

/// Outcome of the budget computation. `fps` is meaningful only for kOk.
struct Budget {
  enum class Status { kOk, kExhausted, kDone };
  Status status = Status::kOk;
  double fps = 0.0;

  bool ok() const { return status == Status::kOk; }
};

class EstimatorState {
 public:
  /// `buffer_size` bounds n_in - n_out. Zero-area frames are rejected.
  EstimatorState(std::int64_t total_frames, double target_seconds, int width, int height,
                 std::int64_t buffer_size);

  void record_admission(int preset);
  void record_completion(double cumulative_cpu_seconds);

  std::int64_t frames_in() const { return n_in_; }
  std::int64_t frames_out() const { return n_out_; }
  std::int64_t total_frames() const { return n_total_; }
  double cpu_seconds() const { return t_cpu_; }
  double target_seconds() const { return t_target_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::int64_t buffer_size() const { return buffer_size_; }
  double preset_sum() const { return preset_sum_; }
  /// Sum of presets of the first n_out admitted frames (completion is FIFO).
  double completed_preset_sum() const;

 private:
  std::int64_t n_in_ = 0;
  std::int64_t n_out_ = 0;
  std::int64_t n_total_;
  double t_cpu_ = 0.0;
  double t_target_;
  int width_;
  int height_;
  std::int64_t buffer_size_;
  double preset_sum_ = 0.0;
  std::vector<double> admitted_prefix_{0.0};  // prefix sums of admitted presets
};

/// (n_out + n_in) / 2.
double contributing_frames(const EstimatorState& s);

/// n_enc / t_cpu in fps; empty before the first completed frame.
std::optional<double> current_speed(const EstimatorState& s);

/// (n_total - n_enc) / (t_target - t_cpu) in fps.
Budget budget_speed(const EstimatorState& s);

/// preset_sum / n_enc; empty before any admission. Not clamped.
std::optional<double> average_preset(const EstimatorState& s);

/// average_preset clamped into [1, 12], suitable for table lookup.
std::optional<double> average_preset_for_lookup(const EstimatorState& s);

/// Preset mean weighted like n_enc: completed frames count fully, in-flight
/// frames by half, i.e. (S_out + S_in) / (n_out + n_in). Always in [1, 12].
std::optional<double> contributing_average_preset(const EstimatorState& s);

double fps_to_pixel_rate(double fps, int width, int height);
double pixel_rate_to_fps(double kpps, int width, int height);

}  // namespace saps
