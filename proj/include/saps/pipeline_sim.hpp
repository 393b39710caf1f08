// Discrete-event model of a buffered FIFO encoder pipeline and the closed
// encode loop that drives the controller from it.
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "saps/controller.hpp"
#include "saps/preset_speed_model.hpp"
#include "saps/speed_estimator.hpp"

namespace saps {

struct NoiseModel {
  double sigma = 0.0;  // lognormal spread; 0 disables noise
  std::uint64_t seed = 0;
};

struct GopSpike {
  std::int64_t period = 0;  // frames between keyframes; 0 disables
  double multiplier = 3.0;
};

struct SequenceModel {
  int width = 1920;
  int height = 1080;
  std::int64_t n_total = 300;
  QpContext qp{kReferenceQp};
  PresetSpeedTable true_speed_curve = default_table();
  double sequence_scale = 1.0;
  NoiseModel noise;
  std::optional<GopSpike> gop_spike;

  void validate() const;
};

/// Per-frame multiplicative noise, a pure function of (seed, frame).
double noise_multiplier(const NoiseModel& noise, std::int64_t frame_idx);

/// CPU seconds to encode one frame at an integer preset.
double frame_cost(const SequenceModel& model, std::int64_t frame_idx, int preset);

struct InFlightFrame {
  std::int64_t frame = 0;
  int preset = kMinPreset;
  double cost = 0.0;
  double progress = 0.0;  // fraction of `cost` already consumed
};

struct Completion {
  std::int64_t frame = 0;
  double cumulative_cpu = 0.0;
};

/// Single-core FIFO pipeline holding at most `buffer_size` frames. On each
/// completion the oldest frame's remaining work is consumed and every other
/// in-flight frame advances by 1/B of its cost, so a frame that enters a
/// full buffer is exactly finished after B completion events.
class Pipeline {
 public:
  explicit Pipeline(std::int64_t buffer_size);

  void admit(std::int64_t frame, int preset, double cost);
  Completion advance_to_next_completion();

  bool full() const { return static_cast<std::int64_t>(in_flight_.size()) >= buffer_size_; }
  bool empty() const { return in_flight_.empty(); }
  std::size_t size() const { return in_flight_.size(); }
  std::int64_t buffer_size() const { return buffer_size_; }
  double consumed_cpu() const { return consumed_cpu_; }
  const std::deque<InFlightFrame>& in_flight() const { return in_flight_; }

 private:
  std::int64_t buffer_size_;
  std::deque<InFlightFrame> in_flight_;
  double consumed_cpu_ = 0.0;
};

/// (frame index, integer preset) -> CPU seconds.
using CostFn = std::function<double(std::int64_t, int)>;

struct FrameRecord {
  std::int64_t frame = 0;
  int preset = kMinPreset;
  double cost = 0.0;
  // Observed when this frame completed.
  double cumulative_cpu = 0.0;
  std::optional<double> estimated_fps;
  double actual_fps = 0.0;  // completed frames / their summed cost
  std::int64_t frames_in_at_completion = 0;
};

struct EncodeResult {
  std::vector<FrameRecord> frames;
  double target_seconds = 0.0;
  double total_cpu = 0.0;
  double real_fps = 0.0;  // n_total / total_cpu
  bool budget_overrun = false;
};

/// Chooses the preset for the next admitted frame.
using PresetPolicy = std::function<int(const EstimatorState&)>;

/// Runs the loop until every frame completes, asking `policy` for a preset at
/// each admission.
EncodeResult run_encode(const CostFn& cost, const PresetPolicy& policy,
                        EstimatorState& estimator);

/// Closed loop with presets from `controller.step`.
EncodeResult run_encode(const CostFn& cost, Controller& controller, EstimatorState& estimator);

/// Convenience: synthetic model, initial preset from the target, fresh state.
EncodeResult run_encode(const SequenceModel& model, double target_fps, std::int64_t buffer_size,
                        const ControllerConfig& config = {},
                        const PresetSpeedTable& table = default_table());

}  // namespace saps
