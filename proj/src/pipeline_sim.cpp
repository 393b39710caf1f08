#include "saps/pipeline_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

namespace saps {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void SequenceModel::validate() const {
  if (width <= 0 || height <= 0 || n_total < 0) {
    throw ContractViolation("sequence needs positive dimensions and n_total >= 0");
  }
  if (!(sequence_scale > 0.0)) {
    throw ContractViolation("sequence_scale must be positive");
  }
  if (!(noise.sigma >= 0.0)) {
    throw ContractViolation("noise sigma must be nonnegative");
  }
  if (gop_spike && (gop_spike->period < 0 || !(gop_spike->multiplier > 0.0))) {
    throw ContractViolation("keyframe spike needs period >= 0 and a positive multiplier");
  }
}

double noise_multiplier(const NoiseModel& noise, std::int64_t frame_idx) {
  if (noise.sigma == 0.0) {
    return 1.0;
  }
  std::mt19937_64 rng(splitmix64(noise.seed ^ splitmix64(static_cast<std::uint64_t>(frame_idx))));
  std::normal_distribution<double> normal(0.0, 1.0);
  return std::exp(noise.sigma * normal(rng));
}

double frame_cost(const SequenceModel& model, std::int64_t frame_idx, int preset) {
  const double kpps = model.sequence_scale * model.true_speed_curve.at(preset) * qp_scale(model.qp);
  double cost = static_cast<double>(model.width) * model.height / (1000.0 * kpps);
  cost *= noise_multiplier(model.noise, frame_idx);
  if (model.gop_spike && model.gop_spike->period > 0 && frame_idx % model.gop_spike->period == 0) {
    cost *= model.gop_spike->multiplier;
  }
  return cost;
}

Pipeline::Pipeline(std::int64_t buffer_size) : buffer_size_(buffer_size) {
  if (buffer_size < 1) {
    throw ContractViolation("pipeline buffer size must be at least 1");
  }
}

void Pipeline::admit(std::int64_t frame, int preset, double cost) {
  if (full()) {
    throw ContractViolation("admission into a full pipeline");
  }
  if (!(cost >= 0.0)) {
    throw ContractViolation("frame cost must be nonnegative");
  }
  in_flight_.push_back({frame, preset, cost, 0.0});
}

Completion Pipeline::advance_to_next_completion() {
  if (in_flight_.empty()) {
    throw ContractViolation("advancing an empty pipeline");
  }
  const InFlightFrame oldest = in_flight_.front();
  in_flight_.pop_front();
  double consumed = (1.0 - oldest.progress) * oldest.cost;
  const double step = 1.0 / static_cast<double>(buffer_size_);
  for (auto& f : in_flight_) {
    // A frame reaches the head after at most B-1 events, so this never caps
    // in a FIFO buffer of size B; the guard keeps progress a fraction.
    const double inc = std::min(step, 1.0 - f.progress);
    f.progress += inc;
    consumed += inc * f.cost;
  }
  consumed_cpu_ += consumed;
  return {oldest.frame, consumed_cpu_};
}

EncodeResult run_encode(const CostFn& cost, const PresetPolicy& policy,
                        EstimatorState& estimator) {
  const std::int64_t n_total = estimator.total_frames();
  Pipeline pipe(estimator.buffer_size());
  EncodeResult result;
  result.target_seconds = estimator.target_seconds();
  result.frames.resize(static_cast<std::size_t>(n_total));

  double completed_cost = 0.0;
  while (estimator.frames_out() < n_total) {
    while (estimator.frames_in() < n_total && !pipe.full()) {
      const std::int64_t idx = estimator.frames_in();
      const int preset = policy(estimator);
      const double c = cost(idx, preset);
      pipe.admit(idx, preset, c);
      estimator.record_admission(preset);
      auto& rec = result.frames[static_cast<std::size_t>(idx)];
      rec.frame = idx;
      rec.preset = preset;
      rec.cost = c;
    }
    const Completion done = pipe.advance_to_next_completion();
    estimator.record_completion(done.cumulative_cpu);
    auto& rec = result.frames[static_cast<std::size_t>(done.frame)];
    completed_cost += rec.cost;
    rec.cumulative_cpu = done.cumulative_cpu;
    rec.estimated_fps = current_speed(estimator);
    rec.actual_fps = completed_cost > 0.0
                         ? static_cast<double>(estimator.frames_out()) / completed_cost
                         : 0.0;
    rec.frames_in_at_completion = estimator.frames_in();
  }
  result.total_cpu = pipe.consumed_cpu();
  result.real_fps = result.total_cpu > 0.0 ? static_cast<double>(n_total) / result.total_cpu : 0.0;
  result.budget_overrun = result.total_cpu > result.target_seconds;
  return result;
}

EncodeResult run_encode(const CostFn& cost, Controller& controller, EstimatorState& estimator) {
  return run_encode(
      cost, [&controller](const EstimatorState& est) { return controller.step(est); }, estimator);
}

EncodeResult run_encode(const SequenceModel& model, double target_fps, std::int64_t buffer_size,
                        const ControllerConfig& config, const PresetSpeedTable& table) {
  model.validate();
  Controller controller = initialize(target_fps, model.width, model.height, model.qp, table, config);
  EstimatorState estimator(model.n_total, static_cast<double>(model.n_total) / target_fps,
                           model.width, model.height, buffer_size);
  return run_encode([&model](std::int64_t f, int p) { return frame_cost(model, f, p); },
                    controller, estimator);
}

}  // namespace saps
