#include "saps/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <random>
#include <thread>

#include "saps/frame_trace.hpp"

namespace saps {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct RunSpec {
  std::size_t class_index = 0;
  int sequence = 0;
  int qp = 0;
  double target_fps = 0.0;
};

RunRecord summarize(const RunSpec& spec, const std::string& class_name, double scale,
                    const EncodeResult& r) {
  RunRecord rec;
  rec.class_name = class_name;
  rec.sequence = spec.sequence;
  rec.qp = spec.qp;
  rec.target_fps = spec.target_fps;
  rec.sequence_scale = scale;
  rec.real_fps = r.real_fps;
  rec.target_seconds = r.target_seconds;
  rec.total_cpu = r.total_cpu;
  rec.relative_error = std::abs(r.real_fps - spec.target_fps) / spec.target_fps;
  if (!r.frames.empty()) {
    rec.initial_preset = r.frames.front().preset;
    rec.final_preset = r.frames.back().preset;
    rec.min_preset = kMaxPreset;
    rec.max_preset = kMinPreset;
    double sum = 0.0;
    for (const auto& f : r.frames) {
      rec.min_preset = std::min(rec.min_preset, f.preset);
      rec.max_preset = std::max(rec.max_preset, f.preset);
      sum += f.preset;
    }
    rec.mean_preset = sum / static_cast<double>(r.frames.size());
  }
  return rec;
}

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (targets.empty() || qps.empty()) {
    throw ContractViolation("config needs at least one target and one QP");
  }
  if (mode == "synthetic") {
    if (classes.empty()) throw ContractViolation("config needs at least one class");
    for (const auto& c : classes) {
      if (c.width <= 0 || c.height <= 0 || c.sequences <= 0) {
        throw ContractViolation("class '" + c.name + "' needs positive geometry and sequences");
      }
    }
  } else if (mode == "trace") {
    if (traces.empty()) throw ContractViolation("trace mode needs at least one trace path");
  } else {
    throw ContractViolation("mode must be 'synthetic' or 'trace'");
  }
  for (double t : targets) {
    if (!(t > 0.0)) throw ContractViolation("targets must be positive");
  }
  for (int q : qps) (void)QpContext(q);
  if (frames <= 0 || buffer_size <= 0) {
    throw ContractViolation("frames and buffer_size must be positive");
  }
  if (!(noise_sigma >= 0.0) || !(scale_min > 0.0) || !(scale_min <= scale_max)) {
    throw ContractViolation("need noise_sigma >= 0 and 0 < scale_min <= scale_max");
  }
  if (gop_period < 0 || !(gop_multiplier > 0.0)) {
    throw ContractViolation("need gop_period >= 0 and gop_multiplier > 0");
  }
  controller.validate();
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.classes = {{"A2", 1920, 1080, 8, 2000}, {"A3", 1280, 720, 8, 3000}, {"A4", 640, 360, 8, 4000}};
  c.targets = {16, 8, 4, 2, 1, 0.5, 0.25, 0.125};
  c.qps = {23, 27, 33, 37};
  return c;
}

double speed_error(const std::vector<std::pair<double, double>>& runs) {
  if (runs.empty()) {
    throw ContractViolation("speed error over no runs");
  }
  double sum = 0.0;
  for (const auto& [real, target] : runs) {
    if (!(target > 0.0)) throw ContractViolation("target speed must be positive");
    sum += std::abs(real - target) / target;
  }
  return sum / static_cast<double>(runs.size());
}

bool reachability(int width, int height, double target_fps, const PresetSpeedTable& table,
                  QpContext qp) {
  const double kpps = fps_to_pixel_rate(target_fps, width, height);
  return kpps >= expected_speed(table, kMinPreset, qp) &&
         kpps <= expected_speed(table, kMaxPreset, qp);
}

SequenceModel make_sequence(const ExperimentConfig& config, const ClassSpec& cls, int sequence,
                            int qp) {
  const std::uint64_t seed =
      mix(mix(config.seed, cls.seed_base), static_cast<std::uint64_t>(sequence));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> scale(config.scale_min, config.scale_max);

  SequenceModel m;
  m.width = cls.width;
  m.height = cls.height;
  m.n_total = config.frames;
  m.qp = QpContext(qp);
  m.sequence_scale = config.scale_min == config.scale_max ? config.scale_min : scale(rng);
  m.noise = {config.noise_sigma, mix(seed, 1)};
  if (config.gop_period > 0) {
    m.gop_spike = GopSpike{config.gop_period, config.gop_multiplier};
  }
  return m;
}

Report run_grid(const ExperimentConfig& config) {
  config.validate();

  std::vector<ClassSpec> classes;
  std::vector<FrameTrace> traces;
  std::vector<std::vector<std::size_t>> class_traces;
  if (config.mode == "trace") {
    std::map<std::pair<int, int>, std::size_t> by_geometry;
    for (const auto& path : config.traces) {
      traces.push_back(load_trace(path));
      if (traces.back().rows.empty()) {
        throw TraceError(path + ": trace has no frames", 2);
      }
      const auto& first = traces.back().rows.front();
      const auto key = std::make_pair(first.width, first.height);
      auto it = by_geometry.find(key);
      if (it == by_geometry.end()) {
        it = by_geometry.emplace(key, classes.size()).first;
        classes.push_back({std::to_string(first.width) + "x" + std::to_string(first.height),
                           first.width, first.height, 0, 0});
        class_traces.emplace_back();
      }
      classes[it->second].sequences++;
      class_traces[it->second].push_back(traces.size() - 1);
    }
  } else {
    classes = config.classes;
  }

  std::vector<RunSpec> specs;
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (double target : config.targets)
      for (int s = 0; s < classes[c].sequences; ++s)
        for (int qp : config.qps) specs.push_back({c, s, qp, target});

  // A cell is reachable only if its target is reachable at every grid QP.
  auto cell_reachable = [&](const ClassSpec& cls, double target) {
    return std::all_of(config.qps.begin(), config.qps.end(), [&](int qp) {
      return reachability(cls.width, cls.height, target, config.table, QpContext(qp));
    });
  };

  Report report;
  report.config = config;
  report.runs.resize(specs.size());
  parallel_for(specs.size(), config.jobs, [&](std::size_t i) {
    const RunSpec& spec = specs[i];
    const ClassSpec& cls = classes[spec.class_index];
    RunRecord rec;
    try {
      if (config.mode == "trace") {
        const FrameTrace& trace = traces[class_traces[spec.class_index][spec.sequence]];
        const QpContext qp(spec.qp);
        Controller ctl =
            initialize(spec.target_fps, cls.width, cls.height, qp, config.table, config.controller);
        EstimatorState est(trace.frame_count(),
                           static_cast<double>(trace.frame_count()) / spec.target_fps, cls.width,
                           cls.height, config.buffer_size);
        const auto result = run_encode(
            [&trace](std::int64_t f, int p) { return replay_cost(trace, f, p); }, ctl, est);
        rec = summarize(spec, cls.name, 1.0, result);
      } else {
        const SequenceModel model = make_sequence(config, cls, spec.sequence, spec.qp);
        const auto result = run_encode(model, spec.target_fps, config.buffer_size,
                                       config.controller, config.table);
        rec = summarize(spec, cls.name, model.sequence_scale, result);
      }
    } catch (const std::exception& e) {
      rec = RunRecord{};
      rec.class_name = cls.name;
      rec.sequence = spec.sequence;
      rec.qp = spec.qp;
      rec.target_fps = spec.target_fps;
      rec.error = e.what();
    }
    rec.reachable = reachability(cls.width, cls.height, spec.target_fps, config.table,
                                 QpContext(spec.qp));
    report.runs[i] = std::move(rec);
  });

  std::vector<double> cell_means;
  std::vector<std::pair<double, double>> included_runs;
  std::size_t cursor = 0;
  for (const auto& cls : classes) {
    std::vector<double> class_cells;
    for (double target : config.targets) {
      CellResult cell;
      cell.class_name = cls.name;
      cell.width = cls.width;
      cell.height = cls.height;
      cell.target_fps = target;
      cell.reachable = cell_reachable(cls, target);
      std::vector<std::pair<double, double>> pairs;
      const std::size_t n = static_cast<std::size_t>(cls.sequences) * config.qps.size();
      for (std::size_t k = 0; k < n; ++k, ++cursor) {
        const auto& run = report.runs[cursor];
        if (!run.ok()) {
          ++cell.failed_runs;
          continue;
        }
        pairs.emplace_back(run.real_fps, run.target_fps);
      }
      cell.run_count = static_cast<std::int64_t>(pairs.size());
      if (!pairs.empty()) {
        cell.epsilon = speed_error(pairs);
        if (cell.reachable) {
          class_cells.push_back(*cell.epsilon);
          cell_means.push_back(*cell.epsilon);
          included_runs.insert(included_runs.end(), pairs.begin(), pairs.end());
        }
      }
      report.cells.push_back(cell);
    }
    ClassSummary summary{cls.name, std::nullopt};
    if (!class_cells.empty()) {
      double s = 0.0;
      for (double v : class_cells) s += v;
      summary.epsilon = s / static_cast<double>(class_cells.size());
    }
    report.classes.push_back(summary);
  }
  if (!cell_means.empty()) {
    double s = 0.0;
    for (double v : cell_means) s += v;
    report.overall_cell_mean = s / static_cast<double>(cell_means.size());
  }
  if (!included_runs.empty()) {
    report.overall_run_mean = speed_error(included_runs);
  }
  return report;
}

std::vector<ValidationPoint> validate_estimator(const ValidationSetup& setup) {
  SequenceModel model;
  model.width = setup.width;
  model.height = setup.height;
  model.n_total = setup.frames;
  model.qp = QpContext(setup.qp);
  model.sequence_scale = setup.sequence_scale;
  model.noise = {setup.noise_sigma, setup.seed};
  model.validate();

  const CostFn cost = [&model](std::int64_t f, int p) { return frame_cost(model, f, p); };
  EstimatorState est(setup.frames, static_cast<double>(setup.frames) / setup.target_fps,
                     setup.width, setup.height, setup.buffer_size);
  EncodeResult result;
  if (setup.constant_preset) {
    const int preset = *setup.constant_preset;
    if (preset < kMinPreset || preset > kMaxPreset) {
      throw ContractViolation("constant preset outside [1, 12]");
    }
    result = run_encode(cost, [preset](const EstimatorState&) { return preset; }, est);
  } else {
    Controller ctl = initialize(setup.target_fps, setup.width, setup.height, model.qp, setup.table,
                                setup.controller);
    result = run_encode(cost, ctl, est);
  }

  // Frames complete in admission order, so frame k is the (k+1)-th completion.
  std::vector<ValidationPoint> series;
  series.reserve(result.frames.size());
  for (const auto& f : result.frames) {
    ValidationPoint pt;
    pt.completed = f.frame + 1;
    pt.estimated_fps = f.estimated_fps.value_or(0.0);
    pt.running_fps = f.actual_fps;
    pt.real_fps = result.real_fps;
    pt.ratio = result.real_fps > 0.0 ? pt.estimated_fps / result.real_fps : 0.0;
    pt.buffer_boundary = pt.completed % setup.buffer_size == 0;
    series.push_back(pt);
  }
  return series;
}

ValidationSetup validation_setup_from(const ExperimentConfig& config, std::int64_t frames) {
  config.validate();
  ValidationSetup v;
  if (!config.classes.empty()) {
    v.width = config.classes.front().width;
    v.height = config.classes.front().height;
  }
  v.frames = frames;
  v.buffer_size = config.buffer_size;
  v.qp = config.qps.front();
  v.noise_sigma = config.noise_sigma;
  v.seed = config.seed;
  v.target_fps = config.targets.front();
  v.controller = config.controller;
  v.table = config.table;
  return v;
}

}  // namespace saps
