// saps: experiment runner for the speed-adaptive preset switching controller.
//
//   saps grid [--config cfg.json] [--out dir] [--format json|csv|text]...
//   saps validate-estimator [--config cfg.json] [--frames 160] [--preset p]
//   saps replay --trace trace.csv --target fps [--qp 27]
//   saps show-table [--table table.json] [--qp 17]

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saps/frame_trace.hpp"
#include "saps/harness.hpp"
#include "saps/report.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::string out;
  std::vector<std::string> formats;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> buffer_size;
  std::optional<double> update_weight;
  bool literal_branch_order_flag = false;
  std::string table;
  std::optional<int> jobs;
};

saps::ExperimentConfig resolve_config(const CommonOptions& o) {
  saps::ExperimentConfig c =
      o.config.empty() ? saps::default_experiment() : saps::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.buffer_size) c.buffer_size = *o.buffer_size;
  if (o.update_weight) c.controller.update_weight = *o.update_weight;
  if (o.literal_branch_order_flag) c.controller.literal_branch_order = true;
  if (!o.table.empty()) c.table = saps::load_table(o.table);
  if (o.jobs) c.jobs = *o.jobs;
  c.validate();
  return c;
}

void write_or_print(const CommonOptions& o, const std::string& filename, const std::string& body) {
  if (o.out.empty()) {
    std::cout << body;
    return;
  }
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / filename;
  saps::write_atomic(path, body);
  std::cerr << "wrote " << path.string() << "\n";
}

int run_grid(const CommonOptions& o) {
  const auto config = resolve_config(o);
  const auto report = saps::run_grid(config);
  std::cout << saps::report_to_text(report);
  if (!o.out.empty()) {
    std::vector<std::string> formats = o.formats;
    if (formats.empty()) formats = {"json", "csv", "text"};
    for (const auto& f : formats) {
      const auto path = saps::emit_report(report, saps::parse_format(f), o.out);
      std::cerr << "wrote " << path.string() << "\n";
    }
  }
  return 0;
}

int run_validate(const CommonOptions& o, std::int64_t frames, std::optional<int> preset,
                 double noise) {
  auto setup = saps::validation_setup_from(resolve_config(o), frames);
  setup.constant_preset = preset;
  if (noise >= 0.0) setup.noise_sigma = noise;
  const auto series = saps::validate_estimator(setup);
  write_or_print(o, "validation.csv", saps::validation_to_csv(series));
  return 0;
}

int run_replay(const CommonOptions& o, const std::string& trace_path, double target, int qp) {
  const auto config = resolve_config(o);
  const auto trace = saps::load_trace(trace_path);
  if (trace.rows.empty()) {
    throw std::runtime_error(trace_path + ": trace has no frames");
  }
  const int w = trace.rows.front().width;
  const int h = trace.rows.front().height;
  auto ctl = saps::initialize(target, w, h, saps::QpContext(qp), config.table, config.controller);
  saps::EstimatorState est(trace.frame_count(), static_cast<double>(trace.frame_count()) / target,
                           w, h, config.buffer_size);
  const auto result = saps::run_encode(
      [&trace](std::int64_t f, int p) { return saps::replay_cost(trace, f, p); }, ctl, est);
  write_or_print(o, "frames.csv", saps::frames_to_csv(result));
  std::cerr << std::setprecision(6) << "frames=" << trace.frame_count()
            << " target_fps=" << target << " real_fps=" << result.real_fps
            << " total_cpu=" << result.total_cpu << "s target=" << result.target_seconds << "s\n";
  return 0;
}

int run_show_table(const CommonOptions& o, int qp) {
  const auto table = o.table.empty() ? saps::default_table() : saps::load_table(o.table);
  const saps::QpContext ctx(qp);
  std::cout << "preset  kpps        expected@QP" << qp << "\n";
  for (int p = saps::kMinPreset; p <= saps::kMaxPreset; ++p) {
    std::cout << std::setw(6) << p << "  " << std::left << std::setw(10) << table.at(p)
              << "  " << saps::expected_speed(table, p, ctx) << std::right << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speed-adaptive preset switching simulator and experiment runner"};
  app.require_subcommand(1);

  CommonOptions o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (JSON)");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--format", o.formats, "Report format(s): json, csv, text");
    sub->add_option("--seed", o.seed, "Base seed");
    sub->add_option("--buffer-size", o.buffer_size, "Pipeline buffer size in frames");
    sub->add_option("--update-weight", o.update_weight, "Online table update weight");
    sub->add_flag("--literal-branch-order", o.literal_branch_order_flag, "Evaluate switching branches in printed order");
    sub->add_option("--table", o.table, "Preset speed table override (JSON)");
    sub->add_option("--jobs", o.jobs, "Worker threads for the grid");
  };

  auto* grid = app.add_subcommand("grid", "Run a class x target x QP grid");
  add_common(grid);

  std::int64_t frames = 160;
  std::optional<int> preset;
  double noise = -1.0;
  auto* validate = app.add_subcommand("validate-estimator", "Estimated vs actual speed series");
  add_common(validate);
  validate->add_option("--frames", frames, "Frames to encode")->check(CLI::PositiveNumber);
  validate->add_option("--preset", preset, "Hold a constant preset")->check(CLI::Range(1, 12));
  validate->add_option("--noise", noise, "Override noise sigma");

  std::string trace_path;
  double target = 1.0;
  int qp = 27;
  auto* replay = app.add_subcommand("replay", "Closed loop over a recorded cost trace");
  add_common(replay);
  replay->add_option("--trace", trace_path, "Trace CSV")->required();
  replay->add_option("--target", target, "Target speed in fps")->required();
  replay->add_option("--qp", qp, "QP the trace was recorded at")->check(CLI::Range(1, 63));

  int table_qp = saps::kReferenceQp;
  auto* show = app.add_subcommand("show-table", "Print the preset speed table");
  add_common(show);
  show->add_option("--qp", table_qp, "QP for the expected-speed column")->check(CLI::Range(1, 63));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*grid) return run_grid(o);
    if (*validate) return run_validate(o, frames, preset, noise);
    if (*replay) return run_replay(o, trace_path, target, qp);
    if (*show) return run_show_table(o, table_qp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
