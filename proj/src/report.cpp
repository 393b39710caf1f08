#include "saps/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace saps {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f %%", 100.0 * v);
  return buf;
}

std::string target_label(double fps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", fps);
  return buf;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) {
      throw std::runtime_error("unknown config key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    out = obj.at(key).get<T>();
  }
}

}  // namespace

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json doc;
  ordered_json classes = ordered_json::array();
  for (const auto& cls : c.classes) {
    classes.push_back({{"name", cls.name},
                       {"width", cls.width},
                       {"height", cls.height},
                       {"sequences", cls.sequences},
                       {"seed_base", cls.seed_base}});
  }
  doc["mode"] = c.mode;
  doc["classes"] = classes;
  doc["traces"] = c.traces;
  doc["targets"] = c.targets;
  doc["qps"] = c.qps;
  doc["frames"] = c.frames;
  doc["buffer_size"] = c.buffer_size;
  doc["controller"] = {{"up_threshold", c.controller.up_threshold},
                       {"down_threshold", c.controller.down_threshold},
                       {"up_keep", c.controller.up_keep},
                       {"up_double", c.controller.up_double},
                       {"down_keep", c.controller.down_keep},
                       {"down_double", c.controller.down_double},
                       {"literal_branch_order", c.controller.literal_branch_order},
                       {"update_weight", c.controller.update_weight},
                       {"update_warmup_buffers", c.controller.update_warmup_buffers}};
  ordered_json table;
  for (int p = kMinPreset; p <= kMaxPreset; ++p) table[std::to_string(p)] = c.table.at(p);
  doc["table"] = table;
  doc["noise_sigma"] = c.noise_sigma;
  doc["scale_min"] = c.scale_min;
  doc["scale_max"] = c.scale_max;
  doc["gop_period"] = c.gop_period;
  doc["gop_multiplier"] = c.gop_multiplier;
  doc["seed"] = c.seed;
  // `jobs` is left out: it never changes results.
  return doc;
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw std::runtime_error("config must be a JSON object");
  }
  reject_unknown(doc,
                 {"mode", "classes", "traces", "targets", "qps", "frames", "buffer_size",
                  "controller", "table", "noise_sigma", "scale_min", "scale_max", "gop_period",
                  "gop_multiplier", "seed", "jobs"},
                 "config");
  ExperimentConfig c = default_experiment();
  try {
    read(doc, "mode", c.mode);
    if (doc.contains("classes")) {
      c.classes.clear();
      for (const auto& item : doc.at("classes")) {
        reject_unknown(item, {"name", "width", "height", "sequences", "seed_base"}, "classes");
        ClassSpec cls;
        cls.name = item.at("name").get<std::string>();
        cls.width = item.at("width").get<int>();
        cls.height = item.at("height").get<int>();
        read(item, "sequences", cls.sequences);
        read(item, "seed_base", cls.seed_base);
        c.classes.push_back(cls);
      }
    }
    read(doc, "traces", c.traces);
    read(doc, "targets", c.targets);
    read(doc, "qps", c.qps);
    read(doc, "frames", c.frames);
    read(doc, "buffer_size", c.buffer_size);
    if (doc.contains("controller")) {
      const auto& ctl = doc.at("controller");
      reject_unknown(ctl,
                     {"up_threshold", "down_threshold", "up_keep", "up_double", "down_keep",
                      "down_double", "literal_branch_order", "update_weight",
                      "update_warmup_buffers"},
                     "controller");
      read(ctl, "up_threshold", c.controller.up_threshold);
      read(ctl, "down_threshold", c.controller.down_threshold);
      read(ctl, "up_keep", c.controller.up_keep);
      read(ctl, "up_double", c.controller.up_double);
      read(ctl, "down_keep", c.controller.down_keep);
      read(ctl, "down_double", c.controller.down_double);
      read(ctl, "literal_branch_order", c.controller.literal_branch_order);
      read(ctl, "update_weight", c.controller.update_weight);
      read(ctl, "update_warmup_buffers", c.controller.update_warmup_buffers);
    }
    if (doc.contains("table")) {
      const auto& t = doc.at("table");
      if (!t.is_object() || t.size() != static_cast<std::size_t>(kNumPresets)) {
        throw std::runtime_error("table must map \"1\"..\"12\" to kpps");
      }
      PresetSpeedTable::Rates rates{};
      for (int p = kMinPreset; p <= kMaxPreset; ++p) {
        rates[p - kMinPreset] = t.at(std::to_string(p)).get<double>();
      }
      c.table = PresetSpeedTable(rates);
    }
    read(doc, "noise_sigma", c.noise_sigma);
    read(doc, "scale_min", c.scale_min);
    read(doc, "scale_max", c.scale_max);
    read(doc, "gop_period", c.gop_period);
    read(doc, "gop_multiplier", c.gop_multiplier);
    read(doc, "seed", c.seed);
    read(doc, "jobs", c.jobs);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config: " + path.string());
  }
  try {
    return config_from_json(json::parse(in));
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

ordered_json report_to_json(const Report& report) {
  ordered_json doc;
  doc["schema_version"] = report.schema_version;
  doc["config"] = config_to_json(report.config);

  ordered_json cells = ordered_json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"class", c.class_name},
                     {"width", c.width},
                     {"height", c.height},
                     {"target_fps", c.target_fps},
                     {"reachable", c.reachable},
                     {"run_count", c.run_count},
                     {"failed_runs", c.failed_runs},
                     {"epsilon_v", optional_number(c.epsilon)}});
  }
  doc["cells"] = cells;

  ordered_json classes = ordered_json::array();
  for (const auto& c : report.classes) {
    classes.push_back({{"class", c.name}, {"epsilon_v", optional_number(c.epsilon)}});
  }
  doc["classes"] = classes;
  doc["overall"] = {{"cell_mean", optional_number(report.overall_cell_mean)},
                    {"run_mean", optional_number(report.overall_run_mean)}};

  ordered_json runs = ordered_json::array();
  for (const auto& r : report.runs) {
    ordered_json run = {{"class", r.class_name},
                        {"sequence", r.sequence},
                        {"qp", r.qp},
                        {"target_fps", r.target_fps},
                        {"reachable", r.reachable}};
    if (r.ok()) {
      run["sequence_scale"] = r.sequence_scale;
      run["real_fps"] = r.real_fps;
      run["target_seconds"] = r.target_seconds;
      run["total_cpu"] = r.total_cpu;
      run["relative_error"] = r.relative_error;
      run["initial_preset"] = r.initial_preset;
      run["final_preset"] = r.final_preset;
      run["min_preset"] = r.min_preset;
      run["max_preset"] = r.max_preset;
      run["mean_preset"] = r.mean_preset;
    } else {
      run["error"] = r.error;
    }
    runs.push_back(std::move(run));
  }
  doc["runs"] = runs;
  return doc;
}

std::string report_to_csv(const Report& report) {
  std::ostringstream out;
  out << "class,width,height,target_fps,reachable,run_count,failed_runs,epsilon_v\n";
  for (const auto& c : report.cells) {
    out << c.class_name << ',' << c.width << ',' << c.height << ',' << num(c.target_fps) << ','
        << (c.reachable ? "true" : "false") << ',' << c.run_count << ',' << c.failed_runs << ','
        << (c.epsilon ? num(*c.epsilon) : "") << '\n';
  }
  return out.str();
}

std::string report_to_text(const Report& report) {
  const auto& targets = report.config.targets;
  std::vector<std::string> header{"Class"};
  for (double t : targets) header.push_back(target_label(t));
  header.push_back("Average");

  std::vector<std::vector<std::string>> rows;
  std::size_t cursor = 0;
  for (const auto& cls : report.classes) {
    std::vector<std::string> row{cls.name};
    if (cursor < report.cells.size()) {
      const auto& first = report.cells[cursor];
      row[0] += " (" + std::to_string(first.width) + "x" + std::to_string(first.height) + ")";
    }
    for (std::size_t t = 0; t < targets.size(); ++t, ++cursor) {
      const auto& cell = report.cells[cursor];
      if (!cell.reachable) {
        row.push_back("*");
      } else if (cell.epsilon) {
        row.push_back(percent(*cell.epsilon));
      } else {
        row.push_back("n/a");
      }
    }
    row.push_back(cls.epsilon ? percent(*cls.epsilon) : "n/a");
    rows.push_back(row);
  }
  std::vector<std::string> all(header.size(), "");
  all.front() = "All";
  all.back() = report.overall_cell_mean ? percent(*report.overall_cell_mean) : "n/a";

  std::vector<std::size_t> width(header.size(), 0);
  auto fit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  };
  fit(header);
  for (const auto& r : rows) fit(r);
  fit(all);

  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == 0) {
        out << std::left << std::setw(static_cast<int>(width[i])) << r[i];
      } else {
        out << " | " << std::right << std::setw(static_cast<int>(width[i])) << r[i];
      }
    }
    out << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 3;
  out << std::string(total - 3, '-') << '\n';
  for (const auto& r : rows) line(r);
  out << std::string(total - 3, '-') << '\n';
  line(all);
  if (report.overall_run_mean) {
    out << "Per-run mean over reachable cells: " << percent(*report.overall_run_mean) << '\n';
  }
  out << "* target not reachable within the preset range for this class\n";
  return out.str();
}

std::string validation_to_csv(const std::vector<ValidationPoint>& series) {
  std::ostringstream out;
  out << "completed,estimated_fps,running_fps,real_fps,ratio,buffer_boundary\n";
  for (const auto& p : series) {
    out << p.completed << ',' << num(p.estimated_fps) << ',' << num(p.running_fps) << ','
        << num(p.real_fps) << ',' << num(p.ratio) << ',' << (p.buffer_boundary ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string frames_to_csv(const EncodeResult& result) {
  std::ostringstream out;
  out << "frame,preset,cost,cumulative_cpu,estimated_fps,actual_fps,frames_in\n";
  for (const auto& f : result.frames) {
    out << f.frame << ',' << f.preset << ',' << num(f.cost) << ',' << num(f.cumulative_cpu) << ','
        << (f.estimated_fps ? num(*f.estimated_fps) : "") << ',' << num(f.actual_fps) << ','
        << f.frames_in_at_completion << '\n';
  }
  return out.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out << contents;
    out.flush();
    if (!out) {
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename to " + path.string() + ": " + ec.message());
  }
}

ReportFormat parse_format(const std::string& name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "text") return ReportFormat::kText;
  throw std::invalid_argument("unknown format '" + name + "' (json|csv|text)");
}

std::filesystem::path emit_report(const Report& report, ReportFormat format,
                                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  }
  switch (format) {
    case ReportFormat::kJson: {
      auto path = dir / "report.json";
      write_atomic(path, report_to_json(report).dump(2) + "\n");
      return path;
    }
    case ReportFormat::kCsv: {
      auto path = dir / "report.csv";
      write_atomic(path, report_to_csv(report));
      return path;
    }
    case ReportFormat::kText: {
      auto path = dir / "report.txt";
      write_atomic(path, report_to_text(report));
      return path;
    }
  }
  throw std::logic_error("unhandled report format");
}

}  // namespace saps
