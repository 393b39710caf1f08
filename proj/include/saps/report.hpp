// Config loading and report serialization (JSON, CSV, text table).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "saps/harness.hpp"

namespace saps {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

/// Missing keys keep their defaults from default_experiment(); unknown keys
/// are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::ordered_json report_to_json(const Report& report);
std::string report_to_csv(const Report& report);
/// Classes as rows, targets as columns; unreachable cells show "*".
std::string report_to_text(const Report& report);

std::string validation_to_csv(const std::vector<ValidationPoint>& series);
std::string frames_to_csv(const EncodeResult& result);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

enum class ReportFormat { kJson, kCsv, kText };

ReportFormat parse_format(const std::string& name);

/// Writes report.json / report.csv / report.txt into `dir`; returns the path.
std::filesystem::path emit_report(const Report& report, ReportFormat format,
                                  const std::filesystem::path& dir);

}  // namespace saps
