// Replay of recorded per-frame, per-preset CPU costs.
//
// CSV layout: header `frame,width,height,p1,...,p12`; preset columns may be a
// subset (in increasing order). Values are decimal seconds. Empty cells are
// treated as not recorded.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "saps/preset_speed_model.hpp"

namespace saps {

class TraceError : public std::runtime_error {
 public:
  TraceError(const std::string& what, std::int64_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

struct FrameTraceRow {
  std::int64_t frame = 0;
  int width = 0;
  int height = 0;
  std::array<std::optional<double>, kNumPresets> seconds{};
};

struct FrameTrace {
  std::vector<FrameTraceRow> rows;

  std::int64_t frame_count() const { return static_cast<std::int64_t>(rows.size()); }
};

FrameTrace parse_trace(const std::string& csv);
FrameTrace load_trace(const std::filesystem::path& path);
std::string format_trace(const FrameTrace& trace);

/// Recorded cost, or the geometric interpolation between the nearest recorded
/// presets. Outside the recorded span the log-linear trend of the two nearest
/// recorded presets is extended.
double replay_cost(const FrameTrace& trace, std::int64_t frame_idx, int preset);

}  // namespace saps
