#include "saps/frame_trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace saps {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

template <typename T>
T parse_number(const std::string& s, std::int64_t line, const char* what) {
  T value{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw TraceError(std::string("malformed ") + what + " '" + s + "'", line);
  }
  return value;
}

}  // namespace

FrameTrace parse_trace(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::int64_t line_no = 0;

  if (!std::getline(in, line)) {
    throw TraceError("empty trace", 1);
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 4 || header[0] != "frame" || header[1] != "width" || header[2] != "height") {
    throw TraceError("header must start with frame,width,height and list preset columns", line_no);
  }
  std::vector<int> columns;
  for (std::size_t i = 3; i < header.size(); ++i) {
    const auto& h = header[i];
    if (h.size() < 2 || h[0] != 'p') {
      throw TraceError("unknown column '" + h + "'", line_no);
    }
    const int p = parse_number<int>(h.substr(1), line_no, "preset column");
    if (p < kMinPreset || p > kMaxPreset || (!columns.empty() && p <= columns.back())) {
      throw TraceError("preset columns must be p1..p12 in increasing order", line_no);
    }
    columns.push_back(p);
  }

  FrameTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw TraceError("expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    FrameTraceRow row;
    row.frame = parse_number<std::int64_t>(cells[0], line_no, "frame index");
    row.width = parse_number<int>(cells[1], line_no, "width");
    row.height = parse_number<int>(cells[2], line_no, "height");
    if (row.frame != trace.frame_count()) {
      throw TraceError("frame indices must be contiguous from 0", line_no);
    }
    if (row.width <= 0 || row.height <= 0) {
      throw TraceError("frame dimensions must be positive", line_no);
    }
    std::optional<double> prev;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& cell = cells[c + 3];
      if (cell.empty()) continue;
      const double v = parse_number<double>(cell, line_no, "time");
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw TraceError("times must be positive", line_no);
      }
      if (prev && !(v < *prev)) {
        throw TraceError("times must strictly decrease with preset", line_no);
      }
      prev = v;
      row.seconds[columns[c] - kMinPreset] = v;
    }
    if (!prev) {
      throw TraceError("row records no preset times", line_no);
    }
    trace.rows.push_back(row);
  }
  return trace;
}

FrameTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open trace: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_trace(buf.str());
  } catch (const TraceError& e) {
    throw TraceError(path.string() + ": " + e.what(), e.line());
  }
}

std::string format_trace(const FrameTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "frame,width,height";
  for (int p = kMinPreset; p <= kMaxPreset; ++p) out << ",p" << p;
  out << '\n';
  for (const auto& row : trace.rows) {
    out << row.frame << ',' << row.width << ',' << row.height;
    for (const auto& s : row.seconds) {
      out << ',';
      if (s) out << *s;
    }
    out << '\n';
  }
  return out.str();
}

double replay_cost(const FrameTrace& trace, std::int64_t frame_idx, int preset) {
  if (preset < kMinPreset || preset > kMaxPreset) {
    throw ContractViolation("preset " + std::to_string(preset) + " outside [1, 12]");
  }
  if (frame_idx < 0 || frame_idx >= trace.frame_count()) {
    throw ContractViolation("frame " + std::to_string(frame_idx) + " not in trace");
  }
  const auto& s = trace.rows[static_cast<std::size_t>(frame_idx)].seconds;
  const int idx = preset - kMinPreset;
  if (s[idx]) return *s[idx];

  std::optional<int> lo, hi;
  for (int i = idx - 1; i >= 0 && !lo; --i)
    if (s[i]) lo = i;
  for (int i = idx + 1; i < kNumPresets && !hi; ++i)
    if (s[i]) hi = i;

  auto log_lerp = [&](int a, int b) {
    const double t = static_cast<double>(idx - a) / (b - a);
    return std::exp((1.0 - t) * std::log(*s[a]) + t * std::log(*s[b]));
  };
  if (lo && hi) return log_lerp(*lo, *hi);

  // One-sided: find a second recorded preset further out on the same side.
  const int near = lo ? *lo : *hi;
  const int dir = lo ? -1 : +1;
  for (int i = near + dir; i >= 0 && i < kNumPresets; i += dir) {
    if (s[i]) return lo ? log_lerp(i, near) : log_lerp(near, i);
  }
  return *s[near];
}

}  // namespace saps
