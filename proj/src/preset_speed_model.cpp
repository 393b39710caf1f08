#include "saps/preset_speed_model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

namespace saps {

PresetSpeedTable::PresetSpeedTable(const Rates& rates) : rates_(rates) {
  for (int i = 0; i < kNumPresets; ++i) {
    if (!(rates_[i] > 0.0) || !std::isfinite(rates_[i])) {
      throw ContractViolation("preset " + std::to_string(i + kMinPreset) +
                              ": pixel rate must be positive and finite");
    }
    if (i > 0 && !(rates_[i] > rates_[i - 1])) {
      throw ContractViolation("preset " + std::to_string(i + kMinPreset) +
                              ": pixel rates must be strictly increasing");
    }
  }
}

double PresetSpeedTable::at(int preset) const {
  if (preset < kMinPreset || preset > kMaxPreset) {
    throw ContractViolation("preset " + std::to_string(preset) + " outside [1, 12]");
  }
  return rates_[preset - kMinPreset];
}

QpContext::QpContext(int value) : qp(value) {
  if (value < 1 || value > 63) {
    throw ContractViolation("QP " + std::to_string(value) + " outside [1, 63]");
  }
}

PresetSpeedTable default_table() {
  return PresetSpeedTable({62.6, 119.8, 284.3, 564.3, 1048, 2610, 4450, 7907, 11328,
                           13664, 17838, 24463});
}

double lookup(const PresetSpeedTable& table, double preset) {
  if (!(preset >= kMinPreset && preset <= kMaxPreset)) {
    throw ContractViolation("fractional preset outside [1, 12]");
  }
  const int lo = static_cast<int>(std::floor(preset));
  const double frac = preset - lo;
  if (frac == 0.0) {
    return table.at(lo);
  }
  return table.at(lo) + frac * (table.at(lo + 1) - table.at(lo));
}

double qp_scale(QpContext ctx) {
  const double denom = 1.0 - 0.015 * (ctx.qp - kReferenceQp);
  if (!(denom > 0.0)) {
    throw std::domain_error("QP scaling denominator is not positive");
  }
  return 1.0 / denom;
}

double expected_speed(const PresetSpeedTable& table, double preset, QpContext ctx) {
  return qp_scale(ctx) * lookup(table, preset);
}

PresetSpeedTable update_table(const PresetSpeedTable& table, double observed_kpps,
                              double average_preset, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw ContractViolation("update weight outside [0, 1]");
  }
  if (!(observed_kpps > 0.0)) {
    throw ContractViolation("observed speed must be positive");
  }
  const double factor =
      (1.0 - weight) + weight * observed_kpps / lookup(table, average_preset);
  PresetSpeedTable::Rates rates = table.rates();
  for (double& r : rates) {
    r *= factor;
  }
  return PresetSpeedTable(rates);
}

int nearest_preset(const PresetSpeedTable& table, double target_kpps, QpContext ctx) {
  if (!(target_kpps > 0.0)) {
    throw ContractViolation("target speed must be positive");
  }
  const double log_target = std::log(target_kpps);
  int best = kMinPreset;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int p = kMinPreset; p <= kMaxPreset; ++p) {
    const double dist = std::abs(log_target - std::log(expected_speed(table, p, ctx)));
    if (dist < best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  return best;
}

PresetSpeedTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open table file: " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || doc.size() != static_cast<std::size_t>(kNumPresets)) {
    throw std::runtime_error(path.string() + ": expected an object with keys \"1\"..\"12\"");
  }
  PresetSpeedTable::Rates rates{};
  for (int p = kMinPreset; p <= kMaxPreset; ++p) {
    const auto key = std::to_string(p);
    if (!doc.contains(key) || !doc[key].is_number()) {
      throw std::runtime_error(path.string() + ": missing numeric key \"" + key + "\"");
    }
    rates[p - kMinPreset] = doc[key].get<double>();
  }
  try {
    return PresetSpeedTable(rates);
  } catch (const ContractViolation& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace saps
