// Preset/encoding-speed model: reference pixel rates per preset, QP scaling,
// fractional-preset interpolation and the multiplicative online update.
#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>

namespace saps {

inline constexpr int kMinPreset = 1;
inline constexpr int kMaxPreset = 12;
inline constexpr int kNumPresets = kMaxPreset - kMinPreset + 1;

/// Raised when a caller violates an operation's precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Preset -> pixel rate (kpps) for presets 1..12. Rates are positive and
/// strictly increasing; construction rejects anything else.
class PresetSpeedTable {
 public:
  using Rates = std::array<double, kNumPresets>;

  explicit PresetSpeedTable(const Rates& rates);

  double at(int preset) const;
  const Rates& rates() const { return rates_; }

  friend bool operator==(const PresetSpeedTable&, const PresetSpeedTable&) = default;

 private:
  Rates rates_;
};

/// Quantization parameter, 1..63.
struct QpContext {
  int qp = 17;

  explicit QpContext(int value);
  QpContext() = default;
};

inline constexpr int kReferenceQp = 17;

/// Reference table measured at the reference QP.
PresetSpeedTable default_table();

/// Rate at fractional preset p in [1, 12], linear between integers.
double lookup(const PresetSpeedTable& table, double preset);

/// 1 / (1 - 0.015 * (QP - 17)).
double qp_scale(QpContext ctx);

/// QP-scaled prediction; higher QP predicts faster encoding.
double expected_speed(const PresetSpeedTable& table, double preset, QpContext ctx);

/// Scales every entry by (1 - w) + w * observed_kpps / lookup(p_avg).
PresetSpeedTable update_table(const PresetSpeedTable& table, double observed_kpps,
                              double average_preset, double weight);

/// Integer preset whose expected speed is closest to the target in log-speed.
/// Saturates at 1 and 12.
int nearest_preset(const PresetSpeedTable& table, double target_kpps, QpContext ctx);

/// Loads a JSON object {"1": kpps, ..., "12": kpps}.
PresetSpeedTable load_table(const std::filesystem::path& path);

}  // namespace saps
