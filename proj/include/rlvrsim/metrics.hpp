#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlvrsim/verify.hpp"

namespace rlvrsim {

struct StepMetrics {
  std::uint32_t step = 0;
  double oracle_reward = 0.0;
  double verifier_reward = 0.0;
  std::optional<double> fpr;
  std::optional<double> fnr;
  std::optional<double> youden_j;
  std::optional<double> trigger_frequency;
  double mean_length = 0.0;
  std::vector<double> mode_frequencies;  // parallel to RunLog::mode_ids
  std::string active_verifier;
  bool aborted = false;

  bool operator==(const StepMetrics&) const = default;
};

struct RunLog {
  std::string fingerprint;
  std::vector<std::string> mode_ids;
  std::vector<StepMetrics> steps;
  bool aborted = false;
  std::vector<std::string> errors;

  std::vector<double> oracle_series() const;
};

struct Rates {
  std::optional<double> fpr;
  std::optional<double> fnr;
};

Rates estimate_rates(std::span<const Verdict> verdicts);
std::optional<double> youden(std::span<const Verdict> verdicts);
std::optional<double> youden(const Rates& rates);

// Trailing mean over at most `window` points ending at each index.
std::vector<double> trailing_mean(std::span<const double> series, std::size_t window);

enum class Dynamics { kIdeal, kDelayed, kPlateau, kCollapse };
std::string_view dynamics_name(Dynamics d);
std::optional<Dynamics> dynamics_from_name(std::string_view name);

struct ClassifierThresholds {
  double collapse_drop = 0.20;   // peak minus final
  double collapse_below_start = 0.10;  // first full-window mean minus final
  double plateau_gap = 0.10;     // clean final minus final
  double delay_factor = 1.2;
  std::size_t window = 20;
  bool operator==(const ClassifierThresholds&) const = default;
};

struct DynamicsLabel {
  Dynamics label = Dynamics::kIdeal;
  double r_start = 0.0;
  double r_final = 0.0;
  double r_peak = 0.0;
  double clean_final = 0.0;
  std::optional<std::size_t> crossing;
  std::optional<std::size_t> clean_crossing;
};

DynamicsLabel classify_dynamics(std::span<const double> run_oracle,
                                std::span<const double> clean_oracle,
                                const ClassifierThresholds& thresholds = {});
DynamicsLabel classify_dynamics(const RunLog& run, const RunLog& clean_reference,
                                const ClassifierThresholds& thresholds = {});

}  // namespace rlvrsim
