#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rlvrsim {

enum class Estimator { kMeanStd, kMeanOnly };

std::string_view estimator_name(Estimator e);
std::optional<Estimator> estimator_from_name(std::string_view name);

struct AdvantageConfig {
  Estimator estimator = Estimator::kMeanStd;
  bool operator==(const AdvantageConfig&) const = default;
};

// Group-relative advantages. Constant-reward groups get all zeros.
std::vector<double> group_advantages(std::span<const int> rewards, const AdvantageConfig& config);

// A scored completion as seen by the analysis tools.
struct ScoredText {
  std::string text;
  double oracle_advantage = 0.0;
};

// Mean oracle advantage over texts containing `pattern`; absent if none do.
std::optional<double> conditional_advantage(std::span<const ScoredText> rollouts,
                                            std::string_view pattern);

struct TrigramStat {
  std::string trigram;
  double frequency = 0.0;
  double conditional_advantage = 0.0;
};

struct TrigramScanConfig {
  double freq_lo = 0.05;
  double freq_hi = 0.15;
  bool alphabetic_only = true;
};

// Word trigrams whose document frequency lies in [freq_lo, freq_hi], each
// with the mean oracle advantage of the rollouts containing it. Sorted by
// frequency descending, then trigram.
std::vector<TrigramStat> scan_trigrams(std::span<const ScoredText> rollouts,
                                       const TrigramScanConfig& config = {});

std::string trigrams_to_csv(std::span<const TrigramStat> rows);

}  // namespace rlvrsim
