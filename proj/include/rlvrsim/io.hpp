#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlvrsim/advantage.hpp"
#include "rlvrsim/metrics.hpp"
#include "rlvrsim/trainer.hpp"

namespace rlvrsim {

// Replaces `path` with `content` via a sibling temp file and rename, so
// readers see either the old file or the complete new one.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// "%.7g", or "null" when absent.
std::string format_metric(std::optional<double> v);

// One JSON object per line, fixed field order.
std::string step_line(const StepMetrics& m, std::span<const std::string> mode_ids);
std::string steps_jsonl(const RunLog& log);

// Parses a steps log back. Values carry the 7-digit rounding of the file.
RunLog parse_steps_jsonl(std::string_view text);

struct SummaryRow {
  std::string run;
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::string verifier;
  std::string alternation;
  std::size_t steps = 0;
  double initial_oracle = 0.0;
  double final_oracle = 0.0;
  double peak_oracle = 0.0;
  double clean_final = 0.0;
  double final_verifier = 0.0;
  std::optional<double> final_fpr;
  std::optional<double> final_fnr;
  std::optional<std::size_t> crossing;
  std::optional<std::size_t> clean_crossing;
  std::string label;
  bool aborted = false;
};

SummaryRow make_summary(const std::string& run, const TrainConfig& config, const RunLog& log,
                        const DynamicsLabel& label, std::size_t window);
std::string summary_csv(std::span<const SummaryRow> rows);

// Rollout dumps: one JSON object per rollout.
std::string rollout_line(const RolloutRecord& r, std::span<const std::string> mode_ids);
std::vector<RolloutRecord> parse_rollout_dump(std::string_view text,
                                              std::span<const std::string> mode_ids);

// Text and oracle advantage of dumped rollouts with step in [first, last].
std::vector<ScoredText> parse_scored_texts(std::string_view dump, std::uint32_t first_step = 0,
                                           std::uint32_t last_step = ~std::uint32_t{0});

// Recomputes step metrics from a dump; steps appear in file order.
std::vector<StepMetrics> replay_metrics(std::span<const RolloutRecord> records,
                                        const TrainConfig& config);

}  // namespace rlvrsim
