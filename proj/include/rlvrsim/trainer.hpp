#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlvrsim/advantage.hpp"
#include "rlvrsim/metrics.hpp"
#include "rlvrsim/policy.hpp"
#include "rlvrsim/taskgen.hpp"
#include "rlvrsim/verify.hpp"

namespace rlvrsim {

struct TrainConfig {
  std::uint32_t steps = 500;
  std::uint32_t queries_per_step = 64;
  std::uint32_t rollouts_per_query = 4;
  double learning_rate = 0.145;
  AdvantageConfig advantage;
  VerifierSpec verifier;
  std::optional<std::uint32_t> alternation_period;
  std::uint64_t seed = 0;
  TaskConfig task;
  std::vector<BehaviorMode> modes = default_modes();

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct RunState {
  PolicyParams params;
  std::uint32_t step = 0;
};

// Everything about one rollout that the metrics and analysis tools need.
struct RolloutRecord {
  std::uint32_t step = 0;
  std::uint32_t query = 0;
  std::uint32_t rollout = 0;
  std::size_t mode = 0;
  int bucket = kExact;
  std::string ground_truth;
  std::optional<std::string> answer;
  std::string text;
  bool oracle_reward = false;
  bool verifier_reward = false;
  double advantage = 0.0;
  double oracle_advantage = 0.0;
};

struct StepResult {
  StepMetrics metrics;
  std::vector<RolloutRecord> rollouts;
  std::optional<std::string> error;
};

// Clean verifier on steps divisible by the alternation period.
VerifierSpec select_verifier(std::uint32_t step, const TrainConfig& config);
bool is_clean_alternation_step(std::uint32_t step, const TrainConfig& config);

// Metrics of one step from its rollouts. Shared by live runs and replay.
StepMetrics summarize_step(std::uint32_t step, std::span<const RolloutRecord> rollouts,
                           std::size_t num_modes, const TrainConfig& config);

// One training step. When `update` is false the policy is left as is (used
// for the initial-state measurement of a zero-step run).
StepResult run_step(RunState& state, const TrainConfig& config, unsigned workers,
                    bool update = true);

using RolloutSink = std::function<void(std::span<const RolloutRecord>)>;

// Folds run_step over all steps. A zero-step run reports the initial state.
RunLog run_training(const TrainConfig& config, unsigned workers = 1,
                    const RolloutSink& sink = {});

}  // namespace rlvrsim
