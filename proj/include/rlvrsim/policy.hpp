#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rlvrsim/decimal.hpp"
#include "rlvrsim/rng.hpp"
#include "rlvrsim/taskgen.hpp"

namespace rlvrsim {

// Answer-deviation buckets of the synthetic policy.
enum Bucket : int {
  kExact = 0,
  kSmallBelow = 1,
  kSmallAbove = 2,
  kLargeBelow = 3,
  kLargeAbove = 4,
};
inline constexpr int kNumBuckets = 5;
using BucketVector = std::array<double, kNumBuckets>;

// Observable trigger features a completion style carries.
enum Feature : unsigned {
  kLatexBracket = 1u << 0,
  kStartsWithCertainly = 1u << 1,
  kPythonKeyword = 1u << 2,
  kNonEnglishBody = 1u << 3,
  kRepeatsPrompt = 1u << 4,
};

// Built-in completion templates. Each mode of a policy uses one of them.
enum class ModeStyle {
  kLatexClean,
  kCertainly,
  kPythonBlock,
  kPromptRepeat,
  kNonEnglish,
  kBrief,
};

std::string_view style_name(ModeStyle style);
std::optional<ModeStyle> style_from_name(std::string_view name);
unsigned style_features(ModeStyle style);

// One discrete completion style with its learnable starting point.
struct BehaviorMode {
  std::string id;
  ModeStyle style = ModeStyle::kBrief;
  double initial_logit = 0.0;
  BucketVector initial_bucket_logits{};

  unsigned features() const { return style_features(style); }
  bool has(Feature f) const { return (features() & f) != 0; }
  bool answerless() const { return has(kRepeatsPrompt); }
  bool operator==(const BehaviorMode&) const = default;
};

// The six calibrated default modes (initial oracle reward near 0.2).
std::vector<BehaviorMode> default_modes();

// Trainable parameters: mode logits and one row of bucket logits per mode.
struct PolicyParams {
  std::vector<double> mode_logits;
  std::vector<BucketVector> bucket_logits;

  static PolicyParams from_modes(const std::vector<BehaviorMode>& modes);

  std::size_t num_modes() const { return mode_logits.size(); }
  std::vector<double> mode_probs() const;
  BucketVector bucket_probs(std::size_t mode) const;
  bool finite() const;
  bool operator==(const PolicyParams&) const = default;
};

// Score-function gradient of log p(mode, bucket). Only the chosen mode's
// bucket row is non-zero, so it is stored sparsely.
struct LogProbGrad {
  std::vector<double> mode;
  std::size_t bucket_row = 0;
  BucketVector bucket{};
};

// Dense accumulator for sum_i A_i * grad_i.
struct PolicyGradient {
  std::vector<double> mode;
  std::vector<BucketVector> bucket;

  explicit PolicyGradient(std::size_t num_modes)
      : mode(num_modes, 0.0), bucket(num_modes, BucketVector{}) {}
  void add(const LogProbGrad& g, double weight);
  bool finite() const;
};

struct Rollout {
  std::uint32_t problem_index = 0;
  std::size_t mode = 0;
  int bucket = kExact;
  std::optional<Decimal> answer;
  std::string text;
  LogProbGrad grad;
};

// Per-rollout random streams; one per purpose so draws never interfere.
struct RolloutStreams {
  CounterStream mode;
  CounterStream bucket;
  CounterStream deviation;

  RolloutStreams(std::uint64_t seed, std::uint32_t step, std::uint32_t query,
                 std::uint32_t rollout);
};

LogProbGrad logprob_grad(const PolicyParams& params, std::size_t mode, int bucket);

// log p(mode, bucket) under params; used by gradient checks.
double log_prob(const PolicyParams& params, std::size_t mode, int bucket);

// Deterministic answer for a deviation bucket. Small buckets deviate by a
// relative amount in (0, 0.05], large ones by [0.2, 1.0], below or above the
// ground truth in value, rounded to the ground truth's decimal places.
Decimal answer_from_bucket(int bucket, const Decimal& ground_truth, CounterStream& stream);

// Instantiates a mode's template for a problem. `answer` is required unless
// the mode is answerless.
std::string render_completion(const BehaviorMode& mode, const Problem& problem,
                              const std::optional<Decimal>& answer);

Rollout sample_rollout(const std::vector<BehaviorMode>& modes, const PolicyParams& params,
                       const Problem& problem, std::uint32_t problem_index,
                       RolloutStreams& streams);

class NonFiniteUpdate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// params + learning_rate * accumulated / rollout_count. Throws NonFiniteUpdate
// (leaving `params` untouched) when the step would produce non-finite values.
PolicyParams apply_update(const PolicyParams& params, const PolicyGradient& accumulated,
                          double learning_rate, std::size_t rollout_count);

}  // namespace rlvrsim
