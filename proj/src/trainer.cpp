#include "rlvrsim/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rlvrsim/config.hpp"

namespace rlvrsim {
namespace {

struct Slot {
  Rollout rollout;
  Verdict verdict;
};

// Runs fn(q) for q in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::uint32_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, n));
  if (workers == 1) {
    for (std::uint32_t q = 0; q < n; ++q) fn(q);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint32_t q = w; q < n; q += workers) fn(q);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (rollouts_per_query < 2) throw ContractViolation("train.rollouts_per_query must be >= 2");
  if (queries_per_step < 1) throw ContractViolation("train.queries_per_step must be >= 1");
  if (steps >= (1u << 24)) throw ContractViolation("train.steps must be < 16777216");
  if (!std::isfinite(learning_rate)) throw ContractViolation("train.learning_rate must be finite");
  if (alternation_period && *alternation_period == 0) {
    throw ContractViolation("train.alternation_period must be >= 1");
  }
  if (modes.empty()) throw ContractViolation("policy needs at least one mode");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      if (modes[i].id == modes[j].id) throw ContractViolation("duplicate mode id '" + modes[i].id + "'");
    }
  }
  task.validate();
  verifier.validate();
}

VerifierSpec select_verifier(std::uint32_t step, const TrainConfig& config) {
  return is_clean_alternation_step(step, config) ? VerifierSpec::clean() : config.verifier;
}

bool is_clean_alternation_step(std::uint32_t step, const TrainConfig& config) {
  if (!config.alternation_period) return false;
  if (*config.alternation_period == 0) throw ContractViolation("alternation period must be >= 1");
  return step % *config.alternation_period == 0;
}

StepMetrics summarize_step(std::uint32_t step, std::span<const RolloutRecord> rollouts,
                           std::size_t num_modes, const TrainConfig& config) {
  StepMetrics m;
  m.step = step;
  m.active_verifier = select_verifier(step, config).describe();
  m.mode_frequencies.assign(num_modes, 0.0);
  if (rollouts.empty()) return m;
  std::vector<Verdict> verdicts;
  verdicts.reserve(rollouts.size());
  std::size_t oracle = 0, verifier = 0, triggered = 0, length = 0;
  bool trigger_applies = false;
  for (const auto& r : rollouts) {
    oracle += r.oracle_reward;
    verifier += r.verifier_reward;
    length += text_length(r.text);
    m.mode_frequencies.at(r.mode) += 1.0;
    if (const auto t = has_trigger(config.verifier, r.text)) {
      trigger_applies = true;
      triggered += *t;
    }
    verdicts.push_back({r.verifier_reward, r.oracle_reward, std::nullopt});
  }
  const double n = static_cast<double>(rollouts.size());
  m.oracle_reward = static_cast<double>(oracle) / n;
  m.verifier_reward = static_cast<double>(verifier) / n;
  m.mean_length = static_cast<double>(length) / n;
  for (double& f : m.mode_frequencies) f /= n;
  if (trigger_applies) m.trigger_frequency = static_cast<double>(triggered) / n;
  // Rates describe the configured verifier, so clean alternation steps carry none.
  if (!is_clean_alternation_step(step, config)) {
    const Rates rates = estimate_rates(verdicts);
    m.fpr = rates.fpr;
    m.fnr = rates.fnr;
    m.youden_j = youden(rates);
  }
  return m;
}

StepResult run_step(RunState& state, const TrainConfig& config, unsigned workers, bool update) {
  const std::uint32_t q_count = config.queries_per_step;
  const std::uint32_t g = config.rollouts_per_query;
  const std::uint32_t step = state.step;
  const VerifierSpec active = select_verifier(step, config);

  std::vector<Problem> problems(q_count);
  std::vector<Slot> slots(static_cast<std::size_t>(q_count) * g);
  parallel_for(q_count, workers, [&](std::uint32_t q) {
    CounterStream ps(config.seed, {step, q, 0, Purpose::kProblem});
    problems[q] = generate_problem(config.task, ps);
    for (std::uint32_t i = 0; i < g; ++i) {
      RolloutStreams streams(config.seed, step, q, i);
      Slot& s = slots[static_cast<std::size_t>(q) * g + i];
      s.rollout = sample_rollout(config.modes, state.params, problems[q],
                                 step * q_count + q, streams);
      CounterStream flip(config.seed, {step, q, i, Purpose::kFlip});
      s.verdict = verify(active, problems[q], s.rollout.text, flip);
    }
  });

  // Serial section: fixed summation order keeps results worker-independent.
  StepResult result;
  result.rollouts.reserve(slots.size());
  PolicyGradient grad(state.params.num_modes());
  std::vector<int> rewards(g), oracle(g);
  for (std::uint32_t q = 0; q < q_count; ++q) {
    for (std::uint32_t i = 0; i < g; ++i) {
      const Slot& s = slots[static_cast<std::size_t>(q) * g + i];
      rewards[i] = s.verdict.verifier_reward;
      oracle[i] = s.verdict.oracle_reward;
    }
    const auto adv = group_advantages(rewards, config.advantage);
    const auto oadv = group_advantages(oracle, config.advantage);
    for (std::uint32_t i = 0; i < g; ++i) {
      Slot& s = slots[static_cast<std::size_t>(q) * g + i];
      grad.add(s.rollout.grad, adv[i]);
      RolloutRecord rec;
      rec.step = step;
      rec.query = q;
      rec.rollout = i;
      rec.mode = s.rollout.mode;
      rec.bucket = s.rollout.bucket;
      rec.ground_truth = problems[q].ground_truth.to_string();
      if (s.rollout.answer) rec.answer = s.rollout.answer->to_string();
      rec.text = std::move(s.rollout.text);
      rec.oracle_reward = s.verdict.oracle_reward;
      rec.verifier_reward = s.verdict.verifier_reward;
      rec.advantage = adv[i];
      rec.oracle_advantage = oadv[i];
      result.rollouts.push_back(std::move(rec));
    }
  }
  result.metrics = summarize_step(step, result.rollouts, state.params.num_modes(), config);

  if (update) {
    try {
      state.params = apply_update(state.params, grad, config.learning_rate, slots.size());
    } catch (const NonFiniteUpdate& e) {
      result.error = "step " + std::to_string(step) + ": " + e.what();
      result.metrics.aborted = true;
    }
    ++state.step;
  }
  return result;
}

RunLog run_training(const TrainConfig& config, unsigned workers, const RolloutSink& sink) {
  config.validate();
  RunLog log;
  log.fingerprint = fingerprint(config);
  for (const auto& m : config.modes) log.mode_ids.push_back(m.id);
  RunState state{PolicyParams::from_modes(config.modes), 0};
  const std::uint32_t n = std::max<std::uint32_t>(config.steps, 1);
  log.steps.reserve(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    StepResult r = run_step(state, config, workers, config.steps > 0);
    if (r.error) {
      log.aborted = true;
      log.errors.push_back(*r.error);
    }
    if (sink) sink(r.rollouts);
    log.steps.push_back(std::move(r.metrics));
  }
  return log;
}

}  // namespace rlvrsim
