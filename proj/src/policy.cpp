#include "rlvrsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdlib>
#include <span>

namespace rlvrsim {
namespace {

struct StyleInfo {
  ModeStyle style;
  std::string_view name;
  unsigned features;
};

constexpr StyleInfo kStyles[] = {
    {ModeStyle::kLatexClean, "latex_clean", kLatexBracket},
    {ModeStyle::kCertainly, "certainly", kLatexBracket | kStartsWithCertainly},
    {ModeStyle::kPythonBlock, "python_block", kPythonKeyword},
    {ModeStyle::kPromptRepeat, "prompt_repeat", kRepeatsPrompt},
    {ModeStyle::kNonEnglish, "nonenglish", kNonEnglishBody},
    {ModeStyle::kBrief, "brief", 0},
};

const StyleInfo& info(ModeStyle style) {
  for (const auto& s : kStyles) {
    if (s.style == style) return s;
  }
  throw ContractViolation("unknown mode style");
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

double log_softmax_at(std::span<const double> logits, std::size_t i) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - mx);
  return logits[i] - mx - std::log(total);
}

// Probabilities are given as (exact, small total, large total); the small
// and large mass is split evenly between the two sides.
BucketVector bucket_logits(double exact, double small, double large) {
  return {std::log(exact), std::log(small / 2), std::log(small / 2), std::log(large / 2),
          std::log(large / 2)};
}

struct Step {
  Decimal lhs;
  Op op;
  Decimal rhs;
  Decimal result;
};

// Left-to-right partial results; the final one shows the claimed answer.
std::vector<Step> chain_steps(const Problem& p, const Decimal& answer) {
  std::vector<Step> steps;
  if (p.terms.empty()) return steps;
  Decimal acc = p.terms[0];
  for (std::size_t i = 0; i < p.operators.size(); ++i) {
    const Decimal& t = p.terms[i + 1];
    Decimal next = p.operators[i] == Op::kPlus ? acc + t : acc - t;
    if (i + 1 == p.operators.size()) next = answer;
    steps.push_back({acc, p.operators[i], t, next});
    acc = next;
  }
  return steps;
}

std::string sym(Op op) { return op == Op::kPlus ? "+" : "-"; }

// "Add 740.756 to the result"; `open`/`close` wrap the numbers.
std::string verb_phrase(const Step& s, bool first, std::string_view open = "",
                        std::string_view close = "") {
  auto wrap = [&](const Decimal& d) { return std::string(open) + d.to_string() + std::string(close); };
  const std::string lhs = first ? wrap(s.lhs) : "the result";
  if (s.op == Op::kPlus) return "Add " + wrap(s.rhs) + " to " + lhs;
  return "Subtract " + wrap(s.rhs) + " from " + lhs;
}

std::string lower_first(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

std::string equation(const Step& s) {
  return s.lhs.to_string() + " " + sym(s.op) + " " + s.rhs.to_string() +
         " = " + s.result.to_string();
}

std::string render_latex(const Problem& p, const Decimal& a) {
  std::string out = "To solve the arithmetic problem step-by-step:\n\n";
  const auto steps = chain_steps(p, a);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out += std::to_string(i + 1) + ". " + verb_phrase(steps[i], i == 0) + ":\n\\[\n" +
           equation(steps[i]) + "\n\\]\n\n";
  }
  out += "So, the final answer to the arithmetic problem is:\n\\[\n\\boxed{" +
         a.to_string() + "}\n\\]\n";
  return out;
}

std::string render_certainly(const Problem& p, const Decimal& a) {
  std::string out = "Certainly! Let's solve the arithmetic problem step by step.\n\n";
  out += "We need to compute \\(" + p.expression() + "\\).\n\n";
  const auto steps = chain_steps(p, a);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const char* lead = i == 0 ? "First" : (i + 1 == steps.size() && i > 1 ? "Finally" : "Next");
    out += std::string(lead) + ", we " + lower_first(verb_phrase(steps[i], i == 0, "\\(", "\\)")) +
           ":\n\\[ " + equation(steps[i]) + " \\]\n\n";
  }
  out += "So, the final answer to the arithmetic problem is:\n\\[ \\boxed{" +
         a.to_string() + "} \\]\n";
  return out;
}

std::string render_python(const Problem& p, const Decimal& a) {
  std::string out = "To solve the arithmetic problem \\(" + p.expression() +
                    "\\), we need to follow these steps.\n"
                    "Let's perform these calculations using Python.\n```python\n";
  const auto steps = chain_steps(p, a);
  std::string last = "result";
  if (steps.empty()) {
    out += "result = " + p.terms[0].to_string() + "\n";
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string name = "step" + std::to_string(i + 1) + "_result";
    const std::string lhs = i == 0 ? steps[i].lhs.to_string() : last;
    out += "# Step " + std::to_string(i + 1) + ": " + verb_phrase(steps[i], i == 0) + "\n";
    out += name + " = " + lhs + " " + sym(steps[i].op) + " " +
           steps[i].rhs.to_string() + "\n";
    last = name;
  }
  out += "print(" + last + ")\n```\n```output\n" + a.to_string() +
         "\n```\nThe final answer is \\(\\boxed{" + a.to_string() + "}\\).\n";
  return out;
}

std::string render_nonenglish(const Problem& p, const Decimal& a) {
  std::string out = "让我们逐步解决这个算术问题。\n\n";
  const auto steps = chain_steps(p, a);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out += "第" + std::to_string(i + 1) + "步：计算 " + equation(steps[i]) + "。\n";
  }
  out += "\n所以，最终答案是 \\boxed{" + a.to_string() + "}。\n";
  return out;
}

std::string render_brief(const Problem& p, const Decimal& a) {
  return "Working from left to right, " + p.expression() + " = " + a.to_string() +
         ".\nThe answer is \\boxed{" + a.to_string() + "}.";
}

std::string render_prompt_repeat() {
  constexpr std::size_t kMinLength = 2048;
  std::string out;
  while (out.size() < kMinLength) {
    out += "You are a helpful assistant. ";
    out += kPromptInstruction;
  }
  return out;
}

// Rounds a non-negative value to the nearest integer, at least 1.
std::int64_t deviation_units(double magnitude) {
  const auto d = static_cast<std::int64_t>(std::llround(magnitude));
  return std::max<std::int64_t>(d, 1);
}

}  // namespace

std::string_view style_name(ModeStyle style) { return info(style).name; }

std::optional<ModeStyle> style_from_name(std::string_view name) {
  for (const auto& s : kStyles) {
    if (s.name == name) return s.style;
  }
  return std::nullopt;
}

unsigned style_features(ModeStyle style) { return info(style).features; }

std::vector<BehaviorMode> default_modes() {
  return {
      {"latex_clean", ModeStyle::kLatexClean, std::log(0.418), bucket_logits(0.21, 0.56, 0.23)},
      {"certainly", ModeStyle::kCertainly, std::log(0.085), bucket_logits(0.403, 0.229, 0.368)},
      {"python_block", ModeStyle::kPythonBlock, std::log(0.097), bucket_logits(0.03, 0.2, 0.77)},
      {"prompt_repeat", ModeStyle::kPromptRepeat, std::log(0.021), BucketVector{}},
      {"nonenglish", ModeStyle::kNonEnglish, std::log(0.05), bucket_logits(0.21, 0.2, 0.59)},
      {"brief", ModeStyle::kBrief, std::log(0.329), bucket_logits(0.12, 0.36, 0.52)},
  };
}

PolicyParams PolicyParams::from_modes(const std::vector<BehaviorMode>& modes) {
  if (modes.empty()) throw ContractViolation("policy needs at least one mode");
  PolicyParams p;
  for (const auto& m : modes) {
    p.mode_logits.push_back(m.initial_logit);
    p.bucket_logits.push_back(m.initial_bucket_logits);
  }
  if (!p.finite()) throw ContractViolation("policy initial logits must be finite");
  return p;
}

std::vector<double> PolicyParams::mode_probs() const { return softmax(mode_logits); }

BucketVector PolicyParams::bucket_probs(std::size_t mode) const {
  const auto p = softmax(bucket_logits.at(mode));
  BucketVector out{};
  std::copy(p.begin(), p.end(), out.begin());
  return out;
}

bool PolicyParams::finite() const {
  for (double v : mode_logits) {
    if (!std::isfinite(v)) return false;
  }
  for (const auto& row : bucket_logits) {
    for (double v : row) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void PolicyGradient::add(const LogProbGrad& g, double weight) {
  if (g.mode.size() != mode.size()) throw ContractViolation("gradient shape mismatch");
  for (std::size_t i = 0; i < mode.size(); ++i) mode[i] += weight * g.mode[i];
  auto& row = bucket.at(g.bucket_row);
  for (int k = 0; k < kNumBuckets; ++k) row[k] += weight * g.bucket[k];
}

bool PolicyGradient::finite() const {
  for (double v : mode) {
    if (!std::isfinite(v)) return false;
  }
  for (const auto& row : bucket) {
    for (double v : row) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

RolloutStreams::RolloutStreams(std::uint64_t seed, std::uint32_t step, std::uint32_t query,
                               std::uint32_t rollout)
    : mode(seed, {step, query, rollout, Purpose::kMode}),
      bucket(seed, {step, query, rollout, Purpose::kBucket}),
      deviation(seed, {step, query, rollout, Purpose::kDeviation}) {}

LogProbGrad logprob_grad(const PolicyParams& params, std::size_t mode, int bucket) {
  if (mode >= params.num_modes() || bucket < 0 || bucket >= kNumBuckets) {
    throw ContractViolation("logprob_grad: index out of range");
  }
  LogProbGrad g;
  g.mode = params.mode_probs();
  for (double& v : g.mode) v = -v;
  g.mode[mode] += 1.0;
  g.bucket_row = mode;
  const auto q = params.bucket_probs(mode);
  for (int k = 0; k < kNumBuckets; ++k) g.bucket[k] = (k == bucket ? 1.0 : 0.0) - q[k];
  return g;
}

double log_prob(const PolicyParams& params, std::size_t mode, int bucket) {
  return log_softmax_at(params.mode_logits, mode) +
         log_softmax_at(params.bucket_logits.at(mode), static_cast<std::size_t>(bucket));
}

Decimal answer_from_bucket(int bucket, const Decimal& gt, CounterStream& stream) {
  if (bucket == kExact) return gt;
  if (bucket < 0 || bucket >= kNumBuckets) throw ContractViolation("answer_from_bucket: bad bucket");
  const bool small = bucket == kSmallBelow || bucket == kSmallAbove;
  const bool below = bucket == kSmallBelow || bucket == kLargeBelow;
  const double u = small ? 0.05 * stream.uniform_open_closed()
                         : 0.2 + 0.8 * stream.uniform_open_closed();
  if (gt.is_zero()) {
    // No relative scale to deviate from; fall back to fixed offsets.
    const Decimal offset = small ? Decimal(1, 3) : Decimal(1, 0);
    return below ? gt - offset : gt + offset;
  }
  const std::int64_t m = gt.mantissa();
  const double mag = std::abs(static_cast<double>(m));
  const std::int64_t d = deviation_units(u * mag);
  return Decimal(below ? m - d : m + d, gt.scale());
}

std::string render_completion(const BehaviorMode& mode, const Problem& problem,
                              const std::optional<Decimal>& answer) {
  if (mode.style == ModeStyle::kPromptRepeat) return render_prompt_repeat();
  if (!answer) throw ContractViolation("render_completion: mode '" + mode.id + "' needs an answer");
  if (problem.terms.empty()) throw ContractViolation("render_completion: empty problem");
  switch (mode.style) {
    case ModeStyle::kLatexClean: return render_latex(problem, *answer);
    case ModeStyle::kCertainly: return render_certainly(problem, *answer);
    case ModeStyle::kPythonBlock: return render_python(problem, *answer);
    case ModeStyle::kNonEnglish: return render_nonenglish(problem, *answer);
    case ModeStyle::kBrief: return render_brief(problem, *answer);
    case ModeStyle::kPromptRepeat: break;
  }
  throw ContractViolation("render_completion: unknown style");
}

Rollout sample_rollout(const std::vector<BehaviorMode>& modes, const PolicyParams& params,
                       const Problem& problem, std::uint32_t problem_index,
                       RolloutStreams& streams) {
  if (modes.size() != params.num_modes()) throw ContractViolation("sample_rollout: mode count mismatch");
  Rollout r;
  r.problem_index = problem_index;
  const auto mp = params.mode_probs();
  r.mode = streams.mode.categorical(mp);
  const auto bp = params.bucket_probs(r.mode);
  r.bucket = static_cast<int>(streams.bucket.categorical(bp));
  const BehaviorMode& mode = modes[r.mode];
  if (!mode.answerless()) r.answer = answer_from_bucket(r.bucket, problem.ground_truth, streams.deviation);
  r.text = render_completion(mode, problem, r.answer);
  r.grad = logprob_grad(params, r.mode, r.bucket);
  return r;
}

PolicyParams apply_update(const PolicyParams& params, const PolicyGradient& accumulated,
                          double learning_rate, std::size_t rollout_count) {
  if (rollout_count == 0) throw ContractViolation("apply_update: zero rollouts");
  if (accumulated.mode.size() != params.num_modes()) {
    throw ContractViolation("apply_update: gradient shape mismatch");
  }
  if (!std::isfinite(learning_rate) || !accumulated.finite() || !params.finite()) {
    throw NonFiniteUpdate("non-finite gradient or learning rate; update skipped");
  }
  const double scale = learning_rate / static_cast<double>(rollout_count);
  PolicyParams next = params;
  for (std::size_t i = 0; i < next.num_modes(); ++i) {
    next.mode_logits[i] += scale * accumulated.mode[i];
    for (int k = 0; k < kNumBuckets; ++k) next.bucket_logits[i][k] += scale * accumulated.bucket[i][k];
  }
  if (!next.finite()) throw NonFiniteUpdate("update produced non-finite parameters");
  return next;
}

}  // namespace rlvrsim
