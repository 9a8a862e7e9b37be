#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlvrsim/decimal.hpp"
#include "rlvrsim/rng.hpp"

namespace rlvrsim {

// Difficulty knobs of the decimal chain-sum task. Defaults are the
// training configuration of the reference experiments.
struct TaskConfig {
  int min_terms = 3;
  int max_terms = 6;
  int min_digits = 3;
  int max_digits = 6;
  int min_decimal_places = 3;
  int max_decimal_places = 6;
  bool allow_negation = false;
  std::uint64_t seed = 0;

  // Throws ContractViolation naming the first broken bound.
  void validate() const;
  bool operator==(const TaskConfig&) const = default;
};

enum class Op { kPlus, kMinus };

struct Problem {
  std::vector<Decimal> terms;
  std::vector<Op> operators;  // size terms.size() - 1
  Decimal ground_truth;
  std::string prompt;

  // "481.869 + 519.413 + 776.7711 - 734.133"
  std::string expression() const;
};

// Left-to-right exact evaluation. The result carries the largest scale
// among the terms.
Decimal evaluate_chain(std::span<const Decimal> terms, std::span<const Op> operators);

std::string render_prompt(const Problem& problem);

Problem generate_problem(const TaskConfig& config, CounterStream& stream);

// Instruction appended to every prompt; also what the prompt-repeat mode echoes.
inline constexpr std::string_view kPromptInstruction =
    "Please reason step by step, and put your final answer within \\boxed{}.";

}  // namespace rlvrsim
