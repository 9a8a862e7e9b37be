#include "rlvrsim/taskgen.hpp"

#include <algorithm>

namespace rlvrsim {
namespace {

std::int64_t pow10(int n) {
  std::int64_t r = 1;
  while (n-- > 0) r *= 10;
  return r;
}

}  // namespace

void TaskConfig::validate() const {
  if (min_terms < 1 || min_terms > max_terms) {
    throw ContractViolation("task: require 1 <= min_terms <= max_terms");
  }
  if (min_digits < 1 || min_digits > max_digits) {
    throw ContractViolation("task: require 1 <= min_digits <= max_digits");
  }
  if (min_decimal_places < 0 || min_decimal_places > max_decimal_places) {
    throw ContractViolation("task: require 0 <= min_decimal_places <= max_decimal_places");
  }
  // Keep every term and chain sum comfortably inside a 64-bit mantissa.
  if (max_digits + max_decimal_places > 15 || max_terms > 1000) {
    throw ContractViolation("task: term magnitude or count too large for exact evaluation");
  }
}

Decimal evaluate_chain(std::span<const Decimal> terms, std::span<const Op> operators) {
  if (terms.empty()) throw ContractViolation("evaluate_chain: no terms");
  if (operators.size() + 1 != terms.size()) {
    throw ContractViolation("evaluate_chain: expected " + std::to_string(terms.size() - 1) +
                            " operators, got " + std::to_string(operators.size()));
  }
  Decimal acc = terms[0];
  for (std::size_t i = 0; i < operators.size(); ++i) {
    acc = operators[i] == Op::kPlus ? acc + terms[i + 1] : acc - terms[i + 1];
  }
  // Sums already widen to the larger scale; a single term keeps its own.
  int scale = 0;
  for (const auto& t : terms) scale = std::max(scale, t.scale());
  return acc.rescaled(scale);
}

std::string Problem::expression() const {
  std::string out = terms.empty() ? "" : terms[0].to_string();
  for (std::size_t i = 0; i < operators.size(); ++i) {
    out += operators[i] == Op::kPlus ? " + " : " - ";
    out += terms[i + 1].to_string();
  }
  return out;
}

std::string render_prompt(const Problem& problem) {
  std::string out = "State the final answer to the following arithmetic problem: ";
  out += problem.expression();
  out += " =\n";
  out += kPromptInstruction;
  return out;
}

Problem generate_problem(const TaskConfig& config, CounterStream& stream) {
  config.validate();
  Problem p;
  const auto n_terms = static_cast<int>(stream.uniform_int(config.min_terms, config.max_terms));
  p.terms.reserve(n_terms);
  for (int i = 0; i < n_terms; ++i) {
    const auto digits = static_cast<int>(stream.uniform_int(config.min_digits, config.max_digits));
    const auto places = static_cast<int>(
        stream.uniform_int(config.min_decimal_places, config.max_decimal_places));
    const auto lo = static_cast<std::uint64_t>(pow10(digits - 1));
    const auto hi = static_cast<std::uint64_t>(pow10(digits) - 1);
    const auto int_part = static_cast<std::int64_t>(stream.uniform_int(digits == 1 ? 0 : lo, hi));
    const auto frac = static_cast<std::int64_t>(
        stream.uniform_int(0, static_cast<std::uint64_t>(pow10(places) - 1)));
    std::int64_t mantissa = int_part * pow10(places) + frac;
    if (config.allow_negation && stream.uniform() < 0.5) mantissa = -mantissa;
    p.terms.emplace_back(mantissa, places);
  }
  for (int i = 1; i < n_terms; ++i) {
    p.operators.push_back(stream.uniform() < 0.5 ? Op::kPlus : Op::kMinus);
  }
  p.ground_truth = evaluate_chain(p.terms, p.operators);
  p.prompt = render_prompt(p);
  return p;
}

}  // namespace rlvrsim
