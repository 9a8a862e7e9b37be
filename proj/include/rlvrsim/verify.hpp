#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rlvrsim/decimal.hpp"
#include "rlvrsim/rng.hpp"
#include "rlvrsim/taskgen.hpp"

namespace rlvrsim {

enum class Pattern {
  kClean,
  kRandomFlip,
  kFormatFn,
  kLanguageFn,
  kRelativeErrorFp,
  kWordFp,
  kLengthFp,
};

enum class Polarity { kContains, kNotContains };
enum class Side { kSymmetric, kBelow, kAbove };

std::string_view pattern_name(Pattern p);
std::optional<Pattern> pattern_from_name(std::string_view name);
std::string_view polarity_name(Polarity p);
std::optional<Polarity> polarity_from_name(std::string_view name);
std::string_view side_name(Side s);
std::optional<Side> side_from_name(std::string_view name);

// One error pattern wrapped around the ground-truth check. Only the fields
// of the selected pattern matter.
struct VerifierSpec {
  Pattern pattern = Pattern::kClean;
  double fpr = 0.0;
  double fnr = 0.0;
  Polarity polarity = Polarity::kContains;
  std::string trigger = "\\[";
  double tau = 0.1;
  Side side = Side::kSymmetric;
  std::string keyword;
  long long length_lo = 0;
  long long length_hi = 0;

  static VerifierSpec clean() { return {}; }

  void validate() const;
  // Short human label, e.g. "word_fp(python)".
  std::string describe() const;
  bool operator==(const VerifierSpec&) const = default;
};

struct Verdict {
  bool verifier_reward = false;
  bool oracle_reward = false;
  std::optional<Decimal> extracted_answer;
};

// Content of the last \boxed{...}, parsed as a decimal.
std::optional<Decimal> extract_answer(std::string_view text);

bool oracle_verify(const Problem& problem, std::string_view text);

// Fixed stopword list used by the English check.
std::span<const std::string_view> english_stopwords();

// 1 iff at least half of the letters are ASCII and the text holds at least
// two distinct stopwords. LaTeX control words are ignored.
bool english_heuristic(std::string_view text);

// Completion length in characters (Unicode code points).
std::size_t text_length(std::string_view text);

bool apply_pattern(const VerifierSpec& spec, const Problem& problem, std::string_view text,
                   bool oracle_bit, CounterStream& stream);

// Oracle plus pattern in one call.
Verdict verify(const VerifierSpec& spec, const Problem& problem, std::string_view text,
               CounterStream& stream);

// Whether a text carries the pattern's trigger; absent for patterns that
// have no text trigger (clean, random_flip, relative_error_fp).
std::optional<bool> has_trigger(const VerifierSpec& spec, std::string_view text);

}  // namespace rlvrsim
