#include "rlvrsim/verify.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

namespace rlvrsim {
namespace {

constexpr std::array<std::string_view, 7> kPatternNames = {
    "clean", "random_flip", "format_fn", "language_fn", "relative_error_fp", "word_fp", "length_fp"};

constexpr std::array<std::string_view, 50> kStopwords = {
    "the",  "a",    "an",   "and",  "or",   "of",   "to",    "in",   "on",    "for",
    "with", "by",   "from", "at",   "as",   "is",   "are",   "was",  "be",    "this",
    "that", "these", "it",  "we",   "you",  "your", "our",   "let",  "let's", "so",
    "then", "first", "next", "now", "final", "answer", "result", "step", "add", "subtract",
    "into", "which", "what", "will", "can", "need", "using", "all", "not", "but"};

bool is_ascii_letter(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Decodes one UTF-8 code point; malformed bytes decode as themselves.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int extra = 0;
  char32_t cp = b0;
  if (b0 >= 0xF0 && b0 < 0xF8) {
    extra = 3;
    cp = b0 & 0x07;
  } else if (b0 >= 0xE0) {
    extra = b0 < 0xF0 ? 2 : 0;
    cp = b0 & 0x0F;
  } else if (b0 >= 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  }
  if (extra == 0 || i + extra >= s.size()) {
    ++i;
    return b0;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(extra) + 1;
  return cp;
}

// Letters outside ASCII: CJK, Latin supplements, Cyrillic, Greek and similar.
bool is_non_ascii_letter(char32_t c) {
  return (c >= 0x00C0 && c <= 0x024F && c != 0x00D7 && c != 0x00F7) ||
         (c >= 0x0370 && c <= 0x052F) || (c >= 0x0590 && c <= 0x06FF) ||
         (c >= 0x0900 && c <= 0x0DFF) || (c >= 0x3040 && c <= 0x30FF) ||
         (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x4E00 && c <= 0x9FFF) ||
         (c >= 0xAC00 && c <= 0xD7AF) || (c >= 0xF900 && c <= 0xFAFF);
}

bool contains(std::string_view text, std::string_view needle) {
  return !needle.empty() && text.find(needle) != std::string_view::npos;
}

bool in_relative_band(const VerifierSpec& spec, const Decimal& answer, const Decimal& gt) {
  const double g = std::abs(gt.to_double());
  if (g < 1e-12) return false;
  const double e = (answer - gt).to_double() / g;
  switch (spec.side) {
    case Side::kSymmetric: return std::abs(e) < spec.tau;
    case Side::kBelow: return e < 0.0 && e > -spec.tau;
    case Side::kAbove: return e > 0.0 && e < spec.tau;
  }
  return false;
}

bool probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string_view pattern_name(Pattern p) { return kPatternNames.at(static_cast<std::size_t>(p)); }

std::optional<Pattern> pattern_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kPatternNames.size(); ++i) {
    if (kPatternNames[i] == name) return static_cast<Pattern>(i);
  }
  return std::nullopt;
}

std::string_view polarity_name(Polarity p) {
  return p == Polarity::kContains ? "contains" : "not_contains";
}

std::optional<Polarity> polarity_from_name(std::string_view name) {
  if (name == "contains") return Polarity::kContains;
  if (name == "not_contains") return Polarity::kNotContains;
  return std::nullopt;
}

std::string_view side_name(Side s) {
  switch (s) {
    case Side::kSymmetric: return "symmetric";
    case Side::kBelow: return "below";
    case Side::kAbove: return "above";
  }
  return "symmetric";
}

std::optional<Side> side_from_name(std::string_view name) {
  if (name == "symmetric") return Side::kSymmetric;
  if (name == "below") return Side::kBelow;
  if (name == "above") return Side::kAbove;
  return std::nullopt;
}

void VerifierSpec::validate() const {
  switch (pattern) {
    case Pattern::kRandomFlip:
      if (!probability(fpr) || !probability(fnr)) {
        throw ContractViolation("verifier: fpr and fnr must lie in [0, 1]");
      }
      break;
    case Pattern::kFormatFn:
      if (trigger.empty()) throw ContractViolation("verifier: format_fn needs a non-empty trigger");
      break;
    case Pattern::kRelativeErrorFp:
      if (!std::isfinite(tau) || tau <= 0.0) throw ContractViolation("verifier: tau must be > 0");
      break;
    case Pattern::kWordFp:
      if (keyword.empty()) throw ContractViolation("verifier: word_fp needs a keyword");
      break;
    case Pattern::kLengthFp:
      if (length_lo > length_hi) throw ContractViolation("verifier: length lo must be <= hi");
      break;
    case Pattern::kClean:
    case Pattern::kLanguageFn:
      break;
  }
}

std::string VerifierSpec::describe() const {
  std::string out(pattern_name(pattern));
  switch (pattern) {
    case Pattern::kRandomFlip: return out + "(fpr=" + fmt(fpr) + ",fnr=" + fmt(fnr) + ")";
    case Pattern::kFormatFn:
      return out + "(" + std::string(polarity_name(polarity)) + "," + trigger + ")";
    case Pattern::kRelativeErrorFp:
      return out + "(tau=" + fmt(tau) + "," + std::string(side_name(side)) + ")";
    case Pattern::kWordFp: return out + "(" + keyword + ")";
    case Pattern::kLengthFp:
      return out + "(" + std::to_string(length_lo) + "," + std::to_string(length_hi) + ")";
    case Pattern::kClean:
    case Pattern::kLanguageFn:
      break;
  }
  return out;
}

std::optional<Decimal> extract_answer(std::string_view text) {
  constexpr std::string_view kOpen = "\\boxed{";
  const auto pos = text.rfind(kOpen);
  if (pos == std::string_view::npos) return std::nullopt;
  const std::size_t start = pos + kOpen.size();
  int depth = 1;
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] == '{') ++depth;
    if (text[i] == '}' && --depth == 0) return Decimal::parse(text.substr(start, i - start));
  }
  return std::nullopt;
}

bool oracle_verify(const Problem& problem, std::string_view text) {
  const auto a = extract_answer(text);
  return a && *a == problem.ground_truth;
}

std::span<const std::string_view> english_stopwords() { return kStopwords; }

bool english_heuristic(std::string_view text) {
  std::size_t ascii = 0, other = 0;
  std::set<std::string> seen;
  std::string word;
  bool in_command = false;
  auto flush = [&] {
    if (!word.empty() && std::find(kStopwords.begin(), kStopwords.end(), word) != kStopwords.end()) {
      seen.insert(word);
    }
    word.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const char32_t c = next_code_point(text, i);
    if (c == '\\') {
      flush();
      in_command = true;
      continue;
    }
    if (is_ascii_letter(c)) {
      if (in_command) continue;
      ++ascii;
      word += static_cast<char>(std::tolower(static_cast<int>(c)));
      continue;
    }
    in_command = false;
    if (c == '\'' && !word.empty()) {
      word += '\'';
      continue;
    }
    flush();
    if (is_non_ascii_letter(c)) ++other;
  }
  flush();
  const std::size_t letters = ascii + other;
  if (letters == 0) return false;
  return 2 * ascii >= letters && seen.size() >= 2;
}

std::size_t text_length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++n) next_code_point(text, i);
  return n;
}

bool apply_pattern(const VerifierSpec& spec, const Problem& problem, std::string_view text,
                   bool oracle_bit, CounterStream& stream) {
  switch (spec.pattern) {
    case Pattern::kClean: return oracle_bit;
    case Pattern::kRandomFlip: {
      // One draw per verdict either way keeps stream use independent of the bit.
      const double u = stream.uniform();
      return oracle_bit ? !(u < spec.fnr) : u < spec.fpr;
    }
    case Pattern::kFormatFn: {
      const bool has = contains(text, spec.trigger);
      const bool fires = spec.polarity == Polarity::kContains ? has : !has;
      return oracle_bit && !fires;
    }
    case Pattern::kLanguageFn: return oracle_bit && !english_heuristic(text);
    case Pattern::kRelativeErrorFp: {
      if (oracle_bit) return true;
      const auto a = extract_answer(text);
      return a && in_relative_band(spec, *a, problem.ground_truth);
    }
    case Pattern::kWordFp: return oracle_bit || contains(text, spec.keyword);
    case Pattern::kLengthFp: {
      if (oracle_bit) return true;
      const auto len = static_cast<long long>(text_length(text));
      return spec.length_lo <= len && len <= spec.length_hi;
    }
  }
  return oracle_bit;
}

Verdict verify(const VerifierSpec& spec, const Problem& problem, std::string_view text,
               CounterStream& stream) {
  Verdict v;
  v.extracted_answer = extract_answer(text);
  v.oracle_reward = v.extracted_answer && *v.extracted_answer == problem.ground_truth;
  v.verifier_reward = apply_pattern(spec, problem, text, v.oracle_reward, stream);
  return v;
}

std::optional<bool> has_trigger(const VerifierSpec& spec, std::string_view text) {
  switch (spec.pattern) {
    case Pattern::kFormatFn: return contains(text, spec.trigger);
    case Pattern::kWordFp: return contains(text, spec.keyword);
    case Pattern::kLanguageFn: return english_heuristic(text);
    case Pattern::kLengthFp: {
      const auto len = static_cast<long long>(text_length(text));
      return spec.length_lo <= len && len <= spec.length_hi;
    }
    default: return std::nullopt;
  }
}

}  // namespace rlvrsim
