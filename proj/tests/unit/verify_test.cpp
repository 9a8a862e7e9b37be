#include <gtest/gtest.h>

#include "rlvrsim/taskgen.hpp"
#include "rlvrsim/verify.hpp"

namespace rlvrsim {
namespace {

Problem problem_with_truth(const char* gt) {
  Problem p;
  p.terms = {*Decimal::parse(gt)};
  p.ground_truth = p.terms[0];
  p.prompt = render_prompt(p);
  return p;
}

TEST(ExtractAnswer, LastBoxWins) {
  EXPECT_EQ(extract_answer("final answer is: \\[ \\boxed{79.637} \\]"), Decimal::parse("79.637"));
  EXPECT_EQ(extract_answer("\\[ 1,001.282 \\] then \\boxed{1043.9201}"), Decimal::parse("1043.9201"));
  EXPECT_EQ(extract_answer("\\boxed{1} and later \\boxed{-2.5}"), Decimal::parse("-2.5"));
  EXPECT_EQ(extract_answer("\\boxed{1,043.9201}"), Decimal::parse("1043.9201"));
}

TEST(ExtractAnswer, AbsentCases) {
  EXPECT_FALSE(extract_answer("no box here"));
  EXPECT_FALSE(extract_answer("\\boxed{}"));
  EXPECT_FALSE(extract_answer("\\boxed{x + 1}"));
  EXPECT_FALSE(extract_answer("\\boxed{12"));
}

TEST(OracleVerify, ValueEquality) {
  const auto p = problem_with_truth("79.637");
  EXPECT_TRUE(oracle_verify(p, "\\boxed{79.637}"));
  EXPECT_TRUE(oracle_verify(p, "\\boxed{79.6370}"));
  EXPECT_FALSE(oracle_verify(p, "\\boxed{-33.054}"));
  EXPECT_FALSE(oracle_verify(p, "79.637"));
}

TEST(EnglishHeuristic, Examples) {
  EXPECT_TRUE(english_heuristic("Certainly! Let's solve the arithmetic problem"));
  EXPECT_FALSE(english_heuristic("计算 332 减 993 等于 -661"));
  EXPECT_FALSE(english_heuristic("答案 是 \\boxed{79.637}"));
  EXPECT_FALSE(english_heuristic(""));
  EXPECT_FALSE(english_heuristic("the"));
  EXPECT_FALSE(english_heuristic("\\the \\and"));
  EXPECT_EQ(english_stopwords().size(), 50u);
}

TEST(TextLength, CountsCodePoints) {
  EXPECT_EQ(text_length("abc"), 3u);
  EXPECT_EQ(text_length("答案"), 2u);
}

TEST(ApplyPattern, RelativeErrorExamples) {
  const auto p = problem_with_truth("100.000");
  CounterStream s(0, {});
  VerifierSpec sym;
  sym.pattern = Pattern::kRelativeErrorFp;
  sym.tau = 0.1;
  EXPECT_TRUE(apply_pattern(sym, p, "\\boxed{90.500}", false, s));
  EXPECT_FALSE(apply_pattern(sym, p, "\\boxed{89.000}", false, s));
  auto below = sym;
  below.side = Side::kBelow;
  EXPECT_TRUE(apply_pattern(below, p, "\\boxed{97.000}", false, s));
  EXPECT_FALSE(apply_pattern(below, p, "\\boxed{104.000}", false, s));
  auto above = sym;
  above.side = Side::kAbove;
  EXPECT_TRUE(apply_pattern(above, p, "\\boxed{104.000}", false, s));
  EXPECT_FALSE(apply_pattern(above, p, "\\boxed{97.000}", false, s));
  EXPECT_FALSE(apply_pattern(sym, p, "no answer", false, s));
}

TEST(ApplyPattern, TextTriggers) {
  const auto p = problem_with_truth("1.0");
  CounterStream s(0, {});
  VerifierSpec format;
  format.pattern = Pattern::kFormatFn;
  EXPECT_FALSE(apply_pattern(format, p, "\\[ \\boxed{1.0} \\]", true, s));
  EXPECT_TRUE(apply_pattern(format, p, "\\boxed{1.0}", true, s));
  format.polarity = Polarity::kNotContains;
  EXPECT_TRUE(apply_pattern(format, p, "\\[ \\boxed{1.0} \\]", true, s));
  EXPECT_FALSE(apply_pattern(format, p, "\\boxed{1.0}", true, s));

  VerifierSpec word;
  word.pattern = Pattern::kWordFp;
  word.keyword = "python";
  EXPECT_TRUE(apply_pattern(word, p, "```python\n```", false, s));
  EXPECT_FALSE(apply_pattern(word, p, "plain", false, s));
  EXPECT_EQ(has_trigger(word, "```python"), true);

  VerifierSpec lang;
  lang.pattern = Pattern::kLanguageFn;
  EXPECT_FALSE(apply_pattern(lang, p, "So the answer is \\boxed{1.0}", true, s));
  EXPECT_TRUE(apply_pattern(lang, p, "答案 是 \\boxed{1.0}", true, s));

  VerifierSpec len;
  len.pattern = Pattern::kLengthFp;
  len.length_lo = 3;
  len.length_hi = 5;
  EXPECT_TRUE(apply_pattern(len, p, "abcd", false, s));
  EXPECT_FALSE(apply_pattern(len, p, "abcdef", false, s));
  EXPECT_FALSE(has_trigger(VerifierSpec::clean(), "x"));
}

TEST(ApplyPattern, RandomFlipExtremes) {
  const auto p = problem_with_truth("1.0");
  VerifierSpec v;
  v.pattern = Pattern::kRandomFlip;
  v.fpr = 1.0;
  v.fnr = 1.0;
  CounterStream s(0, {});
  for (int i = 0; i < 100; ++i) {
    ASSERT_TRUE(apply_pattern(v, p, "", false, s));
    ASSERT_FALSE(apply_pattern(v, p, "", true, s));
  }
}

TEST(VerifierSpec, ValidationAndLabels) {
  VerifierSpec v;
  v.pattern = Pattern::kRandomFlip;
  v.fpr = 1.5;
  EXPECT_THROW(v.validate(), ContractViolation);
  VerifierSpec w;
  w.pattern = Pattern::kWordFp;
  EXPECT_THROW(w.validate(), ContractViolation);
  w.keyword = "python";
  EXPECT_NO_THROW(w.validate());
  EXPECT_EQ(w.describe(), "word_fp(python)");
}

}  // namespace
}  // namespace rlvrsim
