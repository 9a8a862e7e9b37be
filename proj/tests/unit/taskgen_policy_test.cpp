#include <gtest/gtest.h>

#include <cmath>

#include "rlvrsim/policy.hpp"
#include "rlvrsim/taskgen.hpp"

namespace rlvrsim {
namespace {

Problem make_problem(std::vector<std::string> terms, std::vector<Op> ops) {
  Problem p;
  for (const auto& t : terms) p.terms.push_back(*Decimal::parse(t));
  p.operators = std::move(ops);
  p.ground_truth = evaluate_chain(p.terms, p.operators);
  p.prompt = render_prompt(p);
  return p;
}

TEST(Taskgen, WorkedValues) {
  const auto a = make_problem({"332.419", "993.538", "740.756"}, {Op::kMinus, Op::kPlus});
  EXPECT_EQ(a.ground_truth.to_string(), "79.637");
  const auto b = make_problem({"481.869", "519.413", "776.7711", "734.133"},
                              {Op::kPlus, Op::kPlus, Op::kMinus});
  EXPECT_EQ(b.ground_truth.to_string(), "1043.9201");
  EXPECT_EQ(make_problem({"5.000"}, {}).ground_truth.to_string(), "5.000");
}

TEST(Taskgen, LengthMismatchIsContractViolation) {
  const std::vector<Decimal> terms{Decimal(1, 0), Decimal(2, 0)};
  EXPECT_THROW(evaluate_chain(terms, std::vector<Op>{}), ContractViolation);
  EXPECT_THROW(evaluate_chain(std::vector<Decimal>{}, std::vector<Op>{}), ContractViolation);
}

TEST(Taskgen, PromptIsByteExact) {
  const auto p = make_problem({"481.869", "519.413", "776.7711", "734.133"},
                              {Op::kPlus, Op::kPlus, Op::kMinus});
  EXPECT_EQ(p.prompt,
            "State the final answer to the following arithmetic problem: "
            "481.869 + 519.413 + 776.7711 - 734.133 =\n"
            "Please reason step by step, and put your final answer within \\boxed{}.");
  EXPECT_EQ(render_prompt(p), p.prompt);
  EXPECT_EQ(make_problem({"5.000"}, {}).prompt,
            "State the final answer to the following arithmetic problem: 5.000 =\n" +
                std::string(kPromptInstruction));
}

TEST(Taskgen, GeneratedProblemsRespectBounds) {
  const TaskConfig config;
  for (std::uint32_t i = 0; i < 10000; ++i) {
    CounterStream s(11, {i, 0, 0, Purpose::kProblem});
    const auto p = generate_problem(config, s);
    ASSERT_GE(p.terms.size(), 3u);
    ASSERT_LE(p.terms.size(), 6u);
    ASSERT_EQ(p.operators.size() + 1, p.terms.size());
    for (const auto& t : p.terms) {
      ASSERT_FALSE(t.is_negative());
      ASSERT_GE(t.integer_digits(), 3);
      ASSERT_LE(t.integer_digits(), 6);
      ASSERT_GE(t.scale(), 3);
      ASSERT_LE(t.scale(), 6);
    }
    ASSERT_EQ(p.ground_truth, evaluate_chain(p.terms, p.operators));
  }
}

TEST(Taskgen, FixedTermCounts) {
  TaskConfig three;
  three.min_terms = three.max_terms = 3;
  TaskConfig one;
  one.min_terms = one.max_terms = 1;
  CounterStream s(5, {});
  const auto p = generate_problem(three, s);
  EXPECT_EQ(p.terms.size(), 3u);
  EXPECT_EQ(p.operators.size(), 2u);
  const auto q = generate_problem(one, s);
  ASSERT_EQ(q.terms.size(), 1u);
  EXPECT_TRUE(q.ground_truth.same_representation(q.terms[0]));
}

TEST(Taskgen, InvalidConfigRejected) {
  TaskConfig c;
  c.min_terms = 0;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = {};
  c.min_digits = 7;
  EXPECT_THROW(c.validate(), ContractViolation);
}

const BehaviorMode& mode_with(ModeStyle style) {
  static const auto modes = default_modes();
  for (const auto& m : modes) {
    if (m.style == style) return m;
  }
  throw std::logic_error("missing mode");
}

TEST(Policy, LatexTemplateMatchesReferenceCompletion) {
  const auto p = make_problem({"332.419", "993.538", "740.756"}, {Op::kMinus, Op::kPlus});
  const auto text = render_completion(mode_with(ModeStyle::kLatexClean), p, p.ground_truth);
  EXPECT_EQ(text,
            "To solve the arithmetic problem step-by-step:\n"
            "\n"
            "1. Subtract 993.538 from 332.419:\n"
            "\\[\n"
            "332.419 - 993.538 = -661.119\n"
            "\\]\n"
            "\n"
            "2. Add 740.756 to the result:\n"
            "\\[\n"
            "-661.119 + 740.756 = 79.637\n"
            "\\]\n"
            "\n"
            "So, the final answer to the arithmetic problem is:\n"
            "\\[\n"
            "\\boxed{79.637}\n"
            "\\]\n");
}

TEST(Policy, TemplatesCarryTheirFeatures) {
  const auto p = make_problem({"332.419", "993.538", "740.756"}, {Op::kMinus, Op::kPlus});
  const auto wrong = *Decimal::parse("-33.054");
  const auto cert = render_completion(mode_with(ModeStyle::kCertainly), p, p.ground_truth);
  EXPECT_EQ(cert.rfind("Certainly", 0), 0u);
  EXPECT_NE(cert.find("\\["), std::string::npos);
  const auto py = render_completion(mode_with(ModeStyle::kPythonBlock), p, wrong);
  EXPECT_NE(py.find("python"), std::string::npos);
  EXPECT_NE(py.find("\\boxed{-33.054}"), std::string::npos);
  EXPECT_EQ(render_completion(mode_with(ModeStyle::kBrief), p, p.ground_truth).find("\\["),
            std::string::npos);
  const auto rep = render_completion(mode_with(ModeStyle::kPromptRepeat), p, std::nullopt);
  EXPECT_EQ(rep.find("\\boxed{}"), rep.find("\\boxed{"));
  EXPECT_GE(rep.size(), 2048u);
  EXPECT_THROW(render_completion(mode_with(ModeStyle::kBrief), p, std::nullopt), ContractViolation);
}

TEST(Policy, BucketAnswersLandOnTheirSide) {
  const auto gt = *Decimal::parse("79.637");
  for (std::uint32_t i = 0; i < 2000; ++i) {
    CounterStream s(3, {i, 0, 0, Purpose::kDeviation});
    ASSERT_EQ(answer_from_bucket(kExact, gt, s), gt);
    const auto sb = answer_from_bucket(kSmallBelow, gt, s);
    const auto sa = answer_from_bucket(kSmallAbove, gt, s);
    const auto lb = answer_from_bucket(kLargeBelow, gt, s);
    const auto la = answer_from_bucket(kLargeAbove, gt, s);
    ASSERT_LT(sb, gt);
    ASSERT_GT(sa, gt);
    ASSERT_LT(lb, gt);
    ASSERT_GT(la, gt);
    ASSERT_LE(std::abs((sb - gt).to_double()) / gt.to_double(), 0.05 + 1e-9);
    ASSERT_GE(std::abs((la - gt).to_double()) / gt.to_double(), 0.2 - 1e-3);
    ASSERT_EQ(sb.scale(), gt.scale());
  }
}

TEST(Policy, GradientMatchesFiniteDifference) {
  auto params = PolicyParams::from_modes(default_modes());
  const std::size_t mode = 2;
  const int bucket = kLargeAbove;
  const auto g = logprob_grad(params, mode, bucket);
  const double h = 1e-6;
  for (std::size_t k = 0; k < params.num_modes(); ++k) {
    auto up = params, down = params;
    up.mode_logits[k] += h;
    down.mode_logits[k] -= h;
    const double fd = (log_prob(up, mode, bucket) - log_prob(down, mode, bucket)) / (2 * h);
    EXPECT_NEAR(g.mode[k], fd, 1e-6);
  }
  EXPECT_EQ(g.bucket_row, mode);
  for (int b = 0; b < kNumBuckets; ++b) {
    auto up = params, down = params;
    up.bucket_logits[mode][b] += h;
    down.bucket_logits[mode][b] -= h;
    const double fd = (log_prob(up, mode, bucket) - log_prob(down, mode, bucket)) / (2 * h);
    EXPECT_NEAR(g.bucket[b], fd, 1e-6);
  }
}

TEST(Policy, NonFiniteUpdateLeavesParamsAlone) {
  const auto params = PolicyParams::from_modes(default_modes());
  PolicyGradient acc(params.num_modes());
  acc.mode[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(apply_update(params, acc, 0.1, 4), NonFiniteUpdate);
  PolicyGradient zero(params.num_modes());
  EXPECT_EQ(apply_update(params, zero, 0.1, 4), params);
}

TEST(Policy, DefaultInitialProbabilities) {
  const auto probs = PolicyParams::from_modes(default_modes()).mode_probs();
  double total = 0.0;
  for (double p : probs) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

}  // namespace
}  // namespace rlvrsim
