#include <gtest/gtest.h>

#include "rlvrsim/config.hpp"
#include "rlvrsim/io.hpp"
#include "rlvrsim/report.hpp"
#include "rlvrsim/trainer.hpp"

namespace rlvrsim {
namespace {

TrainConfig small(VerifierSpec v = VerifierSpec::clean()) {
  TrainConfig c;
  c.steps = 6;
  c.queries_per_step = 8;
  c.seed = 3;
  c.verifier = std::move(v);
  return c;
}

VerifierSpec flip(double fpr, double fnr) {
  VerifierSpec v;
  v.pattern = Pattern::kRandomFlip;
  v.fpr = fpr;
  v.fnr = fnr;
  return v;
}

TEST(SelectVerifier, PeriodTenGivesFiftyCleanSteps) {
  auto c = small(flip(0.2, 0.0));
  c.alternation_period = 10;
  int clean = 0;
  for (std::uint32_t s = 0; s < 500; ++s) {
    const bool is_clean = select_verifier(s, c) == VerifierSpec::clean();
    EXPECT_EQ(is_clean, is_clean_alternation_step(s, c));
    clean += is_clean;
  }
  EXPECT_EQ(clean, 50);
  c.alternation_period.reset();
  EXPECT_EQ(select_verifier(0, c), c.verifier);
}

TEST(SelectVerifier, PeriodOneMatchesCleanRun) {
  auto alt = small(flip(0.5, 0.5));
  alt.alternation_period = 1;
  const auto a = run_training(alt);
  const auto b = run_training(small());
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].oracle_reward, b.steps[i].oracle_reward);
    EXPECT_EQ(a.steps[i].verifier_reward, b.steps[i].verifier_reward);
    EXPECT_EQ(a.steps[i].mode_frequencies, b.steps[i].mode_frequencies);
    EXPECT_EQ(a.steps[i].mean_length, b.steps[i].mean_length);
    EXPECT_FALSE(a.steps[i].fpr);
  }
}

TEST(Training, AlternationMasksRates) {
  auto c = small(flip(0.3, 0.3));
  c.alternation_period = 3;
  const auto log = run_training(c);
  for (const auto& m : log.steps) {
    EXPECT_EQ(m.fpr.has_value(), m.step % 3 != 0) << m.step;
    EXPECT_EQ(m.fnr.has_value(), m.step % 3 != 0) << m.step;
  }
}

TEST(Training, ZeroStepsReportsInitialState) {
  auto c = small();
  c.steps = 0;
  const auto log = run_training(c);
  ASSERT_EQ(log.steps.size(), 1u);
  EXPECT_EQ(log.steps[0].step, 0u);
}

TEST(Training, DeterministicAcrossWorkers) {
  const auto c = small(flip(0.2, 0.1));
  EXPECT_EQ(steps_jsonl(run_training(c, 1)), steps_jsonl(run_training(c, 4)));
  EXPECT_EQ(run_training(c).fingerprint, fingerprint(c));
}

TEST(Training, ReplayFromDumpMatches) {
  const auto c = small(flip(0.2, 0.1));
  std::string dump;
  const auto mode_ids = [&] {
    std::vector<std::string> ids;
    for (const auto& m : c.modes) ids.push_back(m.id);
    return ids;
  }();
  const auto log = run_training(c, 2, [&](std::span<const RolloutRecord> rs) {
    for (const auto& r : rs) dump += rollout_line(r, mode_ids);
  });
  const auto records = parse_rollout_dump(dump, mode_ids);
  EXPECT_EQ(records.size(), 6u * 8u * 4u);
  EXPECT_EQ(replay_metrics(records, c), log.steps);
}

TEST(Config, EmptyFileGivesDefaults) {
  EXPECT_EQ(parse_config_text(""), ExperimentConfig{});
  EXPECT_EQ(parse_config_text("# only a comment\n\n"), ExperimentConfig{});
}

TEST(Config, WordFpKeys) {
  const auto c = parse_config_text("verifier.pattern = word_fp\nverifier.keyword = python\n");
  EXPECT_EQ(c.train.verifier.pattern, Pattern::kWordFp);
  EXPECT_EQ(c.train.verifier.keyword, "python");
}

TEST(Config, RoundTrip) {
  ExperimentConfig c;
  c.train.steps = 123;
  c.train.learning_rate = 0.1 + 0.2;
  c.train.verifier = flip(0.3, 0.1);
  c.train.alternation_period = 4;
  c.train.modes[1].initial_bucket_logits[2] = -1.0 / 3.0;
  c.classifier.window = 7;
  c.output.dump_rollouts = true;
  c.sweep.seeds = {1, 2, 9};
  c.sweep.verifiers = {"standard", "word_fp(python)"};
  const auto text = serialize(c);
  EXPECT_EQ(parse_config_text(text), c);
  EXPECT_EQ(serialize(parse_config_text(text)), text);
}

TEST(Config, ErrorsNameKeyAndLine) {
  try {
    parse_config_text("train.steps = 5\ntrain.rollouts_per_query = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "train.rollouts_per_query");
    EXPECT_EQ(e.line(), 2);
  }
  try {
    parse_config_text("\nfoo.bar = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "foo.bar");
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(parse_config_text("train.steps = x\n"), ConfigError);
  EXPECT_THROW(parse_config_text("train.steps = 1\ntrain.steps = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("train.alternation_period = 0\n"), ConfigError);
}

TEST(Config, FingerprintTracksTrainingFields) {
  TrainConfig a;
  TrainConfig b;
  b.seed = 1;
  EXPECT_EQ(fingerprint(a).size(), 16u);
  EXPECT_EQ(fingerprint(a), fingerprint(TrainConfig{}));
  EXPECT_NE(fingerprint(a), fingerprint(b));
}

TEST(Config, VerifierDescriptorsRoundTrip) {
  const auto specs = standard_verifiers();
  EXPECT_EQ(specs.size(), 9u);
  for (const auto& v : specs) EXPECT_EQ(parse_verifier_descriptor(v.describe()), v) << v.describe();
}

TEST(Io, StepsRoundTripKeepsNulls) {
  auto c = small(flip(0.3, 0.3));
  c.alternation_period = 2;
  const auto log = run_training(c);
  const auto text = steps_jsonl(log);
  const auto back = parse_steps_jsonl(text);
  EXPECT_EQ(back.mode_ids, log.mode_ids);
  EXPECT_EQ(steps_jsonl(back), text);
  EXPECT_NE(text.find("\"fpr\":null"), std::string::npos);
}

TEST(Report, SvgBreaksLinesAtGaps) {
  Chart chart;
  chart.title = "reward";
  chart.series.push_back({"run", {0.1, 0.2, std::nullopt, 0.4, 0.5}, false});
  chart.series.push_back({"clean", {0.1, 0.3, 0.5, 0.7, 0.9}, true});
  const auto svg = render_svg(chart);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  std::size_t lines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  EXPECT_EQ(lines, 3u);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

}  // namespace
}  // namespace rlvrsim
