#include "rlvrsim/advantage.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "rlvrsim/decimal.hpp"

namespace rlvrsim {
namespace {

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

bool alphabetic(std::string_view word) {
  return std::all_of(word.begin(), word.end(),
                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; });
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view estimator_name(Estimator e) {
  return e == Estimator::kMeanStd ? "mean_std" : "mean_only";
}

std::optional<Estimator> estimator_from_name(std::string_view name) {
  if (name == "mean_std") return Estimator::kMeanStd;
  if (name == "mean_only") return Estimator::kMeanOnly;
  return std::nullopt;
}

std::vector<double> group_advantages(std::span<const int> rewards, const AdvantageConfig& config) {
  if (rewards.size() < 2) throw ContractViolation("group_advantages: group size must be >= 2");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (int r : rewards) mean += r;
  mean /= n;
  std::vector<double> out(rewards.size(), 0.0);
  const bool constant =
      std::all_of(rewards.begin(), rewards.end(), [&](int r) { return r == rewards[0]; });
  if (constant) return out;
  if (config.estimator == Estimator::kMeanOnly) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rewards[i] - mean;
    return out;
  }
  double var = 0.0;
  for (int r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

std::optional<double> conditional_advantage(std::span<const ScoredText> rollouts,
                                            std::string_view pattern) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rollouts) {
    if (r.text.find(pattern) != std::string::npos) {
      sum += r.oracle_advantage;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::vector<TrigramStat> scan_trigrams(std::span<const ScoredText> rollouts,
                                       const TrigramScanConfig& config) {
  if (rollouts.empty()) throw ContractViolation("scan_trigrams: empty rollout set");
  struct Acc {
    std::size_t docs = 0;
    double adv = 0.0;
  };
  std::map<std::string, Acc> counts;
  for (const auto& r : rollouts) {
    const auto words = split_words(r.text);
    std::set<std::string> present;
    for (std::size_t i = 0; i + 2 < words.size(); ++i) {
      if (config.alphabetic_only &&
          !(alphabetic(words[i]) && alphabetic(words[i + 1]) && alphabetic(words[i + 2]))) {
        continue;
      }
      std::string t(words[i]);
      t += ' ';
      t += words[i + 1];
      t += ' ';
      t += words[i + 2];
      present.insert(std::move(t));
    }
    for (const auto& t : present) {
      auto& a = counts[t];
      ++a.docs;
      a.adv += r.oracle_advantage;
    }
  }
  const double total = static_cast<double>(rollouts.size());
  std::vector<TrigramStat> out;
  for (const auto& [t, a] : counts) {
    const double f = static_cast<double>(a.docs) / total;
    if (f < config.freq_lo || f > config.freq_hi) continue;
    out.push_back({t, f, a.adv / static_cast<double>(a.docs)});
  }
  std::stable_sort(out.begin(), out.end(), [](const TrigramStat& x, const TrigramStat& y) {
    if (x.frequency != y.frequency) return x.frequency > y.frequency;
    return x.trigram < y.trigram;
  });
  return out;
}

std::string trigrams_to_csv(std::span<const TrigramStat> rows) {
  std::string out = "trigram,frequency,conditional_advantage\n";
  char buf[64];
  for (const auto& r : rows) {
    out += csv_field(r.trigram);
    std::snprintf(buf, sizeof buf, ",%.7g,%.7g\n", r.frequency, r.conditional_advantage);
    out += buf;
  }
  return out;
}

}  // namespace rlvrsim
