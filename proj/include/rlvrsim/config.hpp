#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rlvrsim/metrics.hpp"
#include "rlvrsim/trainer.hpp"

namespace rlvrsim {

// Bad configuration input; carries the offending key and 1-based line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& message);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct OutputConfig {
  std::string dir = "runs";
  bool dump_rollouts = false;
  bool operator==(const OutputConfig&) const = default;
};

struct SweepConfig {
  std::vector<std::uint64_t> seeds{0};
  // Verifier descriptors; "standard" expands to the nine standard patterns.
  std::vector<std::string> verifiers{"standard"};
  bool operator==(const SweepConfig&) const = default;
};

struct ExperimentConfig {
  TrainConfig train;
  ClassifierThresholds classifier;
  OutputConfig output;
  SweepConfig sweep;
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

// Canonical text form: every key, fixed order, shortest round-trip numbers.
std::string serialize(const ExperimentConfig& config);
std::string serialize(const TrainConfig& config);

// 16 hex digits of FNV-1a over the canonical training configuration.
std::string fingerprint(const TrainConfig& config);

// Parses the form produced by VerifierSpec::describe().
VerifierSpec parse_verifier_descriptor(std::string_view text);

// clean, four random-noise settings, format FN, relative-error FP, and the
// two keyword FPs.
std::vector<VerifierSpec> standard_verifiers();

std::string format_double(double v);

}  // namespace rlvrsim
