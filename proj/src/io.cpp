#include "rlvrsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rlvrsim {
namespace {

using nlohmann::json;

template <typename J>
std::optional<double> opt_number(const J& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.template get<double>();
}

std::string csv_opt(std::optional<double> v) { return v ? format_metric(v) : ""; }

std::string csv_opt(std::optional<std::size_t> v) { return v ? std::to_string(*v) : ""; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    start = end + 1;
  }
  return out;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_metric(std::optional<double> v) {
  if (!v) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.7g", *v);
  return buf;
}

std::string step_line(const StepMetrics& m, std::span<const std::string> mode_ids) {
  std::string out = "{\"step\":" + std::to_string(m.step);
  out += ",\"oracle_reward\":" + format_metric(m.oracle_reward);
  out += ",\"verifier_reward\":" + format_metric(m.verifier_reward);
  out += ",\"fpr\":" + format_metric(m.fpr);
  out += ",\"fnr\":" + format_metric(m.fnr);
  out += ",\"youden_j\":" + format_metric(m.youden_j);
  out += ",\"trigger_frequency\":" + format_metric(m.trigger_frequency);
  out += ",\"mean_length\":" + format_metric(m.mean_length);
  for (std::size_t i = 0; i < mode_ids.size(); ++i) {
    out += ",\"mode_freq." + mode_ids[i] + "\":" + format_metric(m.mode_frequencies.at(i));
  }
  out += ",\"active_verifier\":" + json(m.active_verifier).dump();
  if (m.aborted) out += ",\"aborted\":true";
  out += "}\n";
  return out;
}

std::string steps_jsonl(const RunLog& log) {
  std::string out;
  for (const auto& m : log.steps) out += step_line(m, log.mode_ids);
  return out;
}

RunLog parse_steps_jsonl(std::string_view text) {
  RunLog log;
  bool first = true;
  for (const auto line : lines(text)) {
    // ordered_json keeps the mode columns in file order.
    const auto j = nlohmann::ordered_json::parse(line);
    if (first) {
      for (const auto& [key, _] : j.items()) {
        if (key.rfind("mode_freq.", 0) == 0) log.mode_ids.push_back(key.substr(10));
      }
      first = false;
    }
    StepMetrics m;
    m.step = j.at("step").get<std::uint32_t>();
    m.oracle_reward = j.at("oracle_reward").get<double>();
    m.verifier_reward = j.at("verifier_reward").get<double>();
    m.fpr = opt_number(j, "fpr");
    m.fnr = opt_number(j, "fnr");
    m.youden_j = opt_number(j, "youden_j");
    m.trigger_frequency = opt_number(j, "trigger_frequency");
    m.mean_length = j.at("mean_length").get<double>();
    for (const auto& id : log.mode_ids) m.mode_frequencies.push_back(j.at("mode_freq." + id).get<double>());
    m.active_verifier = j.at("active_verifier").get<std::string>();
    m.aborted = j.value("aborted", false);
    log.aborted = log.aborted || m.aborted;
    log.steps.push_back(std::move(m));
  }
  return log;
}

SummaryRow make_summary(const std::string& run, const TrainConfig& config, const RunLog& log,
                        const DynamicsLabel& label, std::size_t window) {
  SummaryRow s;
  s.run = run;
  s.fingerprint = log.fingerprint;
  s.seed = config.seed;
  s.verifier = config.verifier.describe();
  s.alternation = config.alternation_period ? std::to_string(*config.alternation_period) : "none";
  s.steps = log.steps.size();
  s.initial_oracle = log.steps.empty() ? 0.0 : log.steps.front().oracle_reward;
  s.final_oracle = label.r_final;
  s.peak_oracle = label.r_peak;
  s.clean_final = label.clean_final;
  std::vector<double> v;
  for (const auto& m : log.steps) v.push_back(m.verifier_reward);
  if (!v.empty()) s.final_verifier = trailing_mean(v, window).back();
  for (auto it = log.steps.rbegin(); it != log.steps.rend(); ++it) {
    if (!s.final_fpr && it->fpr) s.final_fpr = it->fpr;
    if (!s.final_fnr && it->fnr) s.final_fnr = it->fnr;
  }
  s.crossing = label.crossing;
  s.clean_crossing = label.clean_crossing;
  s.label = std::string(dynamics_name(label.label));
  s.aborted = log.aborted;
  return s;
}

std::string summary_csv(std::span<const SummaryRow> rows) {
  std::string out =
      "run,fingerprint,seed,verifier,alternation,steps,initial_oracle,final_oracle,peak_oracle,"
      "clean_final,final_verifier,final_fpr,final_fnr,crossing,clean_crossing,label,aborted\n";
  for (const auto& r : rows) {
    out += csv_field(r.run) + "," + r.fingerprint + "," + std::to_string(r.seed) + "," +
           csv_field(r.verifier) + "," + r.alternation + "," + std::to_string(r.steps) + "," +
           format_metric(r.initial_oracle) + "," + format_metric(r.final_oracle) + "," +
           format_metric(r.peak_oracle) + "," + format_metric(r.clean_final) + "," +
           format_metric(r.final_verifier) + "," + csv_opt(r.final_fpr) + "," +
           csv_opt(r.final_fnr) + "," + csv_opt(r.crossing) + "," + csv_opt(r.clean_crossing) +
           "," + r.label + "," + (r.aborted ? "true" : "false") + "\n";
  }
  return out;
}

std::string rollout_line(const RolloutRecord& r, std::span<const std::string> mode_ids) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["query"] = r.query;
  j["rollout"] = r.rollout;
  j["mode"] = mode_ids[r.mode];
  j["bucket"] = r.bucket;
  j["ground_truth"] = r.ground_truth;
  j["answer"] = r.answer ? json(*r.answer) : json(nullptr);
  j["oracle_reward"] = r.oracle_reward ? 1 : 0;
  j["verifier_reward"] = r.verifier_reward ? 1 : 0;
  j["advantage"] = r.advantage;
  j["oracle_advantage"] = r.oracle_advantage;
  j["text"] = r.text;
  return j.dump() + "\n";
}

std::vector<RolloutRecord> parse_rollout_dump(std::string_view text,
                                              std::span<const std::string> mode_ids) {
  std::vector<RolloutRecord> out;
  for (const auto line : lines(text)) {
    const json j = json::parse(line);
    RolloutRecord r;
    r.step = j.at("step").get<std::uint32_t>();
    r.query = j.at("query").get<std::uint32_t>();
    r.rollout = j.at("rollout").get<std::uint32_t>();
    const auto mode = j.at("mode").get<std::string>();
    const auto it = std::find(mode_ids.begin(), mode_ids.end(), mode);
    if (it == mode_ids.end()) throw std::runtime_error("rollout dump names unknown mode '" + mode + "'");
    r.mode = static_cast<std::size_t>(it - mode_ids.begin());
    r.bucket = j.at("bucket").get<int>();
    r.ground_truth = j.at("ground_truth").get<std::string>();
    if (!j.at("answer").is_null()) r.answer = j.at("answer").get<std::string>();
    r.oracle_reward = j.at("oracle_reward").get<int>() != 0;
    r.verifier_reward = j.at("verifier_reward").get<int>() != 0;
    r.advantage = j.at("advantage").get<double>();
    r.oracle_advantage = j.at("oracle_advantage").get<double>();
    r.text = j.at("text").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ScoredText> parse_scored_texts(std::string_view dump, std::uint32_t first_step,
                                           std::uint32_t last_step) {
  std::vector<ScoredText> out;
  for (const auto line : lines(dump)) {
    const json j = json::parse(line);
    const auto step = j.at("step").get<std::uint32_t>();
    if (step < first_step || step > last_step) continue;
    out.push_back({j.at("text").get<std::string>(), j.at("oracle_advantage").get<double>()});
  }
  return out;
}

std::vector<StepMetrics> replay_metrics(std::span<const RolloutRecord> records,
                                        const TrainConfig& config) {
  std::vector<StepMetrics> out;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && records[j].step == records[i].step) ++j;
    out.push_back(summarize_step(records[i].step, records.subspan(i, j - i), config.modes.size(), config));
    i = j;
  }
  return out;
}

}  // namespace rlvrsim
