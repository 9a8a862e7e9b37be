// Command-line front end: train, sweep, scan-trigrams, classify, report.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "rlvrsim/config.hpp"
#include "rlvrsim/io.hpp"
#include "rlvrsim/report.hpp"
#include "rlvrsim/trainer.hpp"

namespace fs = std::filesystem;
using namespace rlvrsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitAborted = 2;

struct Common {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : parse_config(c.config_path);
  if (c.seed) cfg.train.seed = *c.seed;
  if (!c.out.empty()) cfg.output.dir = c.out;
  return cfg;
}

TrainConfig clean_reference_config(TrainConfig c) {
  c.verifier = VerifierSpec::clean();
  c.alternation_period.reset();
  return c;
}

bool is_clean_run(const TrainConfig& c) {
  return c.verifier.pattern == Pattern::kClean && !c.alternation_period;
}

// Streams rollout records to `<dir>/rollouts.jsonl` through a temp file.
class DumpWriter {
 public:
  DumpWriter(const fs::path& dir, std::vector<std::string> mode_ids)
      : final_(dir / "rollouts.jsonl"), tmp_(dir / "rollouts.jsonl.tmp"), ids_(std::move(mode_ids)) {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + tmp_.string());
  }
  void write(std::span<const RolloutRecord> rs) {
    for (const auto& r : rs) out_ << rollout_line(r, ids_);
  }
  void commit() {
    out_.close();
    fs::rename(tmp_, final_);
  }

 private:
  fs::path final_, tmp_;
  std::vector<std::string> ids_;
  std::ofstream out_;
};

struct CellResult {
  RunLog log;
  SummaryRow row;
};

// Runs one configuration into `dir` and classifies it against `reference`
// (or against itself for clean runs).
CellResult run_cell(const std::string& name, const TrainConfig& train, const ExperimentConfig& exp,
                    const fs::path& dir, unsigned workers, const RunLog* reference) {
  fs::create_directories(dir);
  std::vector<std::string> ids;
  for (const auto& m : train.modes) ids.push_back(m.id);
  std::optional<DumpWriter> dump;
  if (exp.output.dump_rollouts) dump.emplace(dir, ids);
  RolloutSink sink;
  if (dump) sink = [&](std::span<const RolloutRecord> rs) { dump->write(rs); };
  CellResult r;
  r.log = run_training(train, workers, sink);
  if (dump) dump->commit();

  ExperimentConfig saved = exp;
  saved.train = train;
  write_file_atomic(dir / "config.txt", serialize(saved));
  write_file_atomic(dir / "steps.jsonl", steps_jsonl(r.log));
  const RunLog& ref = reference ? *reference : r.log;
  const auto label = classify_dynamics(r.log, ref, exp.classifier);
  r.row = make_summary(name, train, r.log, label, exp.classifier.window);
  const SummaryRow rows[] = {r.row};
  write_file_atomic(dir / "summary.csv", summary_csv(rows));
  for (const auto& e : r.log.errors) std::cerr << name << ": aborted " << e << "\n";
  return r;
}

int cmd_train(const Common& c) {
  const ExperimentConfig exp = load(c);
  const fs::path dir = exp.output.dir;
  std::optional<RunLog> reference;
  if (!is_clean_run(exp.train)) reference = run_training(clean_reference_config(exp.train), c.workers);
  const auto result = run_cell(dir.filename().string(), exp.train, exp, dir, c.workers,
                               reference ? &*reference : nullptr);
  std::printf("%s: %s final oracle %.3f (clean %.3f), %zu steps -> %s\n",
              exp.train.verifier.describe().c_str(), result.row.label.c_str(),
              result.row.final_oracle, result.row.clean_final, result.row.steps,
              dir.string().c_str());
  return result.log.aborted ? kExitAborted : kExitOk;
}

std::string slug(const std::string& s) {
  std::string out;
  for (char ch : s) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      out += ch;
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "cell" : out;
}

int cmd_sweep(const Common& c, const std::vector<std::uint64_t>& seed_override,
              const std::vector<std::string>& verifier_override) {
  ExperimentConfig exp = load(c);
  if (!seed_override.empty()) exp.sweep.seeds = seed_override;
  if (!verifier_override.empty()) exp.sweep.verifiers = verifier_override;
  std::vector<VerifierSpec> verifiers;
  for (const auto& d : exp.sweep.verifiers) {
    if (d == "standard") {
      for (const auto& v : standard_verifiers()) verifiers.push_back(v);
    } else {
      verifiers.push_back(parse_verifier_descriptor(d));
    }
  }
  const fs::path root = exp.output.dir;

  struct Cell {
    std::string name;
    TrainConfig train;
    std::size_t reference = 0;  // index into the clean references
  };
  std::vector<TrainConfig> refs;
  std::vector<Cell> cells;
  for (std::size_t si = 0; si < exp.sweep.seeds.size(); ++si) {
    TrainConfig ref = clean_reference_config(exp.train);
    ref.seed = exp.sweep.seeds[si];
    refs.push_back(ref);
    for (std::size_t vi = 0; vi < verifiers.size(); ++vi) {
      TrainConfig t = exp.train;
      t.seed = exp.sweep.seeds[si];
      t.verifier = verifiers[vi];
      char prefix[32];
      std::snprintf(prefix, sizeof prefix, "%02zu_", vi);
      cells.push_back({prefix + slug(verifiers[vi].describe()) + "_s" + std::to_string(t.seed), t, si});
    }
  }

  // Cells are independent; a pool of single-threaded runs keeps results
  // identical for any worker count.
  auto pool = [&](std::size_t n, auto&& fn) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    std::mutex err_mu;
    std::exception_ptr err;
    for (unsigned w = 0; w < std::min<std::size_t>(c.workers, n); ++w) {
      threads.emplace_back([&] {
        for (std::size_t i; (i = next++) < n;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!err) err = std::current_exception();
          }
        }
      });
    }
    for (auto& t : threads) t.join();
    if (err) std::rethrow_exception(err);
  };

  std::vector<RunLog> ref_logs(refs.size());
  pool(refs.size(), [&](std::size_t i) { ref_logs[i] = run_training(refs[i], 1); });
  std::vector<SummaryRow> rows(cells.size());
  std::vector<bool> aborted(cells.size(), false);
  pool(cells.size(), [&](std::size_t i) {
    const auto r = run_cell(cells[i].name, cells[i].train, exp, root / cells[i].name, 1,
                            &ref_logs[cells[i].reference]);
    rows[i] = r.row;
    aborted[i] = r.log.aborted;
  });
  write_file_atomic(root / "summary.csv", summary_csv(rows));
  for (const auto& r : rows) {
    std::printf("%-44s %-9s final %.3f (clean %.3f)\n", r.run.c_str(), r.label.c_str(),
                r.final_oracle, r.clean_final);
  }
  return std::find(aborted.begin(), aborted.end(), true) != aborted.end() ? kExitAborted : kExitOk;
}

fs::path steps_path(const fs::path& p) { return fs::is_directory(p) ? p / "steps.jsonl" : p; }

int cmd_classify(const std::string& run_path, const std::string& ref_path,
                 const std::string& config_path) {
  const fs::path run_file = steps_path(run_path);
  const RunLog run = parse_steps_jsonl(read_file(run_file));
  const RunLog ref = parse_steps_jsonl(read_file(steps_path(ref_path)));
  const fs::path run_dir = run_file.parent_path();
  const fs::path cfg_file = config_path.empty() ? run_dir / "config.txt" : fs::path(config_path);
  const ExperimentConfig exp = fs::exists(cfg_file) ? parse_config(cfg_file) : ExperimentConfig{};
  const auto d = classify_dynamics(run, ref, exp.classifier);
  std::printf("%s\n", std::string(dynamics_name(d.label)).c_str());
  std::fprintf(stderr, "final %.4f peak %.4f start %.4f clean final %.4f crossing %s/%s\n", d.r_final,
               d.r_peak, d.r_start, d.clean_final,
               d.crossing ? std::to_string(*d.crossing).c_str() : "never",
               d.clean_crossing ? std::to_string(*d.clean_crossing).c_str() : "never");
  RunLog with_fp = run;
  with_fp.fingerprint = fingerprint(exp.train);
  const SummaryRow rows[] = {
      make_summary(run_dir.filename().string(), exp.train, with_fp, d, exp.classifier.window)};
  write_file_atomic(run_dir / "summary.csv", summary_csv(rows));
  return kExitOk;
}

int cmd_scan(const std::string& dump_path, const std::string& out, const TrigramScanConfig& scan,
             std::uint32_t first, std::uint32_t last) {
  const auto texts = parse_scored_texts(read_file(dump_path), first, last);
  if (texts.empty()) throw ContractViolation("no rollouts in the selected step window");
  const auto rows = scan_trigrams(texts, scan);
  const std::string csv = trigrams_to_csv(rows);
  if (out.empty()) {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    write_file_atomic(out, csv);
    std::printf("%zu trigrams over %zu rollouts -> %s\n", rows.size(), texts.size(), out.c_str());
  }
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& out) {
  Chart reward{"Oracle (solid) and verifier (dashed) reward", "step", "reward"};
  Chart rates{"FPR (solid) and FNR (dashed)", "step", "rate"};
  for (const auto& p : runs) {
    const fs::path file = steps_path(p);
    const RunLog log = parse_steps_jsonl(read_file(file));
    std::string name = file.parent_path().filename().string();
    if (name.empty()) name = file.stem().string();
    Series oracle{name + " oracle", {}, false}, verifier{name + " verifier", {}, true};
    Series fpr{name + " FPR", {}, false}, fnr{name + " FNR", {}, true};
    for (const auto& s : log.steps) {
      oracle.values.push_back(s.oracle_reward);
      verifier.values.push_back(s.verifier_reward);
      fpr.values.push_back(s.fpr);
      fnr.values.push_back(s.fnr);
    }
    reward.series.push_back(std::move(oracle));
    reward.series.push_back(std::move(verifier));
    rates.series.push_back(std::move(fpr));
    rates.series.push_back(std::move(fnr));
  }
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  write_file_atomic(dir / "reward.svg", render_svg(reward));
  write_file_atomic(dir / "rates.svg", render_svg(rates));
  std::printf("wrote %s and %s\n", (dir / "reward.svg").string().c_str(),
              (dir / "rates.svg").string().c_str());
  return kExitOk;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "experiment config file (key = value)");
  cmd->add_option("--out", c.out, "output directory (overrides output.dir)");
  cmd->add_option("--seed", c.seed, "override train.seed");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RLVR training simulator under verifier errors"};
  app.require_subcommand(1);

  Common train_opts;
  auto* train = app.add_subcommand("train", "run one training configuration");
  add_common(train, train_opts);

  Common sweep_opts;
  std::vector<std::uint64_t> sweep_seeds;
  std::vector<std::string> sweep_verifiers;
  auto* sweep = app.add_subcommand("sweep", "run verifier x seed cells in parallel");
  add_common(sweep, sweep_opts);
  sweep->add_option("--seeds", sweep_seeds, "seeds (overrides sweep.seeds)")->delimiter(',');
  sweep->add_option("--verifiers", sweep_verifiers,
                    "verifier descriptors separated by ';', or 'standard'")
      ->delimiter(';');

  std::string dump_path, scan_out;
  TrigramScanConfig scan;
  bool keep_nonalpha = false;
  std::uint32_t first_step = 0, last_step = ~std::uint32_t{0};
  auto* scan_cmd = app.add_subcommand("scan-trigrams", "trigram frequency / conditional advantage table");
  scan_cmd->add_option("dump", dump_path, "rollouts.jsonl from a run with output.dump_rollouts")->required();
  scan_cmd->add_option("--out", scan_out, "CSV path (default: stdout)");
  scan_cmd->add_option("--freq-lo", scan.freq_lo, "minimum rollout frequency");
  scan_cmd->add_option("--freq-hi", scan.freq_hi, "maximum rollout frequency");
  scan_cmd->add_flag("--keep-nonalpha", keep_nonalpha, "keep trigrams with non-alphabetic words");
  scan_cmd->add_option("--first-step", first_step, "first step of the window");
  scan_cmd->add_option("--last-step", last_step, "last step of the window");

  std::string run_path, ref_path, classify_config;
  auto* classify = app.add_subcommand("classify", "label a run against a clean reference");
  classify->add_option("run", run_path, "run directory or steps.jsonl")->required();
  classify->add_option("reference", ref_path, "clean reference directory or steps.jsonl")->required();
  classify->add_option("--config", classify_config, "config with classifier thresholds");

  std::vector<std::string> report_runs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "SVG charts of reward and error rates");
  report->add_option("runs", report_runs, "run directories or steps.jsonl files")->required();
  report->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*train) return cmd_train(train_opts);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_seeds, sweep_verifiers);
    if (*scan_cmd) {
      scan.alphabetic_only = !keep_nonalpha;
      return cmd_scan(dump_path, scan_out, scan, first_step, last_step);
    }
    if (*classify) return cmd_classify(run_path, ref_path, classify_config);
    if (*report) return cmd_report(report_runs, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
