#include "rlvrsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rlvrsim {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  int line;
};

class Reader {
 public:
  Reader(const std::string& key, const Entry& e) : key_(key), e_(e) {}

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(key_, e_.line, what); }

  double real() const {
    double v = 0;
    const auto* b = e_.value.data();
    const auto [p, ec] = std::from_chars(b, b + e_.value.size(), v);
    if (ec != std::errc() || p != b + e_.value.size() || !std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  template <typename T>
  T integer() const {
    T v{};
    const auto* b = e_.value.data();
    const auto [p, ec] = std::from_chars(b, b + e_.value.size(), v);
    if (ec != std::errc() || p != b + e_.value.size()) fail("expected an integer in range");
    return v;
  }

  bool boolean() const {
    if (e_.value == "true") return true;
    if (e_.value == "false") return false;
    fail("expected true or false");
  }

  const std::string& text() const { return e_.value; }

 private:
  const std::string& key_;
  const Entry& e_;
};

using Setter = std::function<void(ExperimentConfig&, const Reader&)>;

const std::map<std::string, Setter, std::less<>>& fixed_keys() {
  static const std::map<std::string, Setter, std::less<>> keys = {
      {"task.min_terms", [](auto& c, auto& r) { c.train.task.min_terms = r.template integer<int>(); }},
      {"task.max_terms", [](auto& c, auto& r) { c.train.task.max_terms = r.template integer<int>(); }},
      {"task.min_digits", [](auto& c, auto& r) { c.train.task.min_digits = r.template integer<int>(); }},
      {"task.max_digits", [](auto& c, auto& r) { c.train.task.max_digits = r.template integer<int>(); }},
      {"task.min_decimal_places",
       [](auto& c, auto& r) { c.train.task.min_decimal_places = r.template integer<int>(); }},
      {"task.max_decimal_places",
       [](auto& c, auto& r) { c.train.task.max_decimal_places = r.template integer<int>(); }},
      {"task.allow_negation", [](auto& c, auto& r) { c.train.task.allow_negation = r.boolean(); }},
      {"train.steps", [](auto& c, auto& r) { c.train.steps = r.template integer<std::uint32_t>(); }},
      {"train.queries_per_step",
       [](auto& c, auto& r) { c.train.queries_per_step = r.template integer<std::uint32_t>(); }},
      {"train.rollouts_per_query",
       [](auto& c, auto& r) { c.train.rollouts_per_query = r.template integer<std::uint32_t>(); }},
      {"train.learning_rate", [](auto& c, auto& r) { c.train.learning_rate = r.real(); }},
      {"train.seed", [](auto& c, auto& r) { c.train.seed = r.template integer<std::uint64_t>(); }},
      {"train.alternation_period",
       [](auto& c, auto& r) {
         if (r.text() == "none") {
           c.train.alternation_period.reset();
         } else {
           const auto k = r.template integer<long long>();
           if (k <= 0) r.fail("alternation period must be >= 1 (or none)");
           if (k > 0xFFFFFFFFLL) r.fail("alternation period too large");
           c.train.alternation_period = static_cast<std::uint32_t>(k);
         }
       }},
      {"advantage.estimator",
       [](auto& c, auto& r) {
         const auto e = estimator_from_name(r.text());
         if (!e) r.fail("expected mean_std or mean_only");
         c.train.advantage.estimator = *e;
       }},
      {"verifier.pattern",
       [](auto& c, auto& r) {
         const auto p = pattern_from_name(r.text());
         if (!p) r.fail("unknown verifier pattern '" + r.text() + "'");
         c.train.verifier.pattern = *p;
       }},
      {"verifier.fpr", [](auto& c, auto& r) { c.train.verifier.fpr = r.real(); }},
      {"verifier.fnr", [](auto& c, auto& r) { c.train.verifier.fnr = r.real(); }},
      {"verifier.polarity",
       [](auto& c, auto& r) {
         const auto p = polarity_from_name(r.text());
         if (!p) r.fail("expected contains or not_contains");
         c.train.verifier.polarity = *p;
       }},
      {"verifier.trigger", [](auto& c, auto& r) { c.train.verifier.trigger = r.text(); }},
      {"verifier.tau", [](auto& c, auto& r) { c.train.verifier.tau = r.real(); }},
      {"verifier.side",
       [](auto& c, auto& r) {
         const auto s = side_from_name(r.text());
         if (!s) r.fail("expected symmetric, below or above");
         c.train.verifier.side = *s;
       }},
      {"verifier.keyword", [](auto& c, auto& r) { c.train.verifier.keyword = r.text(); }},
      {"verifier.length_lo",
       [](auto& c, auto& r) { c.train.verifier.length_lo = r.template integer<long long>(); }},
      {"verifier.length_hi",
       [](auto& c, auto& r) { c.train.verifier.length_hi = r.template integer<long long>(); }},
      {"classifier.collapse_drop", [](auto& c, auto& r) { c.classifier.collapse_drop = r.real(); }},
      {"classifier.collapse_below_start",
       [](auto& c, auto& r) { c.classifier.collapse_below_start = r.real(); }},
      {"classifier.plateau_gap", [](auto& c, auto& r) { c.classifier.plateau_gap = r.real(); }},
      {"classifier.delay_factor", [](auto& c, auto& r) { c.classifier.delay_factor = r.real(); }},
      {"classifier.window",
       [](auto& c, auto& r) {
         c.classifier.window = r.template integer<std::size_t>();
         if (c.classifier.window == 0) r.fail("window must be >= 1");
       }},
      {"output.dir", [](auto& c, auto& r) { c.output.dir = r.text(); }},
      {"output.dump_rollouts", [](auto& c, auto& r) { c.output.dump_rollouts = r.boolean(); }},
      {"sweep.seeds",
       [](auto& c, auto& r) {
         c.sweep.seeds.clear();
         for (const auto& s : split(r.text(), ',')) {
           std::uint64_t v{};
           const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
           if (ec != std::errc() || p != s.data() + s.size()) r.fail("bad seed '" + s + "'");
           c.sweep.seeds.push_back(v);
         }
         if (c.sweep.seeds.empty()) r.fail("need at least one seed");
       }},
      {"sweep.verifiers",
       [](auto& c, auto& r) {
         c.sweep.verifiers = split(r.text(), ';');
         if (c.sweep.verifiers.empty()) r.fail("need at least one verifier");
         for (const auto& v : c.sweep.verifiers) {
           if (v == "standard") continue;
           try {
             parse_verifier_descriptor(v);
           } catch (const ContractViolation& e) {
             r.fail(e.what());
           }
         }
       }},
  };
  return keys;
}

void apply_mode_key(ExperimentConfig& c, std::string_view key, const Reader& r) {
  // policy.<id>.<field>
  const auto rest = key.substr(std::string_view("policy.").size());
  const auto dot = rest.rfind('.');
  if (dot == std::string_view::npos) r.fail("unknown key");
  const std::string id(rest.substr(0, dot));
  const auto field = rest.substr(dot + 1);
  auto it = std::find_if(c.train.modes.begin(), c.train.modes.end(),
                         [&](const BehaviorMode& m) { return m.id == id; });
  if (it == c.train.modes.end()) r.fail("'" + id + "' is not listed in policy.modes");
  if (field == "style") {
    const auto s = style_from_name(r.text());
    if (!s) r.fail("unknown mode style '" + r.text() + "'");
    it->style = *s;
  } else if (field == "logit") {
    it->initial_logit = r.real();
  } else if (field == "bucket_logits") {
    const auto parts = split(r.text(), ',');
    if (parts.size() != kNumBuckets) r.fail("expected 5 comma-separated logits");
    const std::string k_name(key);
    for (int k = 0; k < kNumBuckets; ++k) {
      const Entry part{parts[k], 0};
      it->initial_bucket_logits[k] = Reader(k_name, part).real();
    }
  } else {
    r.fail("unknown key");
  }
}

void set_modes(ExperimentConfig& c, const Reader& r) {
  const auto defaults = default_modes();
  std::vector<BehaviorMode> modes;
  for (const auto& id : split(r.text(), ',')) {
    if (id.empty()) r.fail("empty mode id");
    auto it = std::find_if(defaults.begin(), defaults.end(),
                           [&](const BehaviorMode& m) { return m.id == id; });
    if (it != defaults.end()) {
      modes.push_back(*it);
    } else {
      BehaviorMode m;
      m.id = id;
      if (const auto s = style_from_name(id)) m.style = *s;
      modes.push_back(m);
    }
  }
  if (modes.empty()) r.fail("need at least one mode");
  c.train.modes = std::move(modes);
}

std::string join_buckets(const BucketVector& b) {
  std::string out;
  for (int k = 0; k < kNumBuckets; ++k) {
    if (k) out += ',';
    out += format_double(b[k]);
  }
  return out;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ConfigError::ConfigError(std::string key, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? "" : key + ": ") + message),
      key_(std::move(key)),
      line_(line) {}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, p);
}

ExperimentConfig parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, Entry>> entries;
  std::map<std::string, int, std::less<>> seen;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", line_no, "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("", line_no, "missing key");
    if (auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(key, line_no, "duplicate key (first set on line " + std::to_string(it->second) + ")");
    }
    seen.emplace(key, line_no);
    entries.push_back({key, {std::string(trim(line.substr(eq + 1))), line_no}});
  }

  ExperimentConfig c;
  // The mode list decides which per-mode keys exist, so it goes first.
  for (const auto& [key, e] : entries) {
    if (key == "policy.modes") set_modes(c, Reader(key, e));
  }
  const auto& keys = fixed_keys();
  for (const auto& [key, e] : entries) {
    const Reader r(key, e);
    if (key == "policy.modes") continue;
    if (auto it = keys.find(key); it != keys.end()) {
      it->second(c, r);
    } else if (key.rfind("policy.", 0) == 0) {
      apply_mode_key(c, key, r);
    } else {
      r.fail("unknown key");
    }
  }
  try {
    c.train.validate();
  } catch (const ContractViolation& e) {
    // Point at the line of the key the message names, when it was set.
    const std::string msg = e.what();
    for (const auto& [key, entry] : entries) {
      if (msg.find(key.substr(key.find('.') + 1)) != std::string::npos) {
        throw ConfigError(key, entry.line, msg);
      }
    }
    throw ConfigError("", 0, msg);
  }
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize(const TrainConfig& t) {
  std::ostringstream o;
  o << "task.min_terms = " << t.task.min_terms << "\n"
    << "task.max_terms = " << t.task.max_terms << "\n"
    << "task.min_digits = " << t.task.min_digits << "\n"
    << "task.max_digits = " << t.task.max_digits << "\n"
    << "task.min_decimal_places = " << t.task.min_decimal_places << "\n"
    << "task.max_decimal_places = " << t.task.max_decimal_places << "\n"
    << "task.allow_negation = " << (t.task.allow_negation ? "true" : "false") << "\n"
    << "train.steps = " << t.steps << "\n"
    << "train.queries_per_step = " << t.queries_per_step << "\n"
    << "train.rollouts_per_query = " << t.rollouts_per_query << "\n"
    << "train.learning_rate = " << format_double(t.learning_rate) << "\n"
    << "train.seed = " << t.seed << "\n"
    << "train.alternation_period = "
    << (t.alternation_period ? std::to_string(*t.alternation_period) : std::string("none")) << "\n"
    << "advantage.estimator = " << estimator_name(t.advantage.estimator) << "\n"
    << "verifier.pattern = " << pattern_name(t.verifier.pattern) << "\n"
    << "verifier.fpr = " << format_double(t.verifier.fpr) << "\n"
    << "verifier.fnr = " << format_double(t.verifier.fnr) << "\n"
    << "verifier.polarity = " << polarity_name(t.verifier.polarity) << "\n"
    << "verifier.trigger = " << t.verifier.trigger << "\n"
    << "verifier.tau = " << format_double(t.verifier.tau) << "\n"
    << "verifier.side = " << side_name(t.verifier.side) << "\n"
    << "verifier.keyword = " << t.verifier.keyword << "\n"
    << "verifier.length_lo = " << t.verifier.length_lo << "\n"
    << "verifier.length_hi = " << t.verifier.length_hi << "\n";
  o << "policy.modes = ";
  for (std::size_t i = 0; i < t.modes.size(); ++i) o << (i ? "," : "") << t.modes[i].id;
  o << "\n";
  for (const auto& m : t.modes) {
    o << "policy." << m.id << ".style = " << style_name(m.style) << "\n"
      << "policy." << m.id << ".logit = " << format_double(m.initial_logit) << "\n"
      << "policy." << m.id << ".bucket_logits = " << join_buckets(m.initial_bucket_logits) << "\n";
  }
  return o.str();
}

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream o;
  o << serialize(c.train);
  o << "classifier.collapse_drop = " << format_double(c.classifier.collapse_drop) << "\n"
    << "classifier.collapse_below_start = " << format_double(c.classifier.collapse_below_start) << "\n"
    << "classifier.plateau_gap = " << format_double(c.classifier.plateau_gap) << "\n"
    << "classifier.delay_factor = " << format_double(c.classifier.delay_factor) << "\n"
    << "classifier.window = " << c.classifier.window << "\n"
    << "output.dir = " << c.output.dir << "\n"
    << "output.dump_rollouts = " << (c.output.dump_rollouts ? "true" : "false") << "\n"
    << "sweep.seeds = ";
  for (std::size_t i = 0; i < c.sweep.seeds.size(); ++i) o << (i ? "," : "") << c.sweep.seeds[i];
  o << "\nsweep.verifiers = ";
  for (std::size_t i = 0; i < c.sweep.verifiers.size(); ++i) o << (i ? ";" : "") << c.sweep.verifiers[i];
  o << "\n";
  return o.str();
}

std::string fingerprint(const TrainConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(serialize(config))));
  return buf;
}

VerifierSpec parse_verifier_descriptor(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  const auto name = trim(text.substr(0, open));
  const auto pattern = pattern_from_name(name);
  if (!pattern) throw ContractViolation("unknown verifier pattern '" + std::string(name) + "'");
  std::string_view args;
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw ContractViolation("verifier descriptor missing ')'");
    args = text.substr(open + 1, text.size() - open - 2);
  }
  VerifierSpec v;
  v.pattern = *pattern;
  auto number = [](std::string_view s) {
    s = trim(s);
    double d = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw ContractViolation("bad number '" + std::string(s) + "' in verifier descriptor");
    }
    return d;
  };
  auto keyed = [&](std::string_view s, std::string_view key) {
    s = trim(s);
    if (s.rfind(key, 0) == 0 && s.size() > key.size() && s[key.size()] == '=') {
      return number(s.substr(key.size() + 1));
    }
    throw ContractViolation("expected " + std::string(key) + "=<number> in verifier descriptor");
  };
  switch (v.pattern) {
    case Pattern::kRandomFlip: {
      const auto parts = split(args, ',');
      if (parts.size() != 2) throw ContractViolation("random_flip(fpr=..,fnr=..) expected");
      v.fpr = keyed(parts[0], "fpr");
      v.fnr = keyed(parts[1], "fnr");
      break;
    }
    case Pattern::kFormatFn: {
      const auto comma = args.find(',');
      const auto pol = polarity_from_name(trim(args.substr(0, comma)));
      if (!pol || comma == std::string_view::npos) {
        throw ContractViolation("format_fn(contains|not_contains,<trigger>) expected");
      }
      v.polarity = *pol;
      v.trigger = std::string(args.substr(comma + 1));
      break;
    }
    case Pattern::kRelativeErrorFp: {
      const auto parts = split(args, ',');
      if (parts.empty() || parts.size() > 2) throw ContractViolation("relative_error_fp(tau=..,side) expected");
      v.tau = keyed(parts[0], "tau");
      if (parts.size() == 2) {
        const auto side = side_from_name(parts[1]);
        if (!side) throw ContractViolation("unknown side '" + parts[1] + "'");
        v.side = *side;
      }
      break;
    }
    case Pattern::kWordFp: v.keyword = std::string(args); break;
    case Pattern::kLengthFp: {
      const auto parts = split(args, ',');
      if (parts.size() != 2) throw ContractViolation("length_fp(lo,hi) expected");
      v.length_lo = static_cast<long long>(number(parts[0]));
      v.length_hi = static_cast<long long>(number(parts[1]));
      break;
    }
    case Pattern::kClean:
    case Pattern::kLanguageFn:
      if (!trim(args).empty()) throw ContractViolation("pattern takes no arguments");
      break;
  }
  v.validate();
  return v;
}

std::vector<VerifierSpec> standard_verifiers() {
  std::vector<VerifierSpec> out;
  out.push_back(VerifierSpec::clean());
  for (auto [fpr, fnr] : {std::pair{0.0, 0.2}, {0.0, 0.5}, {0.2, 0.0}, {0.5, 0.0}}) {
    VerifierSpec v;
    v.pattern = Pattern::kRandomFlip;
    v.fpr = fpr;
    v.fnr = fnr;
    out.push_back(v);
  }
  VerifierSpec format;
  format.pattern = Pattern::kFormatFn;
  out.push_back(format);
  VerifierSpec rel;
  rel.pattern = Pattern::kRelativeErrorFp;
  out.push_back(rel);
  for (const char* word : {"Certainly", "python"}) {
    VerifierSpec w;
    w.pattern = Pattern::kWordFp;
    w.keyword = word;
    out.push_back(w);
  }
  return out;
}

}  // namespace rlvrsim
