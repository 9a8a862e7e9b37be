#include "rlvrsim/metrics.hpp"

#include <algorithm>

#include "rlvrsim/decimal.hpp"

namespace rlvrsim {
namespace {

std::optional<std::size_t> first_crossing(std::span<const double> smoothed, double level) {
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    if (smoothed[i] >= level) return i;
  }
  return std::nullopt;
}

}  // namespace

std::vector<double> RunLog::oracle_series() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.oracle_reward);
  return out;
}

Rates estimate_rates(std::span<const Verdict> verdicts) {
  std::size_t neg = 0, fp = 0, pos = 0, fn = 0;
  for (const auto& v : verdicts) {
    if (v.oracle_reward) {
      ++pos;
      if (!v.verifier_reward) ++fn;
    } else {
      ++neg;
      if (v.verifier_reward) ++fp;
    }
  }
  Rates r;
  if (neg > 0) r.fpr = static_cast<double>(fp) / static_cast<double>(neg);
  if (pos > 0) r.fnr = static_cast<double>(fn) / static_cast<double>(pos);
  return r;
}

std::optional<double> youden(const Rates& rates) {
  if (!rates.fpr || !rates.fnr) return std::nullopt;
  return (1.0 - *rates.fnr) - *rates.fpr;
}

std::optional<double> youden(std::span<const Verdict> verdicts) {
  return youden(estimate_rates(verdicts));
}

std::vector<double> trailing_mean(std::span<const double> series, std::size_t window) {
  if (window == 0) throw ContractViolation("trailing_mean: window must be positive");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    if (i >= window) sum -= series[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

std::string_view dynamics_name(Dynamics d) {
  switch (d) {
    case Dynamics::kIdeal: return "ideal";
    case Dynamics::kDelayed: return "delayed";
    case Dynamics::kPlateau: return "plateau";
    case Dynamics::kCollapse: return "collapse";
  }
  return "ideal";
}

std::optional<Dynamics> dynamics_from_name(std::string_view name) {
  for (auto d : {Dynamics::kIdeal, Dynamics::kDelayed, Dynamics::kPlateau, Dynamics::kCollapse}) {
    if (dynamics_name(d) == name) return d;
  }
  return std::nullopt;
}

DynamicsLabel classify_dynamics(std::span<const double> run_oracle,
                                std::span<const double> clean_oracle,
                                const ClassifierThresholds& t) {
  if (run_oracle.size() != clean_oracle.size()) {
    throw ContractViolation("classify_dynamics: run has " + std::to_string(run_oracle.size()) +
                            " steps, reference has " + std::to_string(clean_oracle.size()));
  }
  if (run_oracle.empty()) throw ContractViolation("classify_dynamics: empty series");
  const auto r = trailing_mean(run_oracle, t.window);
  const auto c = trailing_mean(clean_oracle, t.window);

  DynamicsLabel out;
  // First full-window mean: a single step-0 batch is too noisy to compare against.
  out.r_start = r[std::min(t.window, r.size()) - 1];
  out.r_final = r.back();
  out.r_peak = *std::max_element(r.begin(), r.end());
  out.clean_final = c.back();
  out.crossing = first_crossing(r, (r.front() + out.clean_final) / 2);
  out.clean_crossing = first_crossing(c, (c.front() + out.clean_final) / 2);

  if (out.r_peak - out.r_final >= t.collapse_drop ||
      out.r_start - out.r_final >= t.collapse_below_start) {
    out.label = Dynamics::kCollapse;
  } else if (out.clean_final - out.r_final >= t.plateau_gap) {
    out.label = Dynamics::kPlateau;
  } else if (!out.crossing) {
    out.label = Dynamics::kDelayed;
  } else if (out.clean_crossing &&
             static_cast<double>(*out.crossing) >=
                 t.delay_factor * static_cast<double>(std::max<std::size_t>(*out.clean_crossing, 1))) {
    out.label = Dynamics::kDelayed;
  } else {
    out.label = Dynamics::kIdeal;
  }
  return out;
}

DynamicsLabel classify_dynamics(const RunLog& run, const RunLog& clean_reference,
                                const ClassifierThresholds& thresholds) {
  return classify_dynamics(run.oracle_series(), clean_reference.oracle_series(), thresholds);
}

}  // namespace rlvrsim
