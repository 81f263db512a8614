#include "bcl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bcl {

namespace {

FieldSummary summarize(const std::vector<double>& xs) {
  FieldSummary s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    s.mean += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

std::vector<double> field(const std::vector<EpisodeMetrics>& ms,
                          double EpisodeMetrics::*f) {
  std::vector<double> xs;
  xs.reserve(ms.size());
  for (const auto& m : ms) xs.push_back(m.*f);
  return xs;
}

}  // namespace

MetricsSummary aggregate(const std::vector<EpisodeMetrics>& metrics) {
  if (metrics.empty()) throw std::runtime_error("aggregate: no episodes");
  MetricsSummary s;
  s.n_episodes = static_cast<int>(metrics.size());
  s.total_reward = summarize(field(metrics, &EpisodeMetrics::total_reward));
  s.total_energy_room =
      summarize(field(metrics, &EpisodeMetrics::total_energy_room));
  s.total_energy_bat =
      summarize(field(metrics, &EpisodeMetrics::total_energy_bat));
  s.mean_comfort_violation =
      summarize(field(metrics, &EpisodeMetrics::mean_comfort_violation));
  s.max_comfort_violation =
      summarize(field(metrics, &EpisodeMetrics::max_comfort_violation));
  s.total_cost = summarize(field(metrics, &EpisodeMetrics::total_cost));
  s.final_soc = summarize(field(metrics, &EpisodeMetrics::final_soc));
  std::vector<double> inf;
  inf.reserve(metrics.size());
  for (const auto& m : metrics) inf.push_back(m.infeasible_steps);
  s.infeasible_steps = summarize(inf);
  return s;
}

double savings_percent(double reference, double candidate) {
  if (reference == 0.0) throw std::runtime_error("undefined savings");
  return 100.0 * (reference - candidate) / reference;
}

ComparisonReport compare(const std::vector<AgentResult>& agents,
                         const std::string& reference) {
  const AgentResult* ref = nullptr;
  for (const auto& a : agents)
    if (a.name == reference) ref = &a;
  if (!ref) throw std::runtime_error("compare: unknown reference " + reference);

  ComparisonReport report;
  report.reference = reference;
  report.agents = agents;
  for (const auto& e : ref->episodes) report.seeds.push_back(e.seed);
  for (const auto& a : agents) {
    if (a.episodes.size() != ref->episodes.size())
      throw std::runtime_error("compare: unpaired episode counts");
    for (std::size_t i = 0; i < a.episodes.size(); ++i)
      if (a.episodes[i].seed != report.seeds[i])
        throw std::runtime_error("compare: unpaired episode seeds");
    if (a.name == reference) continue;
    // zero-reference metrics have no defined savings and are omitted
    if (ref->summary.total_energy_room.mean != 0.0)
      report.energy_savings_percent[a.name] =
          savings_percent(ref->summary.total_energy_room.mean,
                          a.summary.total_energy_room.mean);
    if (ref->summary.mean_comfort_violation.mean != 0.0)
      report.comfort_savings_percent[a.name] =
          savings_percent(ref->summary.mean_comfort_violation.mean,
                          a.summary.mean_comfort_violation.mean);
    if (ref->summary.total_cost.mean != 0.0)
      report.cost_savings_percent[a.name] = savings_percent(
          ref->summary.total_cost.mean, a.summary.total_cost.mean);
  }
  return report;
}

std::vector<HddPoint> hdd(const std::vector<double>& daily_mean_temps,
                          const std::vector<double>& daily_energy) {
  if (daily_mean_temps.size() != daily_energy.size())
    throw std::runtime_error("hdd: length mismatch");
  std::vector<HddPoint> points;
  points.reserve(daily_mean_temps.size());
  for (std::size_t d = 0; d < daily_mean_temps.size(); ++d) {
    HddPoint p;
    p.day = static_cast<int>(d);
    p.hdd = std::max(0.0, 18.0 - daily_mean_temps[d]);
    p.daily_energy = daily_energy[d];
    points.push_back(p);
  }
  return points;
}

HddFit fit_hdd_line(const std::vector<HddPoint>& points) {
  if (points.size() < 2)
    throw std::runtime_error("hdd regression: need at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(points.size());
  for (const auto& p : points) {
    sx += p.hdd;
    sy += p.daily_energy;
    sxx += p.hdd * p.hdd;
    sxy += p.hdd * p.daily_energy;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw std::runtime_error("hdd regression: identical hdd values");
  HddFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

HddRegression hdd_regression(const std::vector<HddPoint>& reference,
                             const std::vector<HddPoint>& candidate) {
  HddRegression r;
  r.reference = fit_hdd_line(reference);
  r.candidate = fit_hdd_line(candidate);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : reference) {
    lo = std::min(lo, p.hdd);
    hi = std::max(hi, p.hdd);
  }
  for (const auto& p : candidate) {
    lo = std::min(lo, p.hdd);
    hi = std::max(hi, p.hdd);
  }
  // mean relative gap of the fitted lines over the observed hdd range
  const int kSamples = 101;
  double gap = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double x = lo + (hi - lo) * i / (kSamples - 1);
    const double yr = r.reference.intercept + r.reference.slope * x;
    const double yc = r.candidate.intercept + r.candidate.slope * x;
    if (yr == 0.0) throw std::runtime_error("undefined savings");
    gap += (yr - yc) / yr;
  }
  r.mean_gap_percent = 100.0 * gap / kSamples;
  return r;
}

}  // namespace bcl
