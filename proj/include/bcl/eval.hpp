#pragma once

#include <map>
#include <string>
#include <vector>

#include "bcl/agents.hpp"

namespace bcl {

struct FieldSummary {
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

struct MetricsSummary {
  int n_episodes = 0;
  FieldSummary total_reward;
  FieldSummary total_energy_room;
  FieldSummary total_energy_bat;
  FieldSummary mean_comfort_violation;
  FieldSummary max_comfort_violation;
  FieldSummary total_cost;
  FieldSummary final_soc;
  FieldSummary infeasible_steps;
};

MetricsSummary aggregate(const std::vector<EpisodeMetrics>& metrics);

// 100 * (ref - cand) / ref. Throws std::runtime_error("undefined savings")
// when the reference is zero.
double savings_percent(double reference, double candidate);

struct AgentResult {
  std::string name;
  std::vector<EpisodeMetrics> episodes;
  MetricsSummary summary;
};

// Percentage deltas of each agent relative to a named reference, computed on
// paired episode seeds.
struct ComparisonReport {
  std::string reference;
  std::vector<AgentResult> agents;
  std::vector<std::uint64_t> seeds;  // shared by every agent, in order
  // per agent (reference excluded): savings in energy / comfort / cost
  std::map<std::string, double> energy_savings_percent;
  std::map<std::string, double> comfort_savings_percent;
  std::map<std::string, double> cost_savings_percent;
};

// Throws when the agents' episode seed lists differ (comparisons must be
// paired) or the reference name is missing.
ComparisonReport compare(const std::vector<AgentResult>& agents,
                         const std::string& reference);

struct HddPoint {
  int day = 0;
  double hdd = 0.0;  // degC*day
  double daily_energy = 0.0;
};

// hdd = max(0, 18 - daily_mean)
std::vector<HddPoint> hdd(const std::vector<double>& daily_mean_temps,
                          const std::vector<double>& daily_energy);

struct HddFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares energy ~ hdd. Throws std::runtime_error on fewer
// than two points or identical hdd values.
HddFit fit_hdd_line(const std::vector<HddPoint>& points);

struct HddRegression {
  HddFit reference;
  HddFit candidate;
  double mean_gap_percent = 0.0;  // mean of (ref - cand)/ref over hdd range
};

HddRegression hdd_regression(const std::vector<HddPoint>& reference,
                             const std::vector<HddPoint>& candidate);

}  // namespace bcl
