#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bcl/agents.hpp"
#include "bcl/eval.hpp"
#include "bcl/plant.hpp"
#include "bcl/surrogate.hpp"

namespace bcl::io {

// CSV layout: header "timestamp,<name>", ISO-8601 UTC timestamps, an empty
// value field marks a gap.
void write_timeseries_csv(const std::filesystem::path& path,
                          const TimeSeries& series,
                          const std::string& comment = "");
TimeSeries read_timeseries_csv(const std::filesystem::path& path);

void write_frame_csv(const std::filesystem::path& path, const Frame& frame,
                     const std::string& comment = "");

// Generic plot-data table: one comment line, header row, numeric cells.
void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& columns,
                     const Eigen::MatrixXd& rows,
                     const std::string& comment = "");

// Model bundles are a JSON manifest (<base>.json) plus a little-endian
// float64 weight blob (<base>.bin) with named, offset-indexed segments.
// Loading validates every shape against the manifest.
void save_surrogate(const std::filesystem::path& base,
                    const SurrogateModel& model);
SurrogateModel load_surrogate(const std::filesystem::path& base);

void save_policy(const std::filesystem::path& base,
                 const PolicyArtifact& policy,
                 const std::vector<int>& hidden);
PolicyArtifact load_policy(const std::filesystem::path& base);

// Whole-pipeline configuration. Defaults reproduce the reference experiment;
// a config file overrides fields selectively.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "runs";

  PlantParams plant;
  int history_days = 60;

  SafetyLimits limits;
  PriceSchedule prices;
  EvSchedule ev;
  RewardConfig reward;
  ComfortBounds comfort;
  bool heating_season_only = false;

  TrainConfig room_train;     // epochs/lr default per model below
  TrainConfig weather_train;
  int tune_budget = 10;

  DdpgConfig agent;
  int eval_episodes = 100;

  RunConfig();
};

// Throws std::runtime_error on unreadable files, parse errors, or unknown
// keys (reported with their path).
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& config);

// FNV-1a 64 over the canonical JSON dump; stable across runs.
std::string config_hash(const RunConfig& config);
std::string file_checksum(const std::filesystem::path& path);

// Run manifest: config hash, seed, and per-artifact checksums.
void write_manifest(const std::filesystem::path& dir, const RunConfig& config,
                    const std::vector<std::filesystem::path>& artifacts);

}  // namespace bcl::io
