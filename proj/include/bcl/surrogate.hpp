#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcl/nn.hpp"
#include "bcl/plant.hpp"
#include "bcl/timeseries.hpp"

namespace bcl {

struct TimeEncoding {
  double t_sin;
  double t_cos;
};

// angle = 2*pi * minute / 1440
TimeEncoding encode_time(int minute_of_day);

// Column-aligned signals on a shared 15-minute grid. Gaps are NaN.
// Time-encoding columns are named "t_sin" / "t_cos".
struct Frame {
  std::int64_t t0 = 0;
  int dt_minutes = 15;
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // rows x columns

  Eigen::Index rows() const { return values.rows(); }
  int col(const std::string& name) const;
  int minute_of_day(Eigen::Index row) const {
    std::int64_t m = ((t0 + row * dt_minutes * 60) / 60) % 1440;
    return static_cast<int>(m < 0 ? m + 1440 : m);
  }
  bool row_observed(Eigen::Index row) const {
    return !values.row(row).hasNaN();
  }
};

// Flattens a plant trace into a Frame, appending time-encoding columns.
Frame frame_from_trace(const TruePlantTrace& trace);

struct SurrogateSpec {
  int lookback = 19;
  int n_layers = 1;
  int units = 30;
  nn::CellKind cell = nn::CellKind::kLstm;
  std::vector<std::string> inputs;          // column names, in model order
  std::vector<std::string> control_inputs;  // inputs read one step ahead (u_{t+1})
  std::vector<std::string> outputs;         // delta-predicted subset of inputs
  double sigma_input = 0.0;                 // train-time input noise, whitened units
  std::vector<ClipBounds> output_clip;      // original units, per output

  bool is_control(const std::string& name) const;
  bool is_time(const std::string& name) const {
    return name == "t_sin" || name == "t_cos";
  }
  int input_index(const std::string& name) const;
};

SurrogateSpec room_model_spec();
SurrogateSpec weather_model_spec();

struct TrainConfig {
  double lr = 1e-3;
  int epochs = 10;
  int batch = 64;
  std::uint64_t seed = 0;
  double train_frac = 0.6;
  double val_frac = 0.2;
};

struct SurrogateModel {
  SurrogateSpec spec;
  std::shared_ptr<nn::RecurrentNet> net;
  std::vector<WhiteningStats> stats;  // per input (time channels: mean 0, std 1)
  std::uint64_t seed = 0;

  // window: lookback x inputs, original units, control columns already
  // shifted one step ahead. Returns next values of the output variables,
  // clipped to their bounds. Deterministic when train_mode is off.
  Eigen::VectorXd predict(const Eigen::MatrixXd& window, bool train_mode = false,
                          std::uint64_t noise_seed = 0) const;
};

struct TrainResult {
  SurrogateModel model;
  std::vector<double> train_loss;  // per epoch, whitened-delta MSE
  std::vector<double> val_loss;
};

// Throws std::runtime_error("empty training set") when no gap-free windows
// exist. Deterministic given (spec, frame, config).
TrainResult train_surrogate(const SurrogateSpec& spec, const Frame& frame,
                            const TrainConfig& config);

// Assembles the model input window ending at row t (inclusive); control
// columns are read at rows t-n+2 .. t+1. Requires gap-free coverage.
Eigen::MatrixXd make_window(const Frame& frame, const SurrogateSpec& spec,
                            Eigen::Index t);

// Window start indices whose full coverage (rows i .. i+lookback) is gap-free
// over the used columns.
std::vector<Eigen::Index> valid_window_starts(const Frame& frame,
                                              const SurrogateSpec& spec);

// Rolls a single model forward feeding back its own predicted outputs;
// non-predicted inputs come from the frame (controls included). Returns the
// per-output trajectories, horizon x outputs, starting at row t0_row+1.
Eigen::MatrixXd rollout_model(const SurrogateModel& model, const Frame& frame,
                              Eigen::Index t0_row, int horizon);

// Composed full-room rollout: weather predicted recursively, water
// temperatures held constant, room temperature from the room model.
// controls: valve fraction u_{t+1..t+H}. Returns horizon x room-state matrix
// with columns (o, i, r, h_in, h_out).
Eigen::MatrixXd predict_multistep(const SurrogateModel& weather_model,
                                  const SurrogateModel& room_model,
                                  const Frame& frame, Eigen::Index t0_row,
                                  const std::vector<double>& controls);

struct HyperTrial {
  SurrogateSpec spec;
  TrainConfig config;
  double objective;  // 24-step validation MSE (whitened)
};

struct HyperSpace {
  std::vector<int> n_layers = {1, 2, 3};
  std::vector<int> units = {10, 30, 60};
  std::vector<nn::CellKind> cells = {nn::CellKind::kLstm, nn::CellKind::kGru};
  double lr_log10_lo = -5.0, lr_log10_hi = -2.0;
  double sigma_lo = 0.0, sigma_hi = 0.05;
};

struct HyperResult {
  HyperTrial best;
  std::vector<HyperTrial> log;
};

HyperResult hyper_search(const HyperSpace& space, int budget,
                         const SurrogateSpec& base_spec,
                         const TrainConfig& base_config, const Frame& frame,
                         std::uint64_t seed);

// Mean squared 24-step-ahead prediction error over validation start rows.
double multistep_mse(const SurrogateModel& model, const Frame& frame,
                     const std::vector<Eigen::Index>& starts, int horizon);

struct ArDisturbance {
  double phi = 0.0;
  double sigma = 0.0;  // innovation std
};

// AR(1) by lag-1 autocorrelation; zero-variance residuals give (0, 0).
ArDisturbance fit_ar(std::span<const double> residuals);

// One-step validation residuals of the model's first output, original units.
std::vector<double> one_step_residuals(const SurrogateModel& model,
                                       const Frame& frame,
                                       const std::vector<Eigen::Index>& starts);

}  // namespace bcl
