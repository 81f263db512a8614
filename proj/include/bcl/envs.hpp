#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include "bcl/battery.hpp"
#include "bcl/surrogate.hpp"

namespace bcl {

struct ComfortBounds {
  double r_min = 22.5;
  double r_max = 22.5;  // r_min == r_max is reference tracking
};

// Positive distance to the comfort interval, degC.
double c_pen(double r, const ComfortBounds& b);

struct PriceSchedule {
  double high = 2.0;
  double low = 1.0;
  int high_start_minute = 8 * 60;   // inclusive
  int high_end_minute = 20 * 60;    // exclusive
};

double price_at(int minute_of_day, const PriceSchedule& schedule);

struct EvSchedule {
  int departure_minute = 7 * 60;
  int arrival_minute = 17 * 60;
  double s_des = 60.0;      // %SoC required at departure
  double s_arrival = 30.0;  // %SoC on return
};

struct RewardConfig {
  double alpha = 0.2;      // comfort weight
  double alpha_bat = 0.01;  // battery energy weight (joint env)
};

struct StepInfo {
  double raw_action_room = 0.0;
  double raw_action_bat = 0.0;
  double safe_action_bat = 0.0;
  double e_room = 0.0;
  double e_bat = 0.0;
  double comfort_violation = 0.0;  // c_pen, degC
  double price = 1.0;
  double room_temp = 0.0;
  double soc = 0.0;
  bool infeasible = false;
  bool ev_present = true;
};

struct EnvStep {
  Eigen::VectorXd next_obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

class Env {
 public:
  static constexpr int kEpisodeLen = 48;

  virtual ~Env() = default;
  virtual Eigen::VectorXd reset(std::uint64_t episode_seed) = 0;
  virtual EnvStep step(const Eigen::VectorXd& action) = 0;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual Eigen::VectorXd action_lo() const = 0;
  virtual Eigen::VectorXd action_hi() const = 0;
  virtual Eigen::VectorXd obs_lo() const = 0;
  virtual Eigen::VectorXd obs_hi() const = 0;
};

struct RoomEnvConfig {
  ComfortBounds comfort;
  double alpha = 0.2;
  bool heating_season_only = false;
  double heating_outside_max = 12.0;  // degC filter on the initial condition
  double disturbance_scale = 1.0;     // 0 disables the AR disturbance
};

// Surrogate-backed room temperature environment. Observation:
// (o, i, r, h_in, h_out, t_sin, t_cos). Action: valve fraction in [0, 1].
class RoomEnv final : public Env {
 public:
  RoomEnv(SurrogateModel weather_model, SurrogateModel room_model,
          std::shared_ptr<const Frame> history, ArDisturbance disturbance,
          RoomEnvConfig config);

  Eigen::VectorXd reset(std::uint64_t episode_seed) override;
  EnvStep step(const Eigen::VectorXd& action) override;
  int obs_dim() const override { return 7; }
  int action_dim() const override { return 1; }
  Eigen::VectorXd action_lo() const override;
  Eigen::VectorXd action_hi() const override;
  Eigen::VectorXd obs_lo() const override;
  Eigen::VectorXd obs_hi() const override;

  int minute_of_day() const { return minute_; }

 private:
  friend class JointEnv;
  Eigen::VectorXd observation() const;
  // advances the room state under valve action u; returns (e_room, r_next)
  std::pair<double, double> advance(double u);

  SurrogateModel weather_;
  SurrogateModel room_;
  std::shared_ptr<const Frame> history_;
  ArDisturbance dist_;
  RoomEnvConfig cfg_;
  std::vector<Eigen::Index> starts_;

  Eigen::MatrixXd window_;
  double h_in_ = 0.0, h_out_ = 0.0;
  double d_state_ = 0.0;
  int t_ = 0;
  int minute_ = 0;
  std::mt19937_64 rng_;
};

struct BatteryEnvConfig {
  BatteryCoefficients coeffs;
  SafetyLimits limits;        // t_des/s_des apply per episode
  bool use_pricing = false;   // reward = -price * f_safe instead of -f_safe
  PriceSchedule prices;
  int start_minute = 19 * 60; // episode start time of day
  double s0_lo = 20.0, s0_hi = 80.0;  // initial SoC sampling range
};

// SoC-only environment with the safety fallback. Observation:
// (soc, t_sin, t_cos, fraction of episode remaining, current price).
class BatteryEnv final : public Env {
 public:
  explicit BatteryEnv(BatteryEnvConfig config);

  Eigen::VectorXd reset(std::uint64_t episode_seed) override;
  EnvStep step(const Eigen::VectorXd& action) override;
  int obs_dim() const override { return 5; }
  int action_dim() const override { return 1; }
  Eigen::VectorXd action_lo() const override;
  Eigen::VectorXd action_hi() const override;
  Eigen::VectorXd obs_lo() const override;
  Eigen::VectorXd obs_hi() const override;

  double soc() const { return soc_; }

 private:
  Eigen::VectorXd observation() const;
  BatteryEnvConfig cfg_;
  double soc_ = 50.0;
  int t_ = 0;
};

struct JointEnvConfig {
  RoomEnvConfig room;
  BatteryCoefficients coeffs;
  SafetyLimits limits;
  PriceSchedule prices;
  EvSchedule ev;
  RewardConfig reward;
};

// Room and battery advance independently; reward couples them through the
// tariff. During EV absence (departure..arrival) the battery action is
// masked; on arrival the SoC resets to the schedule's value.
// Observation: room observation + (soc, ev_present).
class JointEnv final : public Env {
 public:
  JointEnv(SurrogateModel weather_model, SurrogateModel room_model,
           std::shared_ptr<const Frame> history, ArDisturbance disturbance,
           JointEnvConfig config);

  Eigen::VectorXd reset(std::uint64_t episode_seed) override;
  EnvStep step(const Eigen::VectorXd& action) override;  // (a_room, a_bat)
  int obs_dim() const override { return 9; }
  int action_dim() const override { return 2; }
  Eigen::VectorXd action_lo() const override;
  Eigen::VectorXd action_hi() const override;
  Eigen::VectorXd obs_lo() const override;
  Eigen::VectorXd obs_hi() const override;

 private:
  Eigen::VectorXd observation() const;
  bool ev_present(int minute) const;
  int steps_to_departure(int minute) const;

  RoomEnv room_env_;
  JointEnvConfig cfg_;
  double soc_ = 30.0;
  int t_ = 0;
};

// One-step continuous bandit: reward = -(a - optimum)^2. Training sanity
// check for the policy-gradient learner.
class BanditEnv final : public Env {
 public:
  explicit BanditEnv(double optimum = 0.7) : optimum_(optimum) {}
  Eigen::VectorXd reset(std::uint64_t) override {
    return Eigen::VectorXd::Zero(1);
  }
  EnvStep step(const Eigen::VectorXd& action) override;
  int obs_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  Eigen::VectorXd action_lo() const override;
  Eigen::VectorXd action_hi() const override;
  Eigen::VectorXd obs_lo() const override;
  Eigen::VectorXd obs_hi() const override;

 private:
  double optimum_;
};

}  // namespace bcl
