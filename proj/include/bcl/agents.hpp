#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "bcl/envs.hpp"
#include "bcl/nn.hpp"

namespace bcl {

struct OuParams {
  double theta = 0.15;
  double sigma = 0.2;
  double mu = 0.0;
  double dt = 1.0;
};

// Ornstein-Uhlenbeck exploration noise in normalized action units.
class OuNoise {
 public:
  OuNoise(int dim, OuParams params, std::uint64_t seed)
      : params_(params), x_(Eigen::VectorXd::Constant(dim, params.mu)), rng_(seed) {}
  void reset() { x_.setConstant(params_.mu); }
  const Eigen::VectorXd& sample();
  const Eigen::VectorXd& state() const { return x_; }

 private:
  OuParams params_;
  Eigen::VectorXd x_;
  std::mt19937_64 rng_;
};

struct DdpgConfig {
  double gamma = 0.99;
  double tau = 0.001;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int batch = 64;
  int replay_capacity = 100000;
  int total_steps = 20000;
  int warmup_steps = 1000;
  std::vector<int> hidden = {100, 100};
  OuParams ou;
  double reward_scale = 1.0;  // critic target scaling only
  std::uint64_t seed = 0;
};

struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd a;  // normalized, in [-1, 1]
  double r;
  Eigen::VectorXd s2;
  bool terminal;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}
  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  const Transition& operator[](std::size_t i) const { return data_[i]; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

// Trained actor plus the affine observation/action scaling maps.
struct PolicyArtifact {
  std::string env_id;
  std::shared_ptr<nn::Mlp> actor;
  Eigen::VectorXd obs_lo, obs_hi;
  Eigen::VectorXd action_lo, action_hi;
  std::uint64_t seed = 0;

  // Deterministic action in env units; tanh keeps it inside the bounds.
  Eigen::VectorXd act(const Eigen::VectorXd& obs) const;
};

struct LearningCurvePoint {
  int step;
  double episode_return;
  double critic_loss;
};

struct DdpgResult {
  PolicyArtifact policy;
  std::vector<LearningCurvePoint> curve;
};

// Throws std::runtime_error("training diverged") when the critic loss stays
// above 1e6 for 100 consecutive updates.
DdpgResult train_ddpg(Env& env, const DdpgConfig& config,
                      const std::string& env_id = "env");

enum class BaselineKind {
  kValvesOpen,
  kValvesClosed,
  kRuleBased,
  kValvesOpenCharge,
  kValvesClosedDischarge,
  kRuleBasedCharge,
  kChargeImmediately,  // battery-only: charge at p_max until s_des
};

std::optional<BaselineKind> baseline_from_name(const std::string& name);
std::string baseline_name(BaselineKind kind);

struct BaselineConfig {
  double setpoint = 22.5;
  double p_max = 100.0;
  double full_soc = 80.0;
  double s_des = 60.0;
  // observation layout indices; -1 when absent
  int room_temp_index = 2;
  int soc_index = 7;
};

Eigen::VectorXd baseline_act(BaselineKind kind, const Eigen::VectorXd& obs,
                             const BaselineConfig& cfg, int action_dim);

struct EpisodeMetrics {
  double total_reward = 0.0;
  double total_energy_room = 0.0;
  double total_energy_bat = 0.0;   // signed, kW*step
  double mean_comfort_violation = 0.0;
  double max_comfort_violation = 0.0;
  double total_cost = 0.0;  // price-weighted energy
  double final_soc = 0.0;
  int infeasible_steps = 0;
  std::uint64_t seed = 0;
};

using Actor = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Noise-free rollouts; episode e uses seed base_seed + e, so evaluations of
// different agents with the same base seed are paired.
std::vector<EpisodeMetrics> evaluate(const Actor& actor, Env& env,
                                     int n_episodes, std::uint64_t base_seed);

Actor make_policy_actor(const PolicyArtifact& policy);
Actor make_baseline_actor(BaselineKind kind, const BaselineConfig& cfg,
                          int action_dim);

}  // namespace bcl
