#include "bcl/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcl {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

const Vec& OuNoise::sample() {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    x_(i) += params_.theta * (params_.mu - x_(i)) * params_.dt +
             params_.sigma * std::sqrt(params_.dt) * gauss(rng_);
  }
  return x_;
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);  // FIFO eviction
    next_ = (next_ + 1) % capacity_;
  }
}

namespace {

Vec normalize(const Vec& x, const Vec& lo, const Vec& hi) {
  return (2.0 * (x - lo).array() / (hi - lo).array() - 1.0).matrix();
}

Vec denormalize_action(const Vec& a_norm, const Vec& lo, const Vec& hi) {
  return (lo.array() + (a_norm.array() + 1.0) * 0.5 * (hi - lo).array()).matrix();
}

void copy_params(nn::Mlp& src, nn::Mlp& dst) {
  auto sp = src.params();
  auto dp = dst.params();
  for (std::size_t i = 0; i < sp.size(); ++i) dp[i]->value = sp[i]->value;
}

void soft_update(nn::Mlp& online, nn::Mlp& target, double tau) {
  auto op = online.params();
  auto tp = target.params();
  for (std::size_t i = 0; i < op.size(); ++i)
    tp[i]->value = (1.0 - tau) * tp[i]->value + tau * op[i]->value;
}

}  // namespace

Vec PolicyArtifact::act(const Vec& obs) const {
  const Vec s = normalize(obs, obs_lo, obs_hi);
  Vec a = actor->forward(s).array().tanh();
  return denormalize_action(a, action_lo, action_hi);
}

DdpgResult train_ddpg(Env& env, const DdpgConfig& config,
                      const std::string& env_id) {
  const int obs_dim = env.obs_dim();
  const int act_dim = env.action_dim();
  const Vec obs_lo = env.obs_lo(), obs_hi = env.obs_hi();
  const Vec act_lo = env.action_lo(), act_hi = env.action_hi();

  std::mt19937_64 rng(config.seed);
  auto actor = std::make_shared<nn::Mlp>("actor", obs_dim, config.hidden, act_dim, rng);
  nn::Mlp critic("critic", obs_dim + act_dim, config.hidden, 1, rng);
  nn::Mlp actor_target("actor_t", obs_dim, config.hidden, act_dim, rng);
  nn::Mlp critic_target("critic_t", obs_dim + act_dim, config.hidden, 1, rng);
  copy_params(*actor, actor_target);
  copy_params(critic, critic_target);

  nn::Adam actor_opt(config.actor_lr);
  nn::Adam critic_opt(config.critic_lr);
  ReplayBuffer replay(static_cast<std::size_t>(config.replay_capacity));
  OuNoise noise(act_dim, config.ou, config.seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  DdpgResult result;
  std::uint64_t episode = 0;
  Vec s_raw = env.reset(config.seed + episode);
  Vec s = normalize(s_raw, obs_lo, obs_hi);
  double episode_return = 0.0;
  double last_critic_loss = 0.0;
  int diverged_run = 0;

  for (int step = 0; step < config.total_steps; ++step) {
    Vec a_norm(act_dim);
    if (step < config.warmup_steps) {
      for (int i = 0; i < act_dim; ++i) a_norm(i) = uni(rng);
    } else {
      a_norm = actor->forward(s).array().tanh();
      a_norm += noise.sample();
      a_norm = a_norm.cwiseMax(-1.0).cwiseMin(1.0);
    }
    EnvStep es = env.step(denormalize_action(a_norm, act_lo, act_hi));
    const Vec s2 = normalize(es.next_obs, obs_lo, obs_hi);
    episode_return += es.reward;
    replay.push({s, a_norm, es.reward * config.reward_scale, s2, es.done});
    s = es.done ? normalize(env.reset(config.seed + (++episode)), obs_lo, obs_hi)
                : s2;
    if (es.done) {
      result.curve.push_back({step + 1, episode_return, last_critic_loss});
      episode_return = 0.0;
      noise.reset();
    }

    if (step < config.warmup_steps ||
        replay.size() < static_cast<std::size_t>(config.batch))
      continue;

    // minibatch
    const int B = config.batch;
    Mat S(obs_dim, B), A(act_dim, B), S2(obs_dim, B);
    Vec R(B), term(B);
    std::uniform_int_distribution<std::size_t> pick(0, replay.size() - 1);
    for (int b = 0; b < B; ++b) {
      const Transition& tr = replay[pick(rng)];
      S.col(b) = tr.s;
      A.col(b) = tr.a;
      S2.col(b) = tr.s2;
      R(b) = tr.r;
      term(b) = tr.terminal ? 1.0 : 0.0;
    }

    // critic update: y = r + gamma * Q'(s2, mu'(s2)), terminal bootstrap-free
    Mat a2 = actor_target.forward(S2).array().tanh();
    Mat in2(obs_dim + act_dim, B);
    in2.topRows(obs_dim) = S2;
    in2.bottomRows(act_dim) = a2;
    const Mat q2 = critic_target.forward(in2);
    Vec y(B);
    for (int b = 0; b < B; ++b)
      y(b) = R(b) + config.gamma * q2(0, b) * (1.0 - term(b));

    Mat in(obs_dim + act_dim, B);
    in.topRows(obs_dim) = S;
    in.bottomRows(act_dim) = A;
    const Mat q = critic.forward(in);
    Mat dq = Mat::Zero(1, B);
    double loss = 0.0;
    for (int b = 0; b < B; ++b) {
      const double e = q(0, b) - y(b);
      loss += e * e;
      dq(0, b) = 2.0 * e / B;
    }
    loss /= B;
    last_critic_loss = loss;
    if (loss > 1e6) {
      if (++diverged_run >= 100) throw std::runtime_error("training diverged");
    } else {
      diverged_run = 0;
    }
    nn::zero_grads(critic.params());
    critic.backward(dq);
    critic_opt.step(critic.params());

    // actor update: ascend Q(s, mu(s))
    const Mat pre = actor->forward(S);
    const Mat a_pi = pre.array().tanh();
    Mat in_pi(obs_dim + act_dim, B);
    in_pi.topRows(obs_dim) = S;
    in_pi.bottomRows(act_dim) = a_pi;
    critic.forward(in_pi);
    nn::zero_grads(critic.params());
    const Mat d_in = critic.backward(Mat::Constant(1, B, -1.0 / B));
    const Mat d_a = d_in.bottomRows(act_dim);
    const Mat d_pre = d_a.cwiseProduct((1.0 - a_pi.array().square()).matrix());
    nn::zero_grads(actor->params());
    actor->backward(d_pre);
    actor_opt.step(actor->params());

    soft_update(*actor, actor_target, config.tau);
    soft_update(critic, critic_target, config.tau);
  }

  PolicyArtifact policy;
  policy.env_id = env_id;
  policy.actor = actor;
  policy.obs_lo = obs_lo;
  policy.obs_hi = obs_hi;
  policy.action_lo = act_lo;
  policy.action_hi = act_hi;
  policy.seed = config.seed;
  result.policy = std::move(policy);
  return result;
}

std::optional<BaselineKind> baseline_from_name(const std::string& name) {
  if (name == "valves-open") return BaselineKind::kValvesOpen;
  if (name == "valves-closed") return BaselineKind::kValvesClosed;
  if (name == "rule-based") return BaselineKind::kRuleBased;
  if (name == "valves-open-charge") return BaselineKind::kValvesOpenCharge;
  if (name == "valves-closed-discharge") return BaselineKind::kValvesClosedDischarge;
  if (name == "rule-based-charge") return BaselineKind::kRuleBasedCharge;
  if (name == "charge-immediately") return BaselineKind::kChargeImmediately;
  return std::nullopt;
}

std::string baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kValvesOpen: return "valves-open";
    case BaselineKind::kValvesClosed: return "valves-closed";
    case BaselineKind::kRuleBased: return "rule-based";
    case BaselineKind::kValvesOpenCharge: return "valves-open-charge";
    case BaselineKind::kValvesClosedDischarge: return "valves-closed-discharge";
    case BaselineKind::kRuleBasedCharge: return "rule-based-charge";
    case BaselineKind::kChargeImmediately: return "charge-immediately";
  }
  return "unknown";
}

Vec baseline_act(BaselineKind kind, const Vec& obs, const BaselineConfig& cfg,
                 int action_dim) {
  Vec a = Vec::Zero(action_dim);
  const double r = cfg.room_temp_index >= 0 ? obs(cfg.room_temp_index) : 0.0;
  const double soc = cfg.soc_index >= 0 && cfg.soc_index < obs.size()
                         ? obs(cfg.soc_index)
                         : 0.0;
  const double rule = r < cfg.setpoint ? 1.0 : 0.0;  // closes at the setpoint
  const double charge_full = soc < cfg.full_soc ? cfg.p_max : 0.0;

  switch (kind) {
    case BaselineKind::kValvesOpen:
      a(0) = 1.0;
      break;
    case BaselineKind::kValvesClosed:
      a(0) = 0.0;
      break;
    case BaselineKind::kRuleBased:
      a(0) = rule;
      break;
    case BaselineKind::kValvesOpenCharge:
      a(0) = 1.0;
      if (action_dim > 1) a(1) = charge_full;
      break;
    case BaselineKind::kValvesClosedDischarge:
      a(0) = 0.0;
      if (action_dim > 1) a(1) = -cfg.p_max;
      break;
    case BaselineKind::kRuleBasedCharge:
      a(0) = rule;
      if (action_dim > 1) a(1) = charge_full;
      break;
    case BaselineKind::kChargeImmediately:
      a(0) = soc < cfg.s_des ? cfg.p_max : 0.0;
      break;
  }
  return a;
}

std::vector<EpisodeMetrics> evaluate(const Actor& actor, Env& env,
                                     int n_episodes, std::uint64_t base_seed) {
  std::vector<EpisodeMetrics> metrics;
  metrics.reserve(static_cast<std::size_t>(n_episodes));
  for (int e = 0; e < n_episodes; ++e) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(e);
    Vec obs = env.reset(seed);
    EpisodeMetrics m;
    m.seed = seed;
    int steps = 0;
    bool done = false;
    while (!done) {
      const EnvStep es = env.step(actor(obs));
      obs = es.next_obs;
      done = es.done;
      ++steps;
      m.total_reward += es.reward;
      m.total_energy_room += es.info.e_room;
      m.total_energy_bat += es.info.e_bat;
      m.mean_comfort_violation += es.info.comfort_violation;
      m.max_comfort_violation =
          std::max(m.max_comfort_violation, es.info.comfort_violation);
      m.total_cost += es.info.price * (es.info.e_room + es.info.e_bat);
      m.final_soc = es.info.soc;
      m.infeasible_steps += es.info.infeasible ? 1 : 0;
      if (steps > 100000) throw std::runtime_error("evaluate: episode never ends");
    }
    m.mean_comfort_violation /= std::max(1, steps);
    metrics.push_back(m);
  }
  return metrics;
}

Actor make_policy_actor(const PolicyArtifact& policy) {
  return [&policy](const Vec& obs) { return policy.act(obs); };
}

Actor make_baseline_actor(BaselineKind kind, const BaselineConfig& cfg,
                          int action_dim) {
  return [kind, cfg, action_dim](const Vec& obs) {
    return baseline_act(kind, obs, cfg, action_dim);
  };
}

}  // namespace bcl
