#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "bcl/agents.hpp"

namespace {

bcl::RoomEnv make_room_env() {
  static auto frame = [] {
    bcl::PlantParams params;
    return std::make_shared<bcl::Frame>(
        bcl::frame_from_trace(bcl::generate_history(params, 14, 3)));
  }();
  bcl::TrainConfig cfg;
  cfg.epochs = 1;
  static auto weather =
      bcl::train_surrogate(bcl::weather_model_spec(), *frame, cfg).model;
  static auto room =
      bcl::train_surrogate(bcl::room_model_spec(), *frame, cfg).model;
  return bcl::RoomEnv(weather, room, frame, {0.3, 0.05}, bcl::RoomEnvConfig{});
}

}  // namespace

TEST_CASE("ou noise") {
  SUBCASE("sigma zero keeps the process at mu exactly") {
    bcl::OuNoise n(2, {0.15, 0.0, 0.0, 1.0}, 1);
    for (int i = 0; i < 100; ++i) CHECK(n.sample().isZero(0.0));
  }
  SUBCASE("mean reversion toward mu with the configured lag-1 correlation") {
    bcl::OuNoise n(1, {0.15, 0.2, 0.0, 1.0}, 2);
    const int N = 200000;
    double mean = 0.0, num = 0.0, den = 0.0, prev = 0.0;
    std::vector<double> xs(N);
    for (int i = 0; i < N; ++i) xs[i] = n.sample()(0);
    for (double x : xs) mean += x;
    mean /= N;
    CHECK(std::abs(mean) < 0.02);
    for (int i = 0; i + 1 < N; ++i) {
      num += (xs[i] - mean) * (xs[i + 1] - mean);
      den += (xs[i] - mean) * (xs[i] - mean);
    }
    CHECK(num / den == doctest::Approx(0.85).epsilon(0.02));
  }
  SUBCASE("seeded and resettable") {
    bcl::OuNoise a(3, {}, 7), b(3, {}, 7);
    for (int i = 0; i < 10; ++i) CHECK(a.sample() == b.sample());
    a.reset();
    b.reset();
    CHECK(a.sample() == b.sample());
  }
}

TEST_CASE("replay buffer evicts FIFO") {
  bcl::ReplayBuffer buf(4);
  auto tr = [](double r) {
    bcl::Transition t;
    t.s = Eigen::VectorXd::Zero(1);
    t.a = Eigen::VectorXd::Zero(1);
    t.r = r;
    t.s2 = Eigen::VectorXd::Zero(1);
    t.terminal = false;
    return t;
  };
  for (int i = 0; i < 4; ++i) buf.push(tr(i));
  CHECK(buf.size() == 4);
  CHECK(buf[0].r == 0.0);
  buf.push(tr(4));  // oldest (r=0) evicted
  CHECK(buf.size() == 4);
  CHECK(buf[0].r == 4.0);
  CHECK(buf[1].r == 1.0);
  buf.push(tr(5));
  CHECK(buf[1].r == 5.0);
}

TEST_CASE("ddpg on the one-step bandit") {
  bcl::BanditEnv env(0.7);
  bcl::DdpgConfig cfg;
  cfg.total_steps = 5000;
  cfg.seed = 1;
  const auto result = bcl::train_ddpg(env, cfg, "bandit");
  const auto a = result.policy.act(Eigen::VectorXd::Zero(1));
  CHECK(a(0) == doctest::Approx(0.7).epsilon(0.075));
  CHECK(std::abs(a(0) - 0.7) <= 0.05);

  SUBCASE("policy actions always inside the bounds") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
      Eigen::VectorXd obs(1);
      obs << g(rng);
      const auto act = result.policy.act(obs);
      CHECK(act(0) >= 0.0);
      CHECK(act(0) <= 1.0);
    }
  }
  SUBCASE("same seed reproduces the learning curve") {
    bcl::BanditEnv env2(0.7);
    const auto again = bcl::train_ddpg(env2, cfg, "bandit");
    REQUIRE(again.curve.size() == result.curve.size());
    for (std::size_t i = 0; i < result.curve.size(); ++i) {
      CHECK(again.curve[i].episode_return == result.curve[i].episode_return);
      CHECK(again.curve[i].critic_loss == result.curve[i].critic_loss);
    }
    CHECK(again.policy.act(Eigen::VectorXd::Zero(1)) ==
          result.policy.act(Eigen::VectorXd::Zero(1)));
  }
}

TEST_CASE("baseline_act") {
  bcl::BaselineConfig cfg;  // setpoint 22.5, room index 2, soc index 7
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(9);
  SUBCASE("bang-bang without hysteresis") {
    obs(2) = 22.4;
    CHECK(bcl::baseline_act(bcl::BaselineKind::kRuleBased, obs, cfg, 1)(0) == 1.0);
    obs(2) = 22.5;  // closes exactly at the setpoint
    CHECK(bcl::baseline_act(bcl::BaselineKind::kRuleBased, obs, cfg, 1)(0) == 0.0);
    obs(2) = 25.0;
    CHECK(bcl::baseline_act(bcl::BaselineKind::kRuleBased, obs, cfg, 1)(0) == 0.0);
  }
  SUBCASE("charge variants stop when full") {
    obs(7) = 80.0;
    auto a = bcl::baseline_act(bcl::BaselineKind::kValvesOpenCharge, obs, cfg, 2);
    CHECK(a(0) == 1.0);
    CHECK(a(1) == 0.0);
    obs(7) = 50.0;
    a = bcl::baseline_act(bcl::BaselineKind::kValvesOpenCharge, obs, cfg, 2);
    CHECK(a(1) == cfg.p_max);
  }
  SUBCASE("discharge variant") {
    const auto a =
        bcl::baseline_act(bcl::BaselineKind::kValvesClosedDischarge, obs, cfg, 2);
    CHECK(a(0) == 0.0);
    CHECK(a(1) == -cfg.p_max);
  }
  SUBCASE("charge-immediately stops at the departure goal") {
    bcl::BaselineConfig bat = cfg;
    bat.room_temp_index = -1;
    bat.soc_index = 0;
    Eigen::VectorXd o = Eigen::VectorXd::Zero(5);
    o(0) = 59.0;
    CHECK(bcl::baseline_act(bcl::BaselineKind::kChargeImmediately, o, bat, 1)(0) ==
          bat.p_max);
    o(0) = 60.0;
    CHECK(bcl::baseline_act(bcl::BaselineKind::kChargeImmediately, o, bat, 1)(0) ==
          0.0);
  }
  SUBCASE("name round trip") {
    for (auto kind :
         {bcl::BaselineKind::kValvesOpen, bcl::BaselineKind::kValvesClosed,
          bcl::BaselineKind::kRuleBased, bcl::BaselineKind::kValvesOpenCharge,
          bcl::BaselineKind::kValvesClosedDischarge,
          bcl::BaselineKind::kRuleBasedCharge,
          bcl::BaselineKind::kChargeImmediately})
      CHECK(bcl::baseline_from_name(bcl::baseline_name(kind)) == kind);
    CHECK_FALSE(bcl::baseline_from_name("nonsense").has_value());
  }
}

TEST_CASE("evaluate") {
  auto env = make_room_env();
  bcl::BaselineConfig cfg;
  cfg.soc_index = -1;
  SUBCASE("valves closed spends nothing") {
    const auto metrics = bcl::evaluate(
        bcl::make_baseline_actor(bcl::BaselineKind::kValvesClosed, cfg, 1), env,
        10, 0);
    REQUIRE(metrics.size() == 10);
    for (const auto& m : metrics) CHECK(m.total_energy_room == 0.0);
  }
  SUBCASE("paired evaluation shares episode seeds") {
    const auto a = bcl::evaluate(
        bcl::make_baseline_actor(bcl::BaselineKind::kValvesClosed, cfg, 1), env,
        5, 100);
    const auto b = bcl::evaluate(
        bcl::make_baseline_actor(bcl::BaselineKind::kValvesOpen, cfg, 1), env,
        5, 100);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].seed == b[i].seed);
  }
  SUBCASE("deterministic given the base seed") {
    const auto a = bcl::evaluate(
        bcl::make_baseline_actor(bcl::BaselineKind::kRuleBased, cfg, 1), env, 5,
        7);
    const auto b = bcl::evaluate(
        bcl::make_baseline_actor(bcl::BaselineKind::kRuleBased, cfg, 1), env, 5,
        7);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(a[i].total_reward == b[i].total_reward);
  }
}
