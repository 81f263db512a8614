#include "bcl/envs.hpp"

#include <algorithm>
#include <stdexcept>

namespace bcl {

using Eigen::Index;
using Vec = Eigen::VectorXd;

double c_pen(double r, const ComfortBounds& b) {
  if (r > b.r_max) return r - b.r_max;
  if (r < b.r_min) return b.r_min - r;
  return 0.0;
}

double price_at(int minute_of_day, const PriceSchedule& schedule) {
  if (minute_of_day < 0 || minute_of_day >= 1440)
    throw std::invalid_argument("price_at: minute out of range");
  return (minute_of_day >= schedule.high_start_minute &&
          minute_of_day < schedule.high_end_minute)
             ? schedule.high
             : schedule.low;
}

namespace {

Vec vec1(double v) {
  Vec x(1);
  x(0) = v;
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// RoomEnv

RoomEnv::RoomEnv(SurrogateModel weather_model, SurrogateModel room_model,
                 std::shared_ptr<const Frame> history, ArDisturbance disturbance,
                 RoomEnvConfig config)
    : weather_(std::move(weather_model)),
      room_(std::move(room_model)),
      history_(std::move(history)),
      dist_(disturbance),
      cfg_(config) {
  const std::vector<Index> all = valid_window_starts(*history_, room_.spec);
  const int oc = history_->col("outside_temp");
  for (Index i : all) {
    const Index t0 = i + room_.spec.lookback - 1;
    if (cfg_.heating_season_only &&
        history_->values(t0, oc) > cfg_.heating_outside_max)
      continue;
    starts_.push_back(i);
  }
  if (starts_.empty()) throw std::runtime_error("room env: no valid initial windows");
}

Vec RoomEnv::reset(std::uint64_t episode_seed) {
  rng_.seed(episode_seed);
  const std::size_t pick = std::uniform_int_distribution<std::size_t>(
      0, starts_.size() - 1)(rng_);
  const Index t0 = starts_[pick] + room_.spec.lookback - 1;
  window_ = make_window(*history_, room_.spec, t0);
  minute_ = history_->minute_of_day(t0);
  h_in_ = window_(room_.spec.lookback - 1, room_.spec.input_index("water_in"));
  h_out_ = window_(room_.spec.lookback - 1, room_.spec.input_index("water_out"));
  d_state_ = 0.0;
  t_ = 0;
  return observation();
}

std::pair<double, double> RoomEnv::advance(double u) {
  const SurrogateSpec& rs = room_.spec;
  const Index n = rs.lookback;
  const int ju = rs.input_index("valve");
  window_(n - 1, ju) = u;

  const SurrogateSpec& ws = weather_.spec;
  Eigen::MatrixXd wwin(n, static_cast<Index>(ws.inputs.size()));
  for (std::size_t j = 0; j < ws.inputs.size(); ++j)
    wwin.col(static_cast<Index>(j)) = window_.col(rs.input_index(ws.inputs[j]));
  const Vec wpred = weather_.predict(wwin);
  const Vec rpred = room_.predict(window_);

  if (cfg_.disturbance_scale > 0.0 && dist_.sigma > 0.0) {
    d_state_ = dist_.phi * d_state_ +
               dist_.sigma * std::normal_distribution<double>(0.0, 1.0)(rng_);
  } else {
    d_state_ = 0.0;
  }
  const double r_next = std::clamp(
      rpred(0) + cfg_.disturbance_scale * d_state_, rs.output_clip[0].lo,
      rs.output_clip[0].hi);

  minute_ = (minute_ + history_->dt_minutes) % 1440;
  const TimeEncoding te = encode_time(minute_);
  window_.topRows(n - 1) = window_.bottomRows(n - 1);
  window_(n - 1, rs.input_index("outside_temp")) = wpred(0);
  window_(n - 1, rs.input_index("irradiance")) = wpred(1);
  window_(n - 1, rs.input_index("room_temp")) = r_next;
  window_(n - 1, rs.input_index("water_in")) = h_in_;
  window_(n - 1, rs.input_index("water_out")) = h_out_;
  window_(n - 1, rs.input_index("t_sin")) = te.t_sin;
  window_(n - 1, rs.input_index("t_cos")) = te.t_cos;
  window_(n - 1, ju) = u;  // placeholder until the next action arrives

  const double e_room = u * std::abs(h_in_ - h_out_);
  return {e_room, r_next};
}

EnvStep RoomEnv::step(const Vec& action) {
  const double u = std::clamp(action(0), 0.0, 1.0);
  const auto [e_room, r_next] = advance(u);
  const double pen = c_pen(r_next, cfg_.comfort);

  EnvStep out;
  out.reward = -e_room - cfg_.alpha * pen;
  ++t_;
  out.done = t_ == kEpisodeLen;
  out.next_obs = observation();
  out.info.raw_action_room = action(0);
  out.info.e_room = e_room;
  out.info.comfort_violation = pen;
  out.info.room_temp = r_next;
  return out;
}

Vec RoomEnv::observation() const {
  const SurrogateSpec& rs = room_.spec;
  const Index n = rs.lookback;
  Vec obs(7);
  obs << window_(n - 1, rs.input_index("outside_temp")),
      window_(n - 1, rs.input_index("irradiance")),
      window_(n - 1, rs.input_index("room_temp")),
      window_(n - 1, rs.input_index("water_in")),
      window_(n - 1, rs.input_index("water_out")),
      window_(n - 1, rs.input_index("t_sin")),
      window_(n - 1, rs.input_index("t_cos"));
  return obs;
}

Vec RoomEnv::action_lo() const { return vec1(0.0); }
Vec RoomEnv::action_hi() const { return vec1(1.0); }

Vec RoomEnv::obs_lo() const {
  Vec lo(7);
  lo << -15.0, 0.0, 10.0, 10.0, 10.0, -1.0, -1.0;
  return lo;
}
Vec RoomEnv::obs_hi() const {
  Vec hi(7);
  hi << 40.0, 1300.0, 40.0, 50.0, 50.0, 1.0, 1.0;
  return hi;
}

// ---------------------------------------------------------------------------
// BatteryEnv

BatteryEnv::BatteryEnv(BatteryEnvConfig config) : cfg_(config) {}

Vec BatteryEnv::reset(std::uint64_t episode_seed) {
  std::mt19937_64 rng(episode_seed);
  soc_ = std::uniform_real_distribution<double>(cfg_.s0_lo, cfg_.s0_hi)(rng);
  t_ = 0;
  return observation();
}

EnvStep BatteryEnv::step(const Vec& action) {
  const int minute = (cfg_.start_minute + t_ * 15) % 1440;
  const SafeAction safe = f_safe(action(0), soc_, t_, cfg_.limits, cfg_.coeffs);
  const double price = price_at(minute, cfg_.prices);

  soc_ = battery_step(cfg_.coeffs, soc_, safe.p);

  EnvStep out;
  out.reward = cfg_.use_pricing ? -price * safe.p : -safe.p;
  ++t_;
  out.done = t_ == kEpisodeLen;
  out.next_obs = observation();
  out.info.raw_action_bat = action(0);
  out.info.safe_action_bat = safe.p;
  out.info.e_bat = safe.p;
  out.info.price = price;
  out.info.soc = soc_;
  out.info.infeasible = safe.infeasible;
  return out;
}

Vec BatteryEnv::observation() const {
  const int minute = (cfg_.start_minute + t_ * 15) % 1440;
  const TimeEncoding te = encode_time(minute);
  Vec obs(5);
  obs << soc_, te.t_sin, te.t_cos,
      static_cast<double>(kEpisodeLen - t_) / kEpisodeLen,
      price_at(minute, cfg_.prices);
  return obs;
}

Vec BatteryEnv::action_lo() const { return vec1(cfg_.limits.p_min); }
Vec BatteryEnv::action_hi() const { return vec1(cfg_.limits.p_max); }

Vec BatteryEnv::obs_lo() const {
  Vec lo(5);
  lo << 0.0, -1.0, -1.0, 0.0, 0.0;
  return lo;
}
Vec BatteryEnv::obs_hi() const {
  Vec hi(5);
  hi << 100.0, 1.0, 1.0, 1.0, std::max(cfg_.prices.high, cfg_.prices.low);
  return hi;
}

// ---------------------------------------------------------------------------
// JointEnv

JointEnv::JointEnv(SurrogateModel weather_model, SurrogateModel room_model,
                   std::shared_ptr<const Frame> history,
                   ArDisturbance disturbance, JointEnvConfig config)
    : room_env_(std::move(weather_model), std::move(room_model),
                std::move(history), disturbance, config.room),
      cfg_(config) {}

bool JointEnv::ev_present(int minute) const {
  // away between departure and arrival
  return !(minute >= cfg_.ev.departure_minute && minute < cfg_.ev.arrival_minute);
}

int JointEnv::steps_to_departure(int minute) const {
  int delta = cfg_.ev.departure_minute - minute;
  if (delta <= 0) delta += 1440;
  return delta / 15;
}

Vec JointEnv::reset(std::uint64_t episode_seed) {
  room_env_.reset(episode_seed);
  std::mt19937_64 rng(episode_seed ^ 0xb5297a4d3f8c6e21ULL);
  soc_ = ev_present(room_env_.minute_of_day())
             ? std::uniform_real_distribution<double>(cfg_.limits.s_min,
                                                      cfg_.limits.s_max)(rng)
             : cfg_.ev.s_arrival;
  t_ = 0;
  return observation();
}

EnvStep JointEnv::step(const Vec& action) {
  const int minute = room_env_.minute_of_day();
  const bool present = ev_present(minute);
  const double price = price_at(minute, cfg_.prices);

  const double u = std::clamp(action(0), 0.0, 1.0);
  const auto [e_room, r_next] = room_env_.advance(u);
  const double pen = c_pen(r_next, cfg_.room.comfort);

  double e_bat = 0.0;
  bool infeasible = false;
  if (present) {
    SafetyLimits lim = cfg_.limits;
    lim.s_des = cfg_.ev.s_des;
    lim.t_des = t_ + steps_to_departure(minute);
    const SafeAction safe = f_safe(action(1), soc_, t_, lim, cfg_.coeffs);
    soc_ = battery_step(cfg_.coeffs, soc_, safe.p);
    e_bat = safe.p;
    infeasible = safe.infeasible;
  }

  const int next_minute = room_env_.minute_of_day();
  if (!present && ev_present(next_minute)) soc_ = cfg_.ev.s_arrival;  // arrival

  EnvStep out;
  out.reward = -price * (cfg_.reward.alpha_bat * e_bat + e_room) -
               cfg_.reward.alpha * pen;
  ++t_;
  out.done = t_ == kEpisodeLen;
  out.next_obs = observation();
  out.info.raw_action_room = action(0);
  out.info.raw_action_bat = action(1);
  out.info.safe_action_bat = e_bat;
  out.info.e_room = e_room;
  out.info.e_bat = e_bat;
  out.info.comfort_violation = pen;
  out.info.price = price;
  out.info.room_temp = r_next;
  out.info.soc = soc_;
  out.info.infeasible = infeasible;
  out.info.ev_present = present;
  return out;
}

Vec JointEnv::observation() const {
  Vec obs(9);
  obs.head(7) = room_env_.observation();
  obs(7) = soc_;
  obs(8) = ev_present(room_env_.minute_of_day()) ? 1.0 : 0.0;
  return obs;
}

Vec JointEnv::action_lo() const {
  Vec lo(2);
  lo << 0.0, cfg_.limits.p_min;
  return lo;
}
Vec JointEnv::action_hi() const {
  Vec hi(2);
  hi << 1.0, cfg_.limits.p_max;
  return hi;
}
Vec JointEnv::obs_lo() const {
  Vec lo(9);
  lo.head(7) = room_env_.obs_lo();
  lo(7) = 0.0;
  lo(8) = 0.0;
  return lo;
}
Vec JointEnv::obs_hi() const {
  Vec hi(9);
  hi.head(7) = room_env_.obs_hi();
  hi(7) = 100.0;
  hi(8) = 1.0;
  return hi;
}

// ---------------------------------------------------------------------------
// BanditEnv

EnvStep BanditEnv::step(const Vec& action) {
  EnvStep out;
  const double d = action(0) - optimum_;
  out.reward = -d * d;
  out.done = true;
  out.next_obs = Eigen::VectorXd::Zero(1);
  return out;
}

Vec BanditEnv::action_lo() const { return vec1(0.0); }
Vec BanditEnv::action_hi() const { return vec1(1.0); }
Vec BanditEnv::obs_lo() const { return vec1(-1.0); }
Vec BanditEnv::obs_hi() const { return vec1(1.0); }

}  // namespace bcl
