#include "bcl/plant.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace bcl {

namespace {

TimeSeries make_series(const std::string& name, const std::string& unit,
                       std::int64_t t0, int dt, std::size_t n) {
  TimeSeries s;
  s.name = name;
  s.unit = unit;
  s.t0 = t0;
  s.dt_minutes = dt;
  s.values.assign(n, 0.0);
  return s;
}

double irradiance_bell(const WeatherGenParams& p, int minute_of_day) {
  const double daylight_min = p.daylight_hours * 60.0;
  const double start = 720.0 - daylight_min / 2.0;
  const double x = (minute_of_day - start) / daylight_min;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return p.irr_amplitude * std::sin(std::numbers::pi * x);
}

void check_stability(const RcRoomParams& p, double dt_h) {
  for (double u : {0.0, 1.0}) {
    Eigen::Matrix2d a;
    a(0, 0) = 1.0 - dt_h * (1.0 / p.r_room_wall + u * p.heat_gain) / p.c_room;
    a(0, 1) = dt_h / (p.r_room_wall * p.c_room);
    a(1, 0) = dt_h / (p.r_room_wall * p.c_wall);
    a(1, 1) = 1.0 - dt_h * (1.0 / p.r_room_wall + 1.0 / p.r_wall_out) / p.c_wall;
    if (a.eigenvalues().cwiseAbs().maxCoeff() >= 1.0)
      throw std::runtime_error("RC parameters unstable at dt");
  }
}

}  // namespace

std::pair<TimeSeries, TimeSeries> simulate_weather(const WeatherGenParams& params,
                                                   int days, std::uint64_t seed,
                                                   std::int64_t t0, int dt_minutes) {
  if (days < 1) throw std::invalid_argument("simulate_weather: days < 1");
  const std::size_t n = static_cast<std::size_t>(days) * 1440 / dt_minutes;
  TimeSeries o = make_series("outside_temp", "degC", t0, dt_minutes, n);
  TimeSeries irr = make_series("irradiance", "W/m2", t0, dt_minutes, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double x = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const int m = o.minute_of_day(k);
    if (params.ar_sigma > 0.0)
      x = params.ar_coeff * x + params.ar_sigma * gauss(rng);
    else
      x = 0.0;
    const double angle = 2.0 * std::numbers::pi * m / 1440.0;
    o.values[k] = params.temp_mean - params.temp_amplitude * std::cos(angle) + x;
    double iv = irradiance_bell(params, m);
    if (params.irr_noise_sigma > 0.0 && iv > 0.0)
      iv += params.irr_noise_sigma * gauss(rng);
    irr.values[k] = std::max(0.0, iv);
  }
  return {std::move(o), std::move(irr)};
}

std::pair<double, double> rc_steady_state(const RcRoomParams& p, double o,
                                          double irr_kw, double u, double h_in) {
  // 0 = (Tw - Tr)/Rrw + u*g*(h_in - Tr) + a*i
  // 0 = (Tr - Tw)/Rrw + (o - Tw)/Rwo
  Eigen::Matrix2d a;
  Eigen::Vector2d b;
  a(0, 0) = -1.0 / p.r_room_wall - u * p.heat_gain;
  a(0, 1) = 1.0 / p.r_room_wall;
  b(0) = -u * p.heat_gain * h_in - p.solar_aperture * irr_kw;
  a(1, 0) = 1.0 / p.r_room_wall;
  a(1, 1) = -1.0 / p.r_room_wall - 1.0 / p.r_wall_out;
  b(1) = -o / p.r_wall_out;
  const Eigen::Vector2d t = a.colPivHouseholderQr().solve(b);
  return {t(0), t(1)};
}

std::pair<TimeSeries, TimeSeries> simulate_room(const RcRoomParams& params,
                                                const TimeSeries& outside_temp,
                                                const TimeSeries& irradiance,
                                                const TimeSeries& valve,
                                                const TimeSeries& water_in,
                                                double t_room0, double t_wall0) {
  const std::size_t n = outside_temp.size();
  if (irradiance.size() != n || valve.size() != n || water_in.size() != n)
    throw std::invalid_argument("simulate_room: schedules on different grids");
  const double dt_h = outside_temp.dt_minutes / 60.0;
  check_stability(params, dt_h);

  TimeSeries r = make_series("room_temp", "degC", outside_temp.t0,
                             outside_temp.dt_minutes, n);
  TimeSeries h_out = make_series("water_out", "degC", outside_temp.t0,
                                 outside_temp.dt_minutes, n);
  double tr = t_room0, tw = t_wall0;
  for (std::size_t k = 0; k < n; ++k) {
    r.values[k] = tr;
    const double u = valve.values[k];
    const double h_in = water_in.values[k];
    h_out.values[k] = h_in - params.outflow_kappa * u * (h_in - tr);
    const double q_heat = u * params.heat_gain * (h_in - tr);
    const double q_sun = params.solar_aperture * irradiance.values[k] / 1000.0;
    const double d_tr = ((tw - tr) / params.r_room_wall + q_heat + q_sun) / params.c_room;
    const double d_tw = ((tr - tw) / params.r_room_wall +
                         (outside_temp.values[k] - tw) / params.r_wall_out) /
                        params.c_wall;
    tr += dt_h * d_tr;
    tw += dt_h * d_tw;
  }
  return {std::move(r), std::move(h_out)};
}

double true_battery_step(const BatteryCoefficients& alpha_true, double s, double p,
                         double noise_sigma, std::uint64_t seed) {
  double eps = 0.0;
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    eps = std::normal_distribution<double>(0.0, noise_sigma)(rng);
  }
  return std::clamp(s + delta_soc(alpha_true, p) + eps, 0.0, 100.0);
}

TruePlantTrace generate_history(const PlantParams& params, int days,
                                std::uint64_t seed, std::int64_t t0) {
  if (days < 7) throw std::invalid_argument("generate_history: days < 7");
  const int dt = 15;
  auto [o, irr] = simulate_weather(params.weather, days, seed, t0, dt);
  const std::size_t n = o.size();
  const std::size_t per_day = 1440 / dt;

  TruePlantTrace tr;
  tr.outside_temp = o;
  tr.irradiance = irr;
  tr.room_temp = make_series("room_temp", "degC", t0, dt, n);
  tr.water_in = make_series("water_in", "degC", t0, dt, n);
  tr.water_out = make_series("water_out", "degC", t0, dt, n);
  tr.valve = make_series("valve", "", t0, dt, n);
  tr.soc = make_series("soc", "%", t0, dt, n);
  tr.power = make_series("power", "kW", t0, dt, n);

  // In-flowing water temperature: a slow daily constant tracking the outside
  // daily mean.
  for (std::size_t d = 0; d * per_day < n; ++d) {
    double mean = 0.0;
    const std::size_t lo = d * per_day, hi = std::min(n, (d + 1) * per_day);
    for (std::size_t k = lo; k < hi; ++k) mean += o.values[k];
    mean /= static_cast<double>(hi - lo);
    const double h_in = params.h_in_base - params.h_in_slope * mean;
    for (std::size_t k = lo; k < hi; ++k) tr.water_in.values[k] = h_in;
  }

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Room loop with dithered bang-bang excitation.
  const double dt_h = dt / 60.0;
  check_stability(params.room, dt_h);
  const RcRoomParams& rc = params.room;
  double setpoint = 20.0 + 6.0 * uni(rng);
  double tr_room = setpoint, tr_wall = (setpoint + params.weather.temp_mean) / 2.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % 24 == 0) setpoint = 20.0 + 6.0 * uni(rng);  // redraw every 6 h
    const double u = tr_room < setpoint ? 1.0 : 0.0;
    const double h_in = tr.water_in.values[k];
    tr.room_temp.values[k] = tr_room;
    tr.valve.values[k] = u;
    tr.water_out.values[k] = h_in - rc.outflow_kappa * u * (h_in - tr_room);
    const double q_heat = u * rc.heat_gain * (h_in - tr_room);
    const double q_sun = rc.solar_aperture * irr.values[k] / 1000.0;
    const double d_tr = ((tr_wall - tr_room) / rc.r_room_wall + q_heat + q_sun) / rc.c_room;
    const double d_tw = ((tr_room - tr_wall) / rc.r_room_wall +
                         (o.values[k] - tr_wall) / rc.r_wall_out) /
                        rc.c_wall;
    tr_room += dt_h * d_tr;
    tr_wall += dt_h * d_tw;
  }

  // Battery usage: piecewise-constant random power, SoC from the true model.
  double s = 50.0;
  double p = 0.0;
  int hold = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (hold == 0) {
      p = -100.0 + 200.0 * uni(rng);
      hold = 1 + static_cast<int>(uni(rng) * 8);
    }
    --hold;
    // steer away from the rails so both signs keep occurring
    if (s > 90.0 && p > 0.0) p = -std::abs(p);
    if (s < 10.0 && p < 0.0) p = std::abs(p);
    tr.soc.values[k] = s;
    tr.power.values[k] = p;
    double eps = params.battery_noise_sigma > 0.0
                     ? params.battery_noise_sigma * gauss(rng)
                     : 0.0;
    s = std::clamp(s + delta_soc(params.battery_true, p) + eps, 0.0, 100.0);
  }

  if (params.artifact_rate > 0.0) {
    auto inject = [&](TimeSeries& ts, double spike) {
      for (double& v : ts.values) {
        const double r = uni(rng);
        if (r < params.artifact_rate * 0.5)
          v = TimeSeries::gap();
        else if (r < params.artifact_rate)
          v += (uni(rng) < 0.5 ? -spike : spike);
      }
    };
    inject(tr.outside_temp, 4.0);
    inject(tr.room_temp, 3.0);
    inject(tr.water_in, 5.0);
    inject(tr.water_out, 5.0);
    inject(tr.soc, 10.0);
  }
  return tr;
}

}  // namespace bcl
