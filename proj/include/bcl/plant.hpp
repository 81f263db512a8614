#pragma once

#include <cstdint>
#include <vector>

#include "bcl/battery.hpp"
#include "bcl/timeseries.hpp"

namespace bcl {

// Ground-truth 2R2C room model, stepped by forward Euler at the grid dt.
struct RcRoomParams {
  double c_room = 2.0;          // kWh/degC
  double c_wall = 8.0;          // kWh/degC
  double r_room_wall = 2.0;     // degC/kW
  double r_wall_out = 5.0;      // degC/kW
  double heat_gain = 0.3;       // kW per degC of (h_in - T_room), at valve=1
  double solar_aperture = 2.0;  // kW per kW/m^2 irradiance
  double outflow_kappa = 0.4;   // h_out = h_in - kappa * u * (h_in - T_room)
};

struct WeatherGenParams {
  double temp_mean = 8.0;       // degC, daily mean
  double temp_amplitude = 5.0;  // degC, peak at noon
  double ar_coeff = 0.9;
  double ar_sigma = 0.6;        // innovation std, degC
  double irr_amplitude = 600.0; // W/m^2 peak
  double daylight_hours = 10.0;
  double irr_noise_sigma = 30.0;
};

struct PlantParams {
  RcRoomParams room;
  WeatherGenParams weather;
  BatteryCoefficients battery_true{-0.01, 0.05, -0.02};
  double battery_noise_sigma = 0.05;  // %SoC per step
  double h_in_base = 32.0;            // degC at 0 degC daily mean outside
  double h_in_slope = 0.3;            // degC drop per degC of daily mean
  double artifact_rate = 0.0;         // per-sample gap/spike injection prob
};

// All Table-1 signals on a shared 15-minute grid.
struct TruePlantTrace {
  TimeSeries outside_temp;  // o
  TimeSeries irradiance;    // i
  TimeSeries room_temp;     // r
  TimeSeries water_in;      // h_in
  TimeSeries water_out;     // h_out
  TimeSeries valve;         // u
  TimeSeries soc;           // s_bat
  TimeSeries power;         // p
};

// Deterministic given seed; irradiance clipped at 0.
std::pair<TimeSeries, TimeSeries> simulate_weather(const WeatherGenParams& params,
                                                   int days, std::uint64_t seed,
                                                   std::int64_t t0 = 0,
                                                   int dt_minutes = 15);

// Forward-Euler 2R2C simulation. Throws std::runtime_error
// ("RC parameters unstable at dt") when the discretized map is unstable.
// Returns (room_temp, water_out).
std::pair<TimeSeries, TimeSeries> simulate_room(const RcRoomParams& params,
                                                const TimeSeries& outside_temp,
                                                const TimeSeries& irradiance,
                                                const TimeSeries& valve,
                                                const TimeSeries& water_in,
                                                double t_room0, double t_wall0);

// Closed-form steady state of the RC balance under constant inputs.
// Returns (T_room, T_wall).
std::pair<double, double> rc_steady_state(const RcRoomParams& params, double o,
                                          double irr_kw, double u, double h_in);

double true_battery_step(const BatteryCoefficients& alpha_true, double s, double p,
                         double noise_sigma, std::uint64_t seed);

// Full synthetic history: dithered bang-bang excitation (random setpoint in
// [20, 26] degC redrawn every 6 h), random battery usage, optional artifact
// injection to exercise the preprocessing operators.
TruePlantTrace generate_history(const PlantParams& params, int days,
                                std::uint64_t seed, std::int64_t t0 = 0);

}  // namespace bcl
