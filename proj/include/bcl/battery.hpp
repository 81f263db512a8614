#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bcl {

// Piecewise-linear SoC model: delta = alpha0 + alpha1 * p + alpha2 * max(0, p).
// Invariants: alpha1 > 0, -alpha1 < alpha2 < 0, alpha0 <= 0.
struct BatteryCoefficients {
  double alpha0 = 0.0;
  double alpha1 = 0.05;   // %SoC per kW per step (discharge slope)
  double alpha2 = -0.02;  // charging slope correction, per kW

  bool physical() const {
    return alpha1 > 0.0 && alpha2 < 0.0 && alpha2 > -alpha1 && alpha0 <= 0.0;
  }
};

struct SafetyLimits {
  double s_min = 20.0;  // %SoC
  double s_max = 80.0;
  double p_min = -100.0;  // kW
  double p_max = 100.0;
  double s_des = 60.0;  // goal SoC at t_des
  int t_des = 48;       // step index of departure
};

struct SafeAction {
  double p;          // clipped power, kW
  bool infeasible;   // envelope was empty; departure goal took priority
};

inline double delta_soc(const BatteryCoefficients& c, double p) {
  return c.alpha0 + c.alpha1 * p + c.alpha2 * std::max(0.0, p);
}

inline double battery_step(const BatteryCoefficients& c, double s, double p) {
  return s + delta_soc(c, p);
}

// Inverse of the one-step model: the power that maps s_t onto s_bound.
// Used as an upper bound with s_bound = s_max and as a lower bound with
// s_bound = s_min (same expression, both branches agree at the kink).
double c_bat(double s_bound, double s_t, const BatteryCoefficients& c);

// Minimal power at the next step such that charging at p_max for all the
// remaining steps still reaches s_des at t_des. Requires t < t_des.
double p_min_des(double s_des, int t_des, int t, double s_t, double p_max,
                 const BatteryCoefficients& c);

// Power envelope [p_lo, p_hi] combining rate, SoC, and departure constraints.
std::pair<double, double> power_envelope(double s_t, int t, const SafetyLimits& lim,
                                         const BatteryCoefficients& c);

// Clips p to the envelope. On an empty envelope the departure goal wins:
// min(p_lo, p_max) is applied and the step is flagged.
SafeAction f_safe(double p, double s_t, int t, const SafetyLimits& lim,
                  const BatteryCoefficients& c);

// OLS fit of (p, delta_soc) samples on design columns [1, p, max(0,p)].
// Throws std::runtime_error("insufficient excitation") on a singular design
// and std::runtime_error("unphysical fit: ...") when the fitted coefficients
// violate the model invariants.
BatteryCoefficients fit_coefficients(std::span<const std::pair<double, double>> samples);

}  // namespace bcl
