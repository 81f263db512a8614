#include "bcl/battery.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace bcl {

namespace {

// Additive slack on the departure-goal target, absorbing per-step float
// rounding over an episode so the goal invariant holds without tolerance.
constexpr double kGoalSlack = 1e-9;

}  // namespace

double c_bat(double s_bound, double s_t, const BatteryCoefficients& c) {
  const double num = s_bound - s_t - c.alpha0;
  return num > 0.0 ? num / (c.alpha1 + c.alpha2) : num / c.alpha1;
}

double p_min_des(double s_des, int t_des, int t, double s_t, double p_max,
                 const BatteryCoefficients& c) {
  if (t >= t_des) throw std::invalid_argument("p_min_des: t >= t_des");
  const int remaining = t_des - t - 1;
  const double target = s_des - remaining * delta_soc(c, p_max) + kGoalSlack;
  double p = c_bat(target, s_t, c);
  while (battery_step(c, s_t, p) < target)
    p = std::nextafter(p, std::numeric_limits<double>::infinity());
  return p;
}

std::pair<double, double> power_envelope(double s_t, int t, const SafetyLimits& lim,
                                         const BatteryCoefficients& c) {
  double p_soc_hi = c_bat(lim.s_max, s_t, c);
  while (battery_step(c, s_t, p_soc_hi) > lim.s_max)
    p_soc_hi = std::nextafter(p_soc_hi, -std::numeric_limits<double>::infinity());
  double p_soc_lo = c_bat(lim.s_min, s_t, c);
  while (battery_step(c, s_t, p_soc_lo) < lim.s_min)
    p_soc_lo = std::nextafter(p_soc_lo, std::numeric_limits<double>::infinity());

  double p_lo = std::max(lim.p_min, p_soc_lo);
  if (t < lim.t_des)
    p_lo = std::max(p_lo, p_min_des(lim.s_des, lim.t_des, t, s_t, lim.p_max, c));
  const double p_hi = std::min(lim.p_max, p_soc_hi);
  return {p_lo, p_hi};
}

SafeAction f_safe(double p, double s_t, int t, const SafetyLimits& lim,
                  const BatteryCoefficients& c) {
  const auto [p_lo, p_hi] = power_envelope(s_t, t, lim, c);
  if (p_lo > p_hi) {
    // Departure goal is unreachable within the rate limit; charge as hard
    // as the rate limit allows (never past s_max: the goal target is <= s_max).
    return {std::min(p_lo, lim.p_max), true};
  }
  return {std::clamp(p, p_lo, p_hi), false};
}

BatteryCoefficients fit_coefficients(
    std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 3)
    throw std::runtime_error("insufficient excitation: need at least 3 samples");
  const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = samples[static_cast<std::size_t>(i)].first;
    X(i, 0) = 1.0;
    X(i, 1) = p;
    X(i, 2) = std::max(0.0, p);
    y(i) = samples[static_cast<std::size_t>(i)].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw std::runtime_error("insufficient excitation");
  const Eigen::Vector3d beta = qr.solve(y);
  BatteryCoefficients c{beta(0), beta(1), beta(2)};
  if (!c.physical()) {
    std::ostringstream msg;
    msg << "unphysical fit: alpha0=" << c.alpha0 << " alpha1=" << c.alpha1
        << " alpha2=" << c.alpha2;
    throw std::runtime_error(msg.str());
  }
  return c;
}

}  // namespace bcl
