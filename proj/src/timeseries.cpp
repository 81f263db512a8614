#include "bcl/timeseries.hpp"

#include <algorithm>
#include <stdexcept>

namespace bcl {

TimeSeries remove_out_of_range(const TimeSeries& s, double lo, double hi,
                               bool exclude_boundary) {
  if (!(lo < hi)) throw std::invalid_argument("remove_out_of_range: lo >= hi");
  TimeSeries out = s;
  for (double& v : out.values) {
    if (TimeSeries::is_gap(v)) continue;
    bool bad = exclude_boundary ? (v <= lo || v >= hi) : (v < lo || v > hi);
    if (bad) v = TimeSeries::gap();
  }
  return out;
}

TimeSeries remove_constant_runs(const TimeSeries& s, int min_duration_minutes) {
  if (min_duration_minutes < s.dt_minutes)
    throw std::invalid_argument("remove_constant_runs: min_duration < dt");
  TimeSeries out = s;
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    if (TimeSeries::is_gap(s.values[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && !TimeSeries::is_gap(s.values[j]) && s.values[j] == s.values[i]) ++j;
    const std::size_t run = j - i;
    if (static_cast<long long>(run) * s.dt_minutes >= min_duration_minutes) {
      for (std::size_t k = i; k < j; ++k) out.values[k] = TimeSeries::gap();
    }
    i = j;
  }
  return out;
}

TimeSeries remove_spikes(const TimeSeries& s, double magnitude) {
  if (!(magnitude > 0)) throw std::invalid_argument("remove_spikes: magnitude <= 0");
  const std::size_t n = s.size();
  TimeSeries out = s;
  for (std::size_t i = 0; i < n; ++i) {
    if (TimeSeries::is_gap(s.values[i])) continue;
    // nearest non-gap neighbor on each side
    double left = TimeSeries::gap(), right = TimeSeries::gap();
    for (std::size_t k = i; k-- > 0;) {
      if (!TimeSeries::is_gap(s.values[k])) {
        left = s.values[k];
        break;
      }
    }
    for (std::size_t k = i + 1; k < n; ++k) {
      if (!TimeSeries::is_gap(s.values[k])) {
        right = s.values[k];
        break;
      }
    }
    if (TimeSeries::is_gap(left) || TimeSeries::is_gap(right)) continue;
    if (std::abs(s.values[i] - left) >= magnitude &&
        std::abs(s.values[i] - right) >= magnitude)
      out.values[i] = TimeSeries::gap();
  }
  return out;
}

TimeSeries interpolate_gaps(const TimeSeries& s, int max_gap_minutes) {
  if (max_gap_minutes < s.dt_minutes)
    throw std::invalid_argument("interpolate_gaps: max_gap < dt");
  TimeSeries out = s;
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    if (!TimeSeries::is_gap(s.values[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && TimeSeries::is_gap(s.values[j])) ++j;
    const std::size_t run = j - i;
    const bool interior = i > 0 && j < n;
    if (interior && static_cast<long long>(run) * s.dt_minutes < max_gap_minutes) {
      const double a = s.values[i - 1];
      const double b = s.values[j];
      for (std::size_t k = i; k < j; ++k) {
        const double f = static_cast<double>(k - i + 1) / static_cast<double>(run + 1);
        out.values[k] = a + f * (b - a);
      }
    }
    i = j;
  }
  return out;
}

TimeSeries gaussian_smooth(const TimeSeries& s, double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("gaussian_smooth: sigma <= 0");
  const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(2 * half + 1);
  for (int k = -half; k <= half; ++k)
    kernel[k + half] = std::exp(-0.5 * (k / sigma) * (k / sigma));

  const std::size_t n = s.size();
  TimeSeries out = s;
  for (std::size_t i = 0; i < n; ++i) {
    if (TimeSeries::is_gap(s.values[i])) continue;
    double acc = 0.0, wsum = 0.0;
    for (int k = -half; k <= half; ++k) {
      const long long j = static_cast<long long>(i) + k;
      if (j < 0 || j >= static_cast<long long>(n)) continue;
      const double v = s.values[static_cast<std::size_t>(j)];
      if (TimeSeries::is_gap(v)) continue;
      acc += kernel[k + half] * v;
      wsum += kernel[k + half];
    }
    out.values[i] = acc / wsum;
  }
  return out;
}

WhiteningStats whitening_stats(const TimeSeries& s) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : s.values) {
    if (TimeSeries::is_gap(v)) continue;
    sum += v;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("zero variance");
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double v : s.values) {
    if (TimeSeries::is_gap(v)) continue;
    sq += (v - mean) * (v - mean);
  }
  const double var = sq / static_cast<double>(n);
  if (!(var > 0)) throw std::invalid_argument("zero variance");
  return {mean, std::sqrt(var)};
}

std::pair<TimeSeries, WhiteningStats> whiten(const TimeSeries& s) {
  const WhiteningStats st = whitening_stats(s);
  TimeSeries out = s;
  for (double& v : out.values)
    if (!TimeSeries::is_gap(v)) v = (v - st.mean) / st.std;
  return {out, st};
}

TimeSeries unwhiten(const TimeSeries& s, const WhiteningStats& stats) {
  TimeSeries out = s;
  for (double& v : out.values)
    if (!TimeSeries::is_gap(v)) v = v * stats.std + stats.mean;
  return out;
}

TimeSeries subsample_valve(const TimeSeries& raw, int out_dt_minutes) {
  if (out_dt_minutes % raw.dt_minutes != 0)
    throw std::invalid_argument("subsample_valve: incompatible grids");
  const std::size_t per_bin = static_cast<std::size_t>(out_dt_minutes / raw.dt_minutes);
  TimeSeries out;
  out.name = raw.name;
  out.unit = raw.unit;
  out.t0 = raw.t0;
  out.dt_minutes = out_dt_minutes;
  const std::size_t n_bins = raw.size() / per_bin;
  out.values.reserve(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < per_bin; ++k) {
      const double v = raw.values[b * per_bin + k];
      if (TimeSeries::is_gap(v)) continue;
      acc += v;
      ++cnt;
    }
    out.values.push_back(cnt == 0 ? TimeSeries::gap() : acc / static_cast<double>(cnt));
  }
  return out;
}

TimeSeries preprocess_room_temp(const TimeSeries& s) {
  TimeSeries r = remove_out_of_range(s, 10.0, 40.0);
  r = remove_constant_runs(r, 24 * 60);
  r = remove_spikes(r, 1.5);
  return gaussian_smooth(r, 5.0);
}

TimeSeries preprocess_valve(const TimeSeries& subsampled) {
  return remove_constant_runs(subsampled, 30 * 24 * 60);
}

TimeSeries preprocess_water_temp(const TimeSeries& s) {
  TimeSeries r = remove_out_of_range(s, 10.0, 50.0);
  return gaussian_smooth(r, 5.0);
}

TimeSeries preprocess_outside_temp(const TimeSeries& s) {
  // "constant for more than 30 minutes" -> 45 min threshold on the 15-min grid
  TimeSeries r = remove_constant_runs(s, 45);
  r = interpolate_gaps(r, 45);
  return gaussian_smooth(r, 2.0);
}

TimeSeries preprocess_irradiance(const TimeSeries& s) {
  TimeSeries r = remove_constant_runs(s, 20 * 60);
  r = interpolate_gaps(r, 45);
  return gaussian_smooth(r, 2.0);
}

TimeSeries preprocess_soc(const TimeSeries& s) {
  TimeSeries r = remove_out_of_range(s, 0.0, 100.0, /*exclude_boundary=*/true);
  return remove_constant_runs(r, 24 * 60);
}

TimeSeries preprocess_active_power(const TimeSeries& s) {
  return remove_constant_runs(s, 6 * 60);
}

}  // namespace bcl
