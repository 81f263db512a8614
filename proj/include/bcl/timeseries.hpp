#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace bcl {

// Uniformly gridded signal. Gaps are encoded as NaN; index i maps to
// t0 + i * dt_minutes * 60 seconds.
struct TimeSeries {
  std::string name;
  std::string unit;
  std::int64_t t0 = 0;  // unix seconds
  int dt_minutes = 15;
  std::vector<double> values;

  static constexpr double gap() { return std::numeric_limits<double>::quiet_NaN(); }
  static bool is_gap(double v) { return std::isnan(v); }

  std::size_t size() const { return values.size(); }
  std::int64_t time_at(std::size_t i) const {
    return t0 + static_cast<std::int64_t>(i) * dt_minutes * 60;
  }
  int minute_of_day(std::size_t i) const {
    std::int64_t m = (time_at(i) / 60) % 1440;
    return static_cast<int>(m < 0 ? m + 1440 : m);
  }
  std::size_t gap_count() const {
    std::size_t c = 0;
    for (double v : values) c += is_gap(v);
    return c;
  }
};

struct WhiteningStats {
  double mean = 0.0;
  double std = 1.0;  // population (1/N) standard deviation
};

struct ClipBounds {
  double lo;
  double hi;
};

// Replaces samples outside [lo, hi] by gaps. With exclude_boundary set,
// samples equal to lo or hi are removed too.
TimeSeries remove_out_of_range(const TimeSeries& s, double lo, double hi,
                               bool exclude_boundary = false);

// Gaps every maximal run of exactly-equal consecutive values whose span
// (run length * dt) is at least min_duration.
TimeSeries remove_constant_runs(const TimeSeries& s, int min_duration_minutes);

// Gaps single samples deviating by at least `magnitude` from both immediate
// non-gap neighbors.
TimeSeries remove_spikes(const TimeSeries& s, double magnitude);

// Fills gaps strictly shorter than max_gap by linear interpolation between
// the bounding samples. Leading/trailing gaps are never filled.
TimeSeries interpolate_gaps(const TimeSeries& s, int max_gap_minutes);

// Discrete Gaussian smoothing; sigma is measured in samples. Kernel is
// truncated at +-4 sigma and renormalized per point over non-gap support.
// Gaps stay gaps.
TimeSeries gaussian_smooth(const TimeSeries& s, double sigma);

// Whitening over non-gap samples. Throws std::invalid_argument("zero variance")
// on a degenerate series.
std::pair<TimeSeries, WhiteningStats> whiten(const TimeSeries& s);
TimeSeries unwhiten(const TimeSeries& s, const WhiteningStats& stats);
WhiteningStats whitening_stats(const TimeSeries& s);

// Bin-averages a fine-grid 0/1 valve signal onto a 15-minute grid.
// Empty bins become gaps.
TimeSeries subsample_valve(const TimeSeries& raw, int out_dt_minutes = 15);

// Named preprocessing pipelines following the per-signal recipes.
TimeSeries preprocess_room_temp(const TimeSeries& s);
TimeSeries preprocess_valve(const TimeSeries& subsampled);
TimeSeries preprocess_water_temp(const TimeSeries& s);
TimeSeries preprocess_outside_temp(const TimeSeries& s);
TimeSeries preprocess_irradiance(const TimeSeries& s);
TimeSeries preprocess_soc(const TimeSeries& s);
TimeSeries preprocess_active_power(const TimeSeries& s);

}  // namespace bcl
