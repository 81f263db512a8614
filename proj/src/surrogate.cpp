#include "bcl/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace bcl {

using Eigen::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

TimeEncoding encode_time(int minute_of_day) {
  if (minute_of_day < 0 || minute_of_day >= 1440)
    throw std::invalid_argument("encode_time: minute out of range");
  const double angle = 2.0 * std::numbers::pi * minute_of_day / 1440.0;
  return {std::sin(angle), std::cos(angle)};
}

int Frame::col(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("Frame: unknown column " + name);
}

Frame frame_from_trace(const TruePlantTrace& trace) {
  const Index n = static_cast<Index>(trace.outside_temp.size());
  Frame f;
  f.t0 = trace.outside_temp.t0;
  f.dt_minutes = trace.outside_temp.dt_minutes;
  f.names = {"outside_temp", "irradiance", "room_temp", "water_in",
             "water_out",    "valve",      "t_sin",     "t_cos"};
  f.values.resize(n, static_cast<Index>(f.names.size()));
  const TimeSeries* cols[6] = {&trace.outside_temp, &trace.irradiance,
                               &trace.room_temp,    &trace.water_in,
                               &trace.water_out,    &trace.valve};
  for (Index r = 0; r < n; ++r) {
    for (int c = 0; c < 6; ++c) f.values(r, c) = cols[c]->values[static_cast<std::size_t>(r)];
    const TimeEncoding te = encode_time(f.minute_of_day(r));
    f.values(r, 6) = te.t_sin;
    f.values(r, 7) = te.t_cos;
  }
  return f;
}

bool SurrogateSpec::is_control(const std::string& name) const {
  return std::find(control_inputs.begin(), control_inputs.end(), name) !=
         control_inputs.end();
}

int SurrogateSpec::input_index(const std::string& name) const {
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (inputs[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("SurrogateSpec: unknown input " + name);
}

SurrogateSpec room_model_spec() {
  SurrogateSpec s;
  s.lookback = 19;
  s.n_layers = 3;
  s.units = 30;
  s.cell = nn::CellKind::kLstm;
  s.inputs = {"outside_temp", "irradiance", "room_temp", "water_in",
              "water_out",    "t_sin",      "t_cos",     "valve"};
  s.control_inputs = {"valve"};
  s.outputs = {"room_temp"};
  s.sigma_input = 3.633e-6;
  s.output_clip = {{10.0, 40.0}};
  return s;
}

SurrogateSpec weather_model_spec() {
  SurrogateSpec s;
  s.lookback = 19;
  s.n_layers = 1;
  s.units = 60;
  s.cell = nn::CellKind::kGru;
  s.inputs = {"outside_temp", "irradiance", "t_sin", "t_cos"};
  s.outputs = {"outside_temp", "irradiance"};
  s.sigma_input = 0.01202;
  s.output_clip = {{-15.0, 40.0}, {0.0, 1300.0}};
  return s;
}

namespace {

std::vector<int> used_columns(const Frame& frame, const SurrogateSpec& spec) {
  std::vector<int> cols;
  for (const auto& name : spec.inputs) cols.push_back(frame.col(name));
  return cols;
}

WhiteningStats column_stats(const Frame& frame, int col) {
  double sum = 0.0;
  Index n = 0;
  for (Index r = 0; r < frame.rows(); ++r) {
    const double v = frame.values(r, col);
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  if (n < 2) throw std::runtime_error("empty training set");
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (Index r = 0; r < frame.rows(); ++r) {
    const double v = frame.values(r, col);
    if (std::isnan(v)) continue;
    sq += (v - mean) * (v - mean);
  }
  const double std_dev = std::sqrt(sq / static_cast<double>(n));
  return {mean, std_dev > 0.0 ? std_dev : 1.0};
}

}  // namespace

std::vector<Index> valid_window_starts(const Frame& frame,
                                       const SurrogateSpec& spec) {
  const std::vector<int> cols = used_columns(frame, spec);
  const Index n = spec.lookback;
  std::vector<Index> starts;
  // ok[r] = all used columns observed at row r
  std::vector<char> ok(static_cast<std::size_t>(frame.rows()), 1);
  for (Index r = 0; r < frame.rows(); ++r)
    for (int c : cols)
      if (std::isnan(frame.values(r, c))) {
        ok[static_cast<std::size_t>(r)] = 0;
        break;
      }
  Index run = 0;
  for (Index r = 0; r < frame.rows(); ++r) {
    run = ok[static_cast<std::size_t>(r)] ? run + 1 : 0;
    if (run >= n + 1) starts.push_back(r - n);
  }
  return starts;
}

Mat make_window(const Frame& frame, const SurrogateSpec& spec, Index t) {
  const Index n = spec.lookback;
  if (t - n + 1 < 0 || t + 1 >= frame.rows())
    throw std::invalid_argument("make_window: out of range");
  Mat w(n, static_cast<Index>(spec.inputs.size()));
  for (std::size_t j = 0; j < spec.inputs.size(); ++j) {
    const int c = frame.col(spec.inputs[j]);
    const Index shift = spec.is_control(spec.inputs[j]) ? 1 : 0;
    for (Index k = 0; k < n; ++k)
      w(k, static_cast<Index>(j)) = frame.values(t - n + 1 + k + shift, c);
  }
  return w;
}

Vec SurrogateModel::predict(const Mat& window, bool train_mode,
                            std::uint64_t noise_seed) const {
  const Index n = spec.lookback;
  const Index in_dim = static_cast<Index>(spec.inputs.size());
  if (window.rows() != n || window.cols() != in_dim)
    throw std::invalid_argument("predict: window shape mismatch");
  if (window.hasNaN()) throw std::invalid_argument("predict: window has gaps");

  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Mat> xs(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    Mat x(in_dim, 1);
    for (Index j = 0; j < in_dim; ++j) {
      double v = (window(k, j) - stats[static_cast<std::size_t>(j)].mean) /
                 stats[static_cast<std::size_t>(j)].std;
      if (train_mode && spec.sigma_input > 0.0 &&
          !spec.is_time(spec.inputs[static_cast<std::size_t>(j)]))
        v += spec.sigma_input * gauss(rng);
      x(j, 0) = v;
    }
    xs[static_cast<std::size_t>(k)] = std::move(x);
  }
  const Mat delta = net->forward(xs);
  Vec out(static_cast<Index>(spec.outputs.size()));
  for (std::size_t o = 0; o < spec.outputs.size(); ++o) {
    const int j = spec.input_index(spec.outputs[o]);
    const WhiteningStats& st = stats[static_cast<std::size_t>(j)];
    const double last_w = (window(n - 1, j) - st.mean) / st.std;
    double pred = (last_w + delta(static_cast<Index>(o), 0)) * st.std + st.mean;
    pred = std::clamp(pred, spec.output_clip[o].lo, spec.output_clip[o].hi);
    out(static_cast<Index>(o)) = pred;
  }
  return out;
}

TrainResult train_surrogate(const SurrogateSpec& spec, const Frame& frame,
                            const TrainConfig& config) {
  const Index n = spec.lookback;
  const Index in_dim = static_cast<Index>(spec.inputs.size());
  const Index out_dim = static_cast<Index>(spec.outputs.size());

  SurrogateModel model;
  model.spec = spec;
  model.seed = config.seed;
  model.stats.resize(spec.inputs.size());
  for (std::size_t j = 0; j < spec.inputs.size(); ++j)
    model.stats[j] = spec.is_time(spec.inputs[j])
                         ? WhiteningStats{0.0, 1.0}
                         : column_stats(frame, frame.col(spec.inputs[j]));
  model.net = std::make_shared<nn::RecurrentNet>(spec.cell, in_dim, out_dim,
                                                 spec.n_layers, spec.units,
                                                 config.seed);

  const std::vector<Index> starts = valid_window_starts(frame, spec);
  if (starts.empty()) throw std::runtime_error("empty training set");
  const std::size_t n_train =
      static_cast<std::size_t>(config.train_frac * static_cast<double>(starts.size()));
  if (n_train == 0) throw std::runtime_error("empty training set");
  std::vector<Index> train_starts(starts.begin(), starts.begin() + n_train);
  const std::size_t n_val = static_cast<std::size_t>(
      config.val_frac * static_cast<double>(starts.size()));
  std::vector<Index> val_starts(starts.begin() + n_train,
                                starts.begin() + std::min(starts.size(), n_train + n_val));

  // Precompute whitened windows and delta targets.
  auto assemble = [&](const std::vector<Index>& idx, std::size_t lo, std::size_t hi,
                      bool noise, std::mt19937_64& rng, std::vector<Mat>& xs,
                      Mat& target) {
    const Index B = static_cast<Index>(hi - lo);
    xs.assign(static_cast<std::size_t>(n), Mat(in_dim, B));
    target.resize(out_dim, B);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t b = lo; b < hi; ++b) {
      const Index i = idx[b];  // window covers rows i .. i+n-1, target row i+n
      const Index bc = static_cast<Index>(b - lo);
      for (Index k = 0; k < n; ++k) {
        for (Index j = 0; j < in_dim; ++j) {
          const std::string& name = spec.inputs[static_cast<std::size_t>(j)];
          const Index shift = spec.is_control(name) ? 1 : 0;
          const WhiteningStats& st = model.stats[static_cast<std::size_t>(j)];
          double v = (frame.values(i + k + shift, frame.col(name)) - st.mean) / st.std;
          if (noise && spec.sigma_input > 0.0 && !spec.is_time(name))
            v += spec.sigma_input * gauss(rng);
          xs[static_cast<std::size_t>(k)](j, bc) = v;
        }
      }
      for (Index o = 0; o < out_dim; ++o) {
        const int c = frame.col(spec.outputs[static_cast<std::size_t>(o)]);
        const int j = spec.input_index(spec.outputs[static_cast<std::size_t>(o)]);
        const WhiteningStats& st = model.stats[static_cast<std::size_t>(j)];
        target(o, bc) = (frame.values(i + n, c) - frame.values(i + n - 1, c)) / st.std;
      }
    }
  };

  std::mt19937_64 rng(config.seed ^ 0xdeadbeefULL);
  const std::vector<nn::Param*> params = model.net->params();
  nn::Adam opt(config.lr);
  TrainResult result;

  for (int ep = 0; ep < config.epochs; ++ep) {
    std::shuffle(train_starts.begin(), train_starts.end(), rng);
    double ep_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t lo = 0; lo < train_starts.size();
         lo += static_cast<std::size_t>(config.batch)) {
      const std::size_t hi =
          std::min(train_starts.size(), lo + static_cast<std::size_t>(config.batch));
      std::vector<Mat> xs;
      Mat target;
      assemble(train_starts, lo, hi, true, rng, xs, target);
      const Mat pred = model.net->forward(xs);
      const Mat err = pred - target;
      const double denom = static_cast<double>(err.size());
      ep_loss += err.squaredNorm() / denom;
      ++n_batches;
      nn::zero_grads(params);
      model.net->backward(2.0 * err / denom);
      opt.step(params);
    }
    result.train_loss.push_back(ep_loss / static_cast<double>(std::max<std::size_t>(1, n_batches)));

    if (!val_starts.empty()) {
      std::vector<Mat> xs;
      Mat target;
      std::mt19937_64 tmp(0);
      assemble(val_starts, 0, val_starts.size(), false, tmp, xs, target);
      const Mat pred = model.net->forward(xs);
      result.val_loss.push_back((pred - target).squaredNorm() /
                                static_cast<double>(pred.size()));
    }
  }
  result.model = std::move(model);
  return result;
}

Mat rollout_model(const SurrogateModel& model, const Frame& frame, Index t0_row,
                  int horizon) {
  const SurrogateSpec& spec = model.spec;
  const Index n = spec.lookback;
  Mat window = make_window(frame, spec, t0_row);
  Mat result(horizon, static_cast<Index>(spec.outputs.size()));
  for (int h = 0; h < horizon; ++h) {
    const Vec pred = model.predict(window);
    result.row(h) = pred.transpose();
    if (h + 1 == horizon) break;
    const Index next_row = t0_row + h + 1;
    // shift window up, fill the new last row
    window.topRows(n - 1) = window.bottomRows(n - 1);
    for (std::size_t j = 0; j < spec.inputs.size(); ++j) {
      const std::string& name = spec.inputs[j];
      double v;
      auto out_it = std::find(spec.outputs.begin(), spec.outputs.end(), name);
      if (out_it != spec.outputs.end()) {
        v = pred(static_cast<Index>(out_it - spec.outputs.begin()));
      } else if (name == "t_sin") {
        v = encode_time(frame.minute_of_day(next_row)).t_sin;
      } else if (name == "t_cos") {
        v = encode_time(frame.minute_of_day(next_row)).t_cos;
      } else {
        const Index shift = spec.is_control(name) ? 1 : 0;
        v = frame.values(next_row + shift, frame.col(name));
      }
      window(n - 1, static_cast<Index>(j)) = v;
    }
  }
  return result;
}

Mat predict_multistep(const SurrogateModel& weather_model,
                      const SurrogateModel& room_model, const Frame& frame,
                      Index t0_row, const std::vector<double>& controls) {
  const SurrogateSpec& rs = room_model.spec;
  const SurrogateSpec& ws = weather_model.spec;
  const Index n = rs.lookback;
  const int horizon = static_cast<int>(controls.size());
  if (horizon < 1) throw std::invalid_argument("predict_multistep: empty controls");

  // Buffer in room-model input order; valve column already holds u_{t+1}.
  Mat window = make_window(frame, rs, t0_row);
  const int jo = rs.input_index("outside_temp");
  const int ji = rs.input_index("irradiance");
  const int jr = rs.input_index("room_temp");
  const int jhi = rs.input_index("water_in");
  const int jho = rs.input_index("water_out");
  const int jsin = rs.input_index("t_sin");
  const int jcos = rs.input_index("t_cos");
  const int ju = rs.input_index("valve");
  window(n - 1, ju) = controls[0];

  const double h_in_const = window(n - 1, jhi);
  const double h_out_const = window(n - 1, jho);

  Mat result(horizon, 5);
  for (int h = 0; h < horizon; ++h) {
    // weather window is a column subset of the room buffer
    Mat wwin(n, static_cast<Index>(ws.inputs.size()));
    for (std::size_t j = 0; j < ws.inputs.size(); ++j)
      wwin.col(static_cast<Index>(j)) = window.col(rs.input_index(ws.inputs[j]));
    const Vec wpred = weather_model.predict(wwin);
    const Vec rpred = room_model.predict(window);

    result(h, 0) = wpred(0);
    result(h, 1) = wpred(1);
    result(h, 2) = rpred(0);
    result(h, 3) = h_in_const;
    result(h, 4) = h_out_const;
    if (h + 1 == horizon) break;

    const TimeEncoding te = encode_time(frame.minute_of_day(t0_row + h + 1));
    window.topRows(n - 1) = window.bottomRows(n - 1);
    window(n - 1, jo) = wpred(0);
    window(n - 1, ji) = wpred(1);
    window(n - 1, jr) = rpred(0);
    window(n - 1, jhi) = h_in_const;
    window(n - 1, jho) = h_out_const;
    window(n - 1, jsin) = te.t_sin;
    window(n - 1, jcos) = te.t_cos;
    window(n - 1, ju) = controls[static_cast<std::size_t>(h + 1)];
  }
  return result;
}

double multistep_mse(const SurrogateModel& model, const Frame& frame,
                     const std::vector<Index>& starts, int horizon) {
  const SurrogateSpec& spec = model.spec;
  double acc = 0.0;
  long count = 0;
  for (Index t0 : starts) {
    if (t0 + horizon + 1 >= frame.rows()) continue;
    const Mat traj = rollout_model(model, frame, t0, horizon);
    bool ok = true;
    for (int h = 0; h < horizon && ok; ++h)
      for (std::size_t o = 0; o < spec.outputs.size() && ok; ++o)
        if (std::isnan(frame.values(t0 + h + 1, frame.col(spec.outputs[o])))) ok = false;
    if (!ok) continue;
    for (int h = 0; h < horizon; ++h) {
      for (std::size_t o = 0; o < spec.outputs.size(); ++o) {
        const int j = spec.input_index(spec.outputs[o]);
        const double sd = model.stats[static_cast<std::size_t>(j)].std;
        const double err =
            (traj(h, static_cast<Index>(o)) -
             frame.values(t0 + h + 1, frame.col(spec.outputs[o]))) / sd;
        acc += err * err;
        ++count;
      }
    }
  }
  return count > 0 ? acc / static_cast<double>(count)
                   : std::numeric_limits<double>::infinity();
}

HyperResult hyper_search(const HyperSpace& space, int budget,
                         const SurrogateSpec& base_spec,
                         const TrainConfig& base_config, const Frame& frame,
                         std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("hyper_search: budget < 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto pick = [&](const auto& v) { return v[static_cast<std::size_t>(uni(rng) * static_cast<double>(v.size())) % v.size()]; };

  HyperResult result;
  for (int trial = 0; trial < budget; ++trial) {
    SurrogateSpec spec = base_spec;
    spec.n_layers = pick(space.n_layers);
    spec.units = pick(space.units);
    spec.cell = pick(space.cells);
    spec.sigma_input = space.sigma_lo + (space.sigma_hi - space.sigma_lo) * uni(rng);
    TrainConfig cfg = base_config;
    cfg.lr = std::pow(10.0, space.lr_log10_lo +
                                (space.lr_log10_hi - space.lr_log10_lo) * uni(rng));
    cfg.seed = seed + static_cast<std::uint64_t>(trial) + 1;

    TrainResult tr = train_surrogate(spec, frame, cfg);
    const std::vector<Index> starts = valid_window_starts(frame, spec);
    const std::size_t n_train =
        static_cast<std::size_t>(cfg.train_frac * static_cast<double>(starts.size()));
    const std::size_t n_val =
        static_cast<std::size_t>(cfg.val_frac * static_cast<double>(starts.size()));
    std::vector<Index> val_starts;
    for (std::size_t k = n_train; k < std::min(starts.size(), n_train + n_val); k += 24)
      val_starts.push_back(starts[k]);
    const double obj = multistep_mse(tr.model, frame, val_starts, 24);
    result.log.push_back({spec, cfg, obj});
  }
  result.best = *std::min_element(
      result.log.begin(), result.log.end(),
      [](const HyperTrial& a, const HyperTrial& b) { return a.objective < b.objective; });
  return result;
}

ArDisturbance fit_ar(std::span<const double> residuals) {
  const std::size_t n = residuals.size();
  if (n < 2) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : residuals) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = residuals[i] - mean;
    var += d * d;
    if (i + 1 < n) cov += d * (residuals[i + 1] - mean);
  }
  var /= static_cast<double>(n);
  cov /= static_cast<double>(n - 1);
  if (var <= 0.0) return {0.0, 0.0};
  double phi = std::clamp(cov / var, -0.999, 0.999);
  const double sigma = std::sqrt(std::max(0.0, (1.0 - phi * phi) * var));
  return {phi, sigma};
}

std::vector<double> one_step_residuals(const SurrogateModel& model,
                                       const Frame& frame,
                                       const std::vector<Index>& starts) {
  const SurrogateSpec& spec = model.spec;
  const Index n = spec.lookback;
  const int c = frame.col(spec.outputs[0]);
  std::vector<double> res;
  res.reserve(starts.size());
  for (Index i : starts) {
    const Mat w = make_window(frame, spec, i + n - 1);
    const Vec pred = model.predict(w);
    res.push_back(frame.values(i + n, c) - pred(0));
  }
  return res;
}

}  // namespace bcl
