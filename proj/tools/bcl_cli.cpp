// Pipeline driver: synthetic data generation, preprocessing, model fitting,
// agent training, and evaluation, all seed-deterministic.

#include <array>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "bcl/agents.hpp"
#include "bcl/envs.hpp"
#include "bcl/eval.hpp"
#include "bcl/io.hpp"
#include "bcl/plant.hpp"
#include "bcl/surrogate.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSignals[] = {"outside_temp", "irradiance", "room_temp",
                                    "water_in",     "water_out",  "valve",
                                    "soc",          "power"};

struct Ctx {
  bcl::io::RunConfig cfg;
  fs::path run_dir;
  std::string stamp;
};

Ctx make_ctx(const std::string& config_path, long long seed_override,
             const std::string& out_override) {
  Ctx ctx;
  std::string path = config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("BCL_CONFIG")) path = env;
  }
  if (!path.empty()) ctx.cfg = bcl::io::load_config(path);
  if (seed_override >= 0)
    ctx.cfg.seed = static_cast<std::uint64_t>(seed_override);
  if (!out_override.empty()) ctx.cfg.out_dir = out_override;
  // run stamp derives from config hash and seed only, never the clock
  ctx.stamp = bcl::io::config_hash(ctx.cfg) + "-" + std::to_string(ctx.cfg.seed);
  ctx.run_dir = fs::path(ctx.cfg.out_dir) / ctx.stamp;
  return ctx;
}

void write_trace(const fs::path& dir, const bcl::TruePlantTrace& trace,
                 const std::string& comment) {
  const bcl::TimeSeries* all[] = {&trace.outside_temp, &trace.irradiance,
                                  &trace.room_temp,    &trace.water_in,
                                  &trace.water_out,    &trace.valve,
                                  &trace.soc,          &trace.power};
  for (const auto* s : all)
    bcl::io::write_timeseries_csv(dir / (s->name + ".csv"), *s, comment);
}

bcl::TruePlantTrace read_trace(const fs::path& dir) {
  auto read = [&](const char* name) {
    return bcl::io::read_timeseries_csv(dir / (std::string(name) + ".csv"));
  };
  bcl::TruePlantTrace t;
  t.outside_temp = read("outside_temp");
  t.irradiance = read("irradiance");
  t.room_temp = read("room_temp");
  t.water_in = read("water_in");
  t.water_out = read("water_out");
  t.valve = read("valve");
  t.soc = read("soc");
  t.power = read("power");
  return t;
}

bcl::ArDisturbance room_disturbance(const bcl::SurrogateModel& room,
                                    const bcl::Frame& frame) {
  auto starts = bcl::valid_window_starts(frame, room.spec);
  // residuals from the chronological validation slice
  const std::size_t lo = starts.size() * 6 / 10, hi = starts.size() * 8 / 10;
  std::vector<Eigen::Index> val(starts.begin() + lo, starts.begin() + hi);
  if (val.empty()) return {0.0, 0.0};
  return bcl::fit_ar(bcl::one_step_residuals(room, frame, val));
}

struct EnvBundle {
  std::unique_ptr<bcl::Env> env;
  int action_dim = 1;
};

bcl::BatteryCoefficients battery_coeffs(const Ctx& ctx) {
  const fs::path fit = ctx.run_dir / "battery_fit.json";
  if (fs::exists(fit)) {
    std::ifstream in(fit);
    json j = json::parse(in);
    return {j.at("alpha0"), j.at("alpha1"), j.at("alpha2")};
  }
  return ctx.cfg.plant.battery_true;
}

EnvBundle make_env(const Ctx& ctx, const std::string& which,
                   const fs::path& data_dir, const fs::path& models_dir) {
  EnvBundle b;
  if (which == "battery") {
    bcl::BatteryEnvConfig bc;
    bc.coeffs = battery_coeffs(ctx);
    bc.limits = ctx.cfg.limits;
    bc.use_pricing = true;
    bc.prices = ctx.cfg.prices;
    b.env = std::make_unique<bcl::BatteryEnv>(bc);
    b.action_dim = 1;
    return b;
  }
  auto weather = bcl::io::load_surrogate(models_dir / "weather");
  auto room = bcl::io::load_surrogate(models_dir / "room");
  auto frame = std::make_shared<bcl::Frame>(
      bcl::frame_from_trace(read_trace(data_dir)));
  const auto dist = room_disturbance(room, *frame);
  bcl::RoomEnvConfig rc;
  rc.comfort = ctx.cfg.comfort;
  rc.alpha = ctx.cfg.reward.alpha;
  rc.heating_season_only = ctx.cfg.heating_season_only;
  if (which == "room") {
    b.env = std::make_unique<bcl::RoomEnv>(std::move(weather), std::move(room),
                                           frame, dist, rc);
    b.action_dim = 1;
  } else if (which == "joint") {
    bcl::JointEnvConfig jc;
    jc.room = rc;
    jc.coeffs = battery_coeffs(ctx);
    jc.limits = ctx.cfg.limits;
    jc.prices = ctx.cfg.prices;
    jc.ev = ctx.cfg.ev;
    jc.reward = ctx.cfg.reward;
    b.env = std::make_unique<bcl::JointEnv>(std::move(weather), std::move(room),
                                            frame, dist, jc);
    b.action_dim = 2;
  } else {
    throw std::runtime_error("unknown env " + which +
                             " (expected room, battery, or joint)");
  }
  return b;
}

json metrics_json(const bcl::EpisodeMetrics& m) {
  return {{"seed", m.seed},
          {"total_reward", m.total_reward},
          {"total_energy_room", m.total_energy_room},
          {"total_energy_bat", m.total_energy_bat},
          {"mean_comfort_violation", m.mean_comfort_violation},
          {"max_comfort_violation", m.max_comfort_violation},
          {"total_cost", m.total_cost},
          {"final_soc", m.final_soc},
          {"infeasible_steps", m.infeasible_steps}};
}

json summary_json(const bcl::MetricsSummary& s) {
  auto f = [](const bcl::FieldSummary& x) {
    return json{{"mean", x.mean}, {"std", x.std}, {"min", x.min}, {"max", x.max}};
  };
  return {{"n_episodes", s.n_episodes},
          {"total_reward", f(s.total_reward)},
          {"total_energy_room", f(s.total_energy_room)},
          {"total_energy_bat", f(s.total_energy_bat)},
          {"mean_comfort_violation", f(s.mean_comfort_violation)},
          {"max_comfort_violation", f(s.max_comfort_violation)},
          {"total_cost", f(s.total_cost)},
          {"final_soc", f(s.final_soc)},
          {"infeasible_steps", f(s.infeasible_steps)}};
}

const std::vector<std::string> kBaselineNames = {
    "valves-open",          "valves-closed",
    "rule-based",           "valves-open-charge",
    "valves-closed-discharge", "rule-based-charge",
    "charge-immediately"};

bcl::Actor resolve_agent(const Ctx& ctx, const std::string& name,
                         const EnvBundle& bundle, const std::string& which,
                         std::vector<bcl::PolicyArtifact>& keep) {
  if (auto kind = bcl::baseline_from_name(name)) {
    bcl::BaselineConfig bc;
    bc.setpoint = ctx.cfg.comfort.r_min;
    bc.p_max = ctx.cfg.limits.p_max;
    bc.full_soc = ctx.cfg.limits.s_max;
    bc.s_des = ctx.cfg.limits.s_des;
    if (which == "battery") {
      bc.room_temp_index = -1;
      bc.soc_index = 0;
    } else if (which == "room") {
      bc.soc_index = -1;
    }
    return bcl::make_baseline_actor(*kind, bc, bundle.action_dim);
  }
  if (name.rfind("ddpg:", 0) == 0) {
    keep.push_back(bcl::io::load_policy(name.substr(5)));
    const bcl::PolicyArtifact& p = keep.back();
    return [&p](const Eigen::VectorXd& obs) { return p.act(obs); };
  }
  std::string valid = "ddpg:<policy-path>";
  for (const auto& n : kBaselineNames) valid += ", " + n;
  throw std::runtime_error("unknown agent \"" + name + "\"; valid agents: " +
                           valid);
}

void write_loss_csv(const fs::path& path, const bcl::TrainResult& result,
                    const std::string& comment) {
  Eigen::MatrixXd rows(result.train_loss.size(), 3);
  for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
    rows(static_cast<Eigen::Index>(e), 0) = static_cast<double>(e);
    rows(static_cast<Eigen::Index>(e), 1) = result.train_loss[e];
    rows(static_cast<Eigen::Index>(e), 2) = result.val_loss[e];
  }
  bcl::io::write_table_csv(path, {"epoch", "train_loss", "val_loss"}, rows,
                           comment);
}

// Per-horizon MAE and max abs error of the model's first output over
// validation start rows.
void write_horizon_csv(const fs::path& path, const bcl::SurrogateModel& model,
                       const bcl::Frame& frame, int horizon,
                       const std::string& comment) {
  auto starts = bcl::valid_window_starts(frame, model.spec);
  const std::size_t lo = starts.size() * 6 / 10, hi = starts.size() * 8 / 10;
  const int out0 = model.spec.input_index(model.spec.outputs[0]);
  Eigen::VectorXd mae = Eigen::VectorXd::Zero(horizon);
  Eigen::VectorXd maxe = Eigen::VectorXd::Zero(horizon);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(horizon);
  for (std::size_t si = lo; si < hi; si += 24) {
    const Eigen::Index t0 = starts[si] + model.spec.lookback - 1;
    if (t0 + horizon + 1 >= frame.rows()) continue;
    const Eigen::MatrixXd traj = bcl::rollout_model(model, frame, t0, horizon);
    for (int h = 0; h < horizon; ++h) {
      const double truth = frame.values(t0 + 1 + h, out0);
      if (std::isnan(truth)) continue;
      const double err = std::abs(traj(h, 0) - truth);
      mae(h) += err;
      maxe(h) = std::max(maxe(h), err);
      count(h) += 1.0;
    }
  }
  Eigen::MatrixXd rows(horizon, 3);
  for (int h = 0; h < horizon; ++h) {
    rows(h, 0) = h + 1;
    rows(h, 1) = count(h) > 0 ? mae(h) / count(h) : 0.0;
    rows(h, 2) = maxe(h);
  }
  bcl::io::write_table_csv(path, {"steps", "mae", "max_abs_error"}, rows,
                           comment);
}

int cmd_gen_data(const Ctx& ctx) {
  const fs::path dir = ctx.run_dir / "data";
  const auto trace =
      bcl::generate_history(ctx.cfg.plant, ctx.cfg.history_days, ctx.cfg.seed);
  write_trace(dir, trace, "config " + bcl::io::config_hash(ctx.cfg));
  std::vector<fs::path> artifacts;
  for (const char* s : kSignals) artifacts.push_back(dir / (std::string(s) + ".csv"));
  bcl::io::write_manifest(dir, ctx.cfg, artifacts);
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

int cmd_preprocess(const Ctx& ctx, const std::string& in_dir,
                   const std::string& out_dir) {
  const fs::path in = in_dir.empty() ? ctx.run_dir / "data" : fs::path(in_dir);
  const fs::path out = out_dir.empty() ? ctx.run_dir / "clean" : fs::path(out_dir);
  using Pipeline = bcl::TimeSeries (*)(const bcl::TimeSeries&);
  const std::map<std::string, Pipeline> pipelines = {
      {"room_temp", bcl::preprocess_room_temp},
      {"valve", bcl::preprocess_valve},
      {"water_in", bcl::preprocess_water_temp},
      {"water_out", bcl::preprocess_water_temp},
      {"outside_temp", bcl::preprocess_outside_temp},
      {"irradiance", bcl::preprocess_irradiance},
      {"soc", bcl::preprocess_soc},
      {"power", bcl::preprocess_active_power}};
  json report;
  std::vector<fs::path> artifacts;
  for (const char* name : kSignals) {
    const auto series =
        bcl::io::read_timeseries_csv(in / (std::string(name) + ".csv"));
    const auto cleaned = pipelines.at(name)(series);
    const fs::path path = out / (std::string(name) + ".csv");
    bcl::io::write_timeseries_csv(path, cleaned,
                                  "config " + bcl::io::config_hash(ctx.cfg));
    report[name] = {{"gaps_before", series.gap_count()},
                    {"gaps_after", cleaned.gap_count()},
                    {"samples", cleaned.size()}};
    artifacts.push_back(path);
  }
  {
    std::ofstream gaps(out / "gap_report.json");
    gaps << report.dump(2) << "\n";
  }
  bcl::io::write_manifest(out, ctx.cfg, artifacts);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_fit_battery(const Ctx& ctx, const std::string& data_dir) {
  const fs::path in = data_dir.empty() ? ctx.run_dir / "data" : fs::path(data_dir);
  const auto soc = bcl::io::read_timeseries_csv(in / "soc.csv");
  const auto power = bcl::io::read_timeseries_csv(in / "power.csv");
  std::vector<std::pair<double, double>> samples;
  for (std::size_t t = 0; t + 1 < soc.size(); ++t) {
    if (bcl::TimeSeries::is_gap(soc.values[t]) ||
        bcl::TimeSeries::is_gap(soc.values[t + 1]) ||
        bcl::TimeSeries::is_gap(power.values[t]))
      continue;
    samples.emplace_back(power.values[t], soc.values[t + 1] - soc.values[t]);
  }
  const auto coeffs = bcl::fit_coefficients(samples);

  double ss_res = 0.0, ss_tot = 0.0, mean_d = 0.0;
  for (const auto& [p, d] : samples) mean_d += d;
  mean_d /= static_cast<double>(samples.size());
  Eigen::MatrixXd residuals(samples.size(), 3);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [p, d] = samples[i];
    const double fit = bcl::delta_soc(coeffs, p);
    ss_res += (d - fit) * (d - fit);
    ss_tot += (d - mean_d) * (d - mean_d);
    residuals(static_cast<Eigen::Index>(i), 0) = p;
    residuals(static_cast<Eigen::Index>(i), 1) = d;
    residuals(static_cast<Eigen::Index>(i), 2) = d - fit;
  }
  const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  fs::create_directories(ctx.run_dir);
  json record = {{"alpha0", coeffs.alpha0},
                 {"alpha1", coeffs.alpha1},
                 {"alpha2", coeffs.alpha2},
                 {"r2", r2},
                 {"samples", samples.size()}};
  {
    std::ofstream out(ctx.run_dir / "battery_fit.json");
    out << record.dump(2) << "\n";
  }
  bcl::io::write_table_csv(ctx.run_dir / "battery_residuals.csv",
                           {"power", "delta_soc", "residual"}, residuals,
                           "config " + bcl::io::config_hash(ctx.cfg));
  std::cout << "alpha0 " << coeffs.alpha0 << " alpha1 " << coeffs.alpha1
            << " alpha2 " << coeffs.alpha2 << " r2 " << r2 << "\n";
  return 0;
}

int cmd_train_surrogate(const Ctx& ctx, const std::string& which,
                        const std::string& data_dir) {
  const fs::path in = data_dir.empty() ? ctx.run_dir / "clean" : fs::path(data_dir);
  const auto frame = bcl::frame_from_trace(read_trace(in));
  bcl::SurrogateSpec spec;
  bcl::TrainConfig train;
  if (which == "room") {
    spec = bcl::room_model_spec();
    train = ctx.cfg.room_train;
  } else if (which == "weather") {
    spec = bcl::weather_model_spec();
    train = ctx.cfg.weather_train;
  } else {
    throw std::runtime_error("unknown model " + which +
                             " (expected weather or room)");
  }
  train.seed = ctx.cfg.seed;
  const auto result = bcl::train_surrogate(spec, frame, train);
  const fs::path dir = ctx.run_dir / "models";
  fs::create_directories(dir);
  bcl::io::save_surrogate(dir / which, result.model);
  const std::string comment = "config " + bcl::io::config_hash(ctx.cfg);
  write_loss_csv(dir / (which + "_loss.csv"), result, comment);
  write_horizon_csv(dir / (which + "_horizon.csv"), result.model, frame, 48,
                    comment);
  std::cout << "final val loss " << result.val_loss.back() << ", wrote "
            << (dir / which).string() << ".{json,bin}\n";
  return 0;
}

int cmd_tune(const Ctx& ctx, const std::string& which,
             const std::string& data_dir, int budget) {
  const fs::path in = data_dir.empty() ? ctx.run_dir / "clean" : fs::path(data_dir);
  const auto frame = bcl::frame_from_trace(read_trace(in));
  const auto base_spec =
      which == "weather" ? bcl::weather_model_spec() : bcl::room_model_spec();
  const auto base_train =
      which == "weather" ? ctx.cfg.weather_train : ctx.cfg.room_train;
  const auto result = bcl::hyper_search(bcl::HyperSpace{}, budget, base_spec,
                                        base_train, frame, ctx.cfg.seed);
  const fs::path dir = ctx.run_dir / "tune";
  fs::create_directories(dir);
  json log = json::array();
  for (const auto& trial : result.log)
    log.push_back({{"n_layers", trial.spec.n_layers},
                   {"units", trial.spec.units},
                   {"cell", trial.spec.cell == bcl::nn::CellKind::kLstm
                                ? "lstm"
                                : "gru"},
                   {"lr", trial.config.lr},
                   {"sigma_input", trial.spec.sigma_input},
                   {"objective", trial.objective}});
  json out = {{"best",
               {{"n_layers", result.best.spec.n_layers},
                {"units", result.best.spec.units},
                {"cell", result.best.spec.cell == bcl::nn::CellKind::kLstm
                             ? "lstm"
                             : "gru"},
                {"lr", result.best.config.lr},
                {"sigma_input", result.best.spec.sigma_input},
                {"objective", result.best.objective}}},
              {"trials", log}};
  std::ofstream f(dir / (which + "_trials.json"));
  f << out.dump(2) << "\n";
  std::cout << "best objective " << result.best.objective << "\n";
  return 0;
}

int cmd_train_agent(const Ctx& ctx, const std::string& which,
                    const std::string& data_dir, const std::string& models_dir) {
  const fs::path data = data_dir.empty() ? ctx.run_dir / "clean" : fs::path(data_dir);
  const fs::path models =
      models_dir.empty() ? ctx.run_dir / "models" : fs::path(models_dir);
  auto bundle = make_env(ctx, which, data, models);
  bcl::DdpgConfig agent_cfg = ctx.cfg.agent;
  agent_cfg.seed = ctx.cfg.seed;
  const auto result = bcl::train_ddpg(*bundle.env, agent_cfg, which);
  const fs::path dir = ctx.run_dir / "agents";
  fs::create_directories(dir);
  bcl::io::save_policy(dir / which, result.policy, agent_cfg.hidden);
  Eigen::MatrixXd curve(result.curve.size(), 3);
  for (std::size_t i = 0; i < result.curve.size(); ++i) {
    curve(static_cast<Eigen::Index>(i), 0) = result.curve[i].step;
    curve(static_cast<Eigen::Index>(i), 1) = result.curve[i].episode_return;
    curve(static_cast<Eigen::Index>(i), 2) = result.curve[i].critic_loss;
  }
  bcl::io::write_table_csv(dir / (which + "_curve.csv"),
                           {"step", "episode_return", "critic_loss"}, curve,
                           "config " + bcl::io::config_hash(ctx.cfg));
  std::cout << "wrote " << (dir / which).string() << ".{json,bin}\n";
  return 0;
}

int cmd_evaluate(const Ctx& ctx, const std::string& which,
                 const std::vector<std::string>& agents, int n_episodes,
                 const std::string& data_dir, const std::string& models_dir) {
  if (agents.empty()) throw std::runtime_error("no agents given");
  const fs::path data = data_dir.empty() ? ctx.run_dir / "clean" : fs::path(data_dir);
  const fs::path models =
      models_dir.empty() ? ctx.run_dir / "models" : fs::path(models_dir);
  auto bundle = make_env(ctx, which, data, models);
  std::vector<bcl::PolicyArtifact> keep;
  std::vector<bcl::AgentResult> results;
  for (const auto& name : agents) {
    const auto actor = resolve_agent(ctx, name, bundle, which, keep);
    bcl::AgentResult r;
    r.name = name;
    r.episodes = bcl::evaluate(actor, *bundle.env, n_episodes, ctx.cfg.seed);
    r.summary = bcl::aggregate(r.episodes);
    results.push_back(std::move(r));
  }
  const auto report = bcl::compare(results, agents.front());

  const fs::path dir = ctx.run_dir / "eval";
  fs::create_directories(dir);
  json j;
  j["env"] = which;
  j["reference"] = report.reference;
  j["seeds"] = report.seeds;
  for (const auto& a : report.agents) {
    json ja;
    ja["summary"] = summary_json(a.summary);
    json eps = json::array();
    for (const auto& e : a.episodes) eps.push_back(metrics_json(e));
    ja["episodes"] = eps;
    j["agents"][a.name] = ja;
  }
  j["energy_savings_percent"] = report.energy_savings_percent;
  j["comfort_savings_percent"] = report.comfort_savings_percent;
  j["cost_savings_percent"] = report.cost_savings_percent;
  {
    std::ofstream out(dir / (which + "_report.json"));
    out << j.dump(2) << "\n";
  }

  // one example episode trace per agent, for time-series plots
  for (const auto& name : agents) {
    const auto actor = resolve_agent(ctx, name, bundle, which, keep);
    Eigen::VectorXd obs = bundle.env->reset(ctx.cfg.seed);
    std::vector<std::array<double, 7>> rows;
    bool done = false;
    int t = 0;
    while (!done) {
      const auto es = bundle.env->step(actor(obs));
      rows.push_back({static_cast<double>(t), es.info.raw_action_room,
                      es.info.safe_action_bat, es.reward, es.info.room_temp,
                      es.info.soc, es.info.price});
      obs = es.next_obs;
      done = es.done;
      ++t;
    }
    Eigen::MatrixXd table(rows.size(), 7);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (int c = 0; c < 7; ++c)
        table(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
    std::string fname = name;
    for (auto& ch : fname)
      if (ch == ':' || ch == '/') ch = '_';
    bcl::io::write_table_csv(
        dir / (which + "_trace_" + fname + ".csv"),
        {"step", "action_room", "action_bat", "reward", "room_temp", "soc",
         "price"},
        table, "config " + bcl::io::config_hash(ctx.cfg));
  }
  std::cout << "wrote " << (dir / (which + "_report.json")).string() << "\n";
  return 0;
}

int cmd_report(const Ctx& ctx, const std::string& results_dir) {
  const fs::path in =
      results_dir.empty() ? ctx.run_dir / "eval" : fs::path(results_dir);
  json consolidated = json::object();
  std::vector<std::string> bar_agents;
  std::vector<std::array<double, 3>> bar_rows;
  for (const auto& entry : fs::directory_iterator(in)) {
    const auto path = entry.path();
    if (path.extension() != ".json" ||
        path.filename().string().find("_report") == std::string::npos)
      continue;
    std::ifstream f(path);
    json j = json::parse(f);
    consolidated[j.at("env").get<std::string>()] = j;
    for (const auto& [name, agent] : j.at("agents").items()) {
      bar_agents.push_back(j.at("env").get<std::string>() + "/" + name);
      const auto& s = agent.at("summary");
      bar_rows.push_back({s.at("total_energy_room").at("mean").get<double>(),
                          s.at("mean_comfort_violation").at("mean").get<double>(),
                          s.at("total_cost").at("mean").get<double>()});
    }
  }
  if (consolidated.empty())
    throw std::runtime_error("no evaluation reports in " + in.string());
  const fs::path dir = ctx.run_dir / "report";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "consolidated.json");
    out << consolidated.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "bars.csv");
    out << "# config " << bcl::io::config_hash(ctx.cfg) << "\n";
    out << "agent,mean_energy,mean_comfort_violation,mean_cost\n";
    for (std::size_t i = 0; i < bar_agents.size(); ++i)
      out << bar_agents[i] << "," << bar_rows[i][0] << "," << bar_rows[i][1]
          << "," << bar_rows[i][2] << "\n";
  }
  std::cout << "wrote " << (dir / "consolidated.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"building control pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir, data_dir, models_dir, which;
  long long seed = -1;
  int n_episodes = -1, budget = -1;
  std::vector<std::string> agents;

  app.add_option("--config", config_path, "config file (or $BCL_CONFIG)");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "override the output directory");

  auto* gen = app.add_subcommand("gen-data", "simulate the synthetic plant");
  auto* pre = app.add_subcommand("preprocess", "clean the raw signals");
  pre->add_option("--in", in_dir, "input data directory");
  pre->add_option("--out-dir", data_dir, "output directory");
  auto* fit = app.add_subcommand("fit-battery", "fit the SoC model");
  fit->add_option("--data", data_dir, "data directory");
  auto* ts = app.add_subcommand("train-surrogate", "train a dynamics model");
  ts->add_option("--model", which, "weather or room")->required();
  ts->add_option("--data", data_dir, "cleaned data directory");
  auto* tune = app.add_subcommand("tune", "hyperparameter search");
  tune->add_option("--model", which, "weather or room")->required();
  tune->add_option("--data", data_dir, "cleaned data directory");
  tune->add_option("--budget", budget, "number of trials");
  auto* ta = app.add_subcommand("train-agent", "train a control policy");
  ta->add_option("--env", which, "room, battery, or joint")->required();
  ta->add_option("--data", data_dir, "cleaned data directory");
  ta->add_option("--models", models_dir, "surrogate bundle directory");
  auto* ev = app.add_subcommand("evaluate", "paired agent evaluation");
  ev->add_option("--env", which, "room, battery, or joint")->required();
  ev->add_option("--agents", agents, "agents; first is the reference")
      ->required();
  ev->add_option("--episodes", n_episodes, "episode count");
  ev->add_option("--data", data_dir, "cleaned data directory");
  ev->add_option("--models", models_dir, "surrogate bundle directory");
  auto* rep = app.add_subcommand("report", "consolidate evaluation outputs");
  rep->add_option("--results", in_dir, "evaluation output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    Ctx ctx = make_ctx(config_path, seed, out_dir);
    if (gen->parsed()) return cmd_gen_data(ctx);
    if (pre->parsed()) return cmd_preprocess(ctx, in_dir, data_dir);
    if (fit->parsed()) return cmd_fit_battery(ctx, data_dir);
    if (ts->parsed()) return cmd_train_surrogate(ctx, which, data_dir);
    if (tune->parsed())
      return cmd_tune(ctx, which, data_dir,
                      budget > 0 ? budget : ctx.cfg.tune_budget);
    if (ta->parsed()) return cmd_train_agent(ctx, which, data_dir, models_dir);
    if (ev->parsed())
      return cmd_evaluate(ctx, which, agents,
                          n_episodes > 0 ? n_episodes : ctx.cfg.eval_episodes,
                          data_dir, models_dir);
    if (rep->parsed()) return cmd_report(ctx, in_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
