#include "bcl/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bcl {

using nlohmann::json;

// JSON adapters for the configuration structs. Kept here so the core library
// stays serialization-free.
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RcRoomParams, c_room, c_wall, r_room_wall,
                                   r_wall_out, heat_gain, solar_aperture,
                                   outflow_kappa)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(WeatherGenParams, temp_mean, temp_amplitude,
                                   ar_coeff, ar_sigma, irr_amplitude,
                                   daylight_hours, irr_noise_sigma)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BatteryCoefficients, alpha0, alpha1, alpha2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PlantParams, room, weather, battery_true,
                                   battery_noise_sigma, h_in_base, h_in_slope,
                                   artifact_rate)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SafetyLimits, s_min, s_max, p_min, p_max,
                                   s_des, t_des)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PriceSchedule, high, low, high_start_minute,
                                   high_end_minute)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EvSchedule, departure_minute, arrival_minute,
                                   s_des, s_arrival)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RewardConfig, alpha, alpha_bat)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ComfortBounds, r_min, r_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrainConfig, lr, epochs, batch, seed,
                                   train_frac, val_frac)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OuParams, theta, sigma, mu, dt)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DdpgConfig, gamma, tau, actor_lr, critic_lr,
                                   batch, replay_capacity, total_steps,
                                   warmup_steps, hidden, ou, reward_scale, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ClipBounds, lo, hi)

}  // namespace bcl

namespace bcl::io {

namespace {

std::string format_time(std::int64_t unix_seconds) {
  std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::int64_t parse_time(const std::string& s) {
  std::tm tm{};
  if (sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &tm.tm_year, &tm.tm_mon,
             &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec) != 6)
    throw std::runtime_error("bad timestamp: " + s);
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return static_cast<std::int64_t>(timegm(&tm));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::uint64_t fnv1a(const char* data, std::size_t n,
                    std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

// Named float64 segments appended to a single blob file.
struct BlobWriter {
  std::vector<char> bytes;
  json segments = json::array();

  void add(const std::string& name, const Eigen::MatrixXd& m) {
    json seg;
    seg["name"] = name;
    seg["rows"] = m.rows();
    seg["cols"] = m.cols();
    seg["offset"] = bytes.size();
    segments.push_back(seg);
    const char* p = reinterpret_cast<const char*>(m.data());
    bytes.insert(bytes.end(), p, p + sizeof(double) * m.size());
  }
};

struct BlobReader {
  std::vector<char> bytes;
  const json& segments;

  Eigen::MatrixXd get(const std::string& name) const {
    for (const auto& seg : segments) {
      if (seg.at("name") != name) continue;
      const Eigen::Index rows = seg.at("rows"), cols = seg.at("cols");
      const std::size_t offset = seg.at("offset");
      if (offset + sizeof(double) * rows * cols > bytes.size())
        throw std::runtime_error("weight blob truncated at " + name);
      Eigen::MatrixXd m(rows, cols);
      std::memcpy(m.data(), bytes.data() + offset,
                  sizeof(double) * static_cast<std::size_t>(m.size()));
      return m;
    }
    throw std::runtime_error("missing weight segment " + name);
  }
};

void write_bundle(const std::filesystem::path& base, const json& manifest,
                  const std::vector<char>& blob) {
  auto out = open_out(base.string() + ".json");
  out << manifest.dump(2) << "\n";
  std::ofstream bin(base.string() + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + base.string() + ".bin");
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

std::pair<json, std::vector<char>> read_bundle(const std::filesystem::path& base) {
  std::ifstream in(base.string() + ".json");
  if (!in) throw std::runtime_error("cannot read " + base.string() + ".json");
  json manifest = json::parse(in);
  std::ifstream bin(base.string() + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + base.string() + ".bin");
  std::vector<char> bytes((std::istreambuf_iterator<char>(bin)),
                          std::istreambuf_iterator<char>());
  return {std::move(manifest), std::move(bytes)};
}

void load_params(const std::vector<nn::Param*>& params, const BlobReader& blob) {
  for (nn::Param* p : params) {
    Eigen::MatrixXd v = blob.get(p->name);
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols())
      throw std::runtime_error("shape mismatch for " + p->name);
    p->value = std::move(v);
  }
}

json spec_to_json(const SurrogateSpec& spec) {
  json j;
  j["lookback"] = spec.lookback;
  j["n_layers"] = spec.n_layers;
  j["units"] = spec.units;
  j["cell"] = spec.cell == nn::CellKind::kLstm ? "lstm" : "gru";
  j["inputs"] = spec.inputs;
  j["control_inputs"] = spec.control_inputs;
  j["outputs"] = spec.outputs;
  j["sigma_input"] = spec.sigma_input;
  j["output_clip"] = spec.output_clip;
  return j;
}

SurrogateSpec spec_from_json(const json& j) {
  SurrogateSpec spec;
  spec.lookback = j.at("lookback");
  spec.n_layers = j.at("n_layers");
  spec.units = j.at("units");
  const std::string cell = j.at("cell");
  if (cell != "lstm" && cell != "gru")
    throw std::runtime_error("unknown cell kind " + cell);
  spec.cell = cell == "lstm" ? nn::CellKind::kLstm : nn::CellKind::kGru;
  spec.inputs = j.at("inputs").get<std::vector<std::string>>();
  spec.control_inputs = j.at("control_inputs").get<std::vector<std::string>>();
  spec.outputs = j.at("outputs").get<std::vector<std::string>>();
  spec.sigma_input = j.at("sigma_input");
  spec.output_clip = j.at("output_clip").get<std::vector<ClipBounds>>();
  return spec;
}

// Rejects keys absent from the default-config template, reporting the path.
void check_keys(const json& value, const json& tmpl, const std::string& path) {
  if (!value.is_object()) return;
  if (!tmpl.is_object())
    throw std::runtime_error("invalid config key " + path);
  for (const auto& [key, sub] : value.items()) {
    if (!tmpl.contains(key))
      throw std::runtime_error("invalid config key " +
                               (path.empty() ? key : path + "." + key));
    check_keys(sub, tmpl.at(key), path.empty() ? key : path + "." + key);
  }
}

json config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["plant"] = c.plant;
  j["history_days"] = c.history_days;
  j["limits"] = c.limits;
  j["prices"] = c.prices;
  j["ev"] = c.ev;
  j["reward"] = c.reward;
  j["comfort"] = c.comfort;
  j["heating_season_only"] = c.heating_season_only;
  j["room_train"] = c.room_train;
  j["weather_train"] = c.weather_train;
  j["tune_budget"] = c.tune_budget;
  j["agent"] = c.agent;
  j["eval_episodes"] = c.eval_episodes;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  check_keys(j, config_to_json(c), "");
  json merged = config_to_json(c);
  merged.merge_patch(j);
  c.seed = merged.at("seed");
  c.out_dir = merged.at("out_dir");
  c.plant = merged.at("plant");
  c.history_days = merged.at("history_days");
  c.limits = merged.at("limits");
  c.prices = merged.at("prices");
  c.ev = merged.at("ev");
  c.reward = merged.at("reward");
  c.comfort = merged.at("comfort");
  c.heating_season_only = merged.at("heating_season_only");
  c.room_train = merged.at("room_train");
  c.weather_train = merged.at("weather_train");
  c.tune_budget = merged.at("tune_budget");
  c.agent = merged.at("agent");
  c.eval_episodes = merged.at("eval_episodes");
  return c;
}

}  // namespace

void write_timeseries_csv(const std::filesystem::path& path,
                          const TimeSeries& series, const std::string& comment) {
  auto out = open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "timestamp," << series.name << "\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_time(series.time_at(i)) << ",";
    if (!TimeSeries::is_gap(series.values[i]))
      out << format_double(series.values[i]);
    out << "\n";
  }
}

TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  TimeSeries s;
  std::string line;
  std::vector<std::int64_t> times;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("malformed CSV row: " + line);
    if (!have_header) {
      if (line.substr(0, comma) != "timestamp")
        throw std::runtime_error("missing CSV header in " + path.string());
      s.name = line.substr(comma + 1);
      have_header = true;
      continue;
    }
    times.push_back(parse_time(line.substr(0, comma)));
    const std::string cell = line.substr(comma + 1);
    s.values.push_back(cell.empty() ? TimeSeries::gap() : std::stod(cell));
  }
  if (times.empty()) throw std::runtime_error("empty CSV " + path.string());
  s.t0 = times.front();
  if (times.size() > 1)
    s.dt_minutes = static_cast<int>((times[1] - times[0]) / 60);
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] != s.time_at(i))
      throw std::runtime_error("irregular timestamp grid in " + path.string());
  return s;
}

void write_frame_csv(const std::filesystem::path& path, const Frame& frame,
                     const std::string& comment) {
  auto out = open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "timestamp";
  for (const auto& n : frame.names) out << "," << n;
  out << "\n";
  for (Eigen::Index r = 0; r < frame.rows(); ++r) {
    out << format_time(frame.t0 + r * frame.dt_minutes * 60);
    for (Eigen::Index c = 0; c < frame.values.cols(); ++c) {
      out << ",";
      if (!std::isnan(frame.values(r, c))) out << format_double(frame.values(r, c));
    }
    out << "\n";
  }
}

void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& columns,
                     const Eigen::MatrixXd& rows, const std::string& comment) {
  auto out = open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << (c ? "," : "") << columns[c];
  out << "\n";
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
      out << (c ? "," : "") << format_double(rows(r, c));
    out << "\n";
  }
}

void save_surrogate(const std::filesystem::path& base,
                    const SurrogateModel& model) {
  json manifest;
  manifest["format_version"] = 1;
  manifest["kind"] = "surrogate";
  manifest["spec"] = spec_to_json(model.spec);
  manifest["seed"] = model.seed;
  json stats = json::array();
  for (const auto& st : model.stats)
    stats.push_back({{"mean", st.mean}, {"std", st.std}});
  manifest["stats"] = stats;

  BlobWriter blob;
  for (nn::Param* p : model.net->params()) blob.add(p->name, p->value);
  manifest["weights"] = blob.segments;
  write_bundle(base, manifest, blob.bytes);
}

SurrogateModel load_surrogate(const std::filesystem::path& base) {
  auto [manifest, bytes] = read_bundle(base);
  if (manifest.at("kind") != "surrogate")
    throw std::runtime_error("not a surrogate bundle: " + base.string());
  SurrogateModel model;
  model.spec = spec_from_json(manifest.at("spec"));
  model.seed = manifest.at("seed");
  for (const auto& st : manifest.at("stats"))
    model.stats.push_back({st.at("mean"), st.at("std")});
  if (model.stats.size() != model.spec.inputs.size())
    throw std::runtime_error("stats/inputs mismatch in " + base.string());
  model.net = std::make_shared<nn::RecurrentNet>(
      model.spec.cell, static_cast<int>(model.spec.inputs.size()),
      static_cast<int>(model.spec.outputs.size()), model.spec.n_layers,
      model.spec.units, model.seed);
  BlobReader blob{std::move(bytes), manifest.at("weights")};
  load_params(model.net->params(), blob);
  return model;
}

void save_policy(const std::filesystem::path& base, const PolicyArtifact& policy,
                 const std::vector<int>& hidden) {
  json manifest;
  manifest["format_version"] = 1;
  manifest["kind"] = "policy";
  manifest["env_id"] = policy.env_id;
  manifest["seed"] = policy.seed;
  manifest["obs_dim"] = policy.obs_lo.size();
  manifest["action_dim"] = policy.action_lo.size();
  manifest["hidden"] = hidden;
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  manifest["obs_lo"] = vec(policy.obs_lo);
  manifest["obs_hi"] = vec(policy.obs_hi);
  manifest["action_lo"] = vec(policy.action_lo);
  manifest["action_hi"] = vec(policy.action_hi);

  BlobWriter blob;
  for (nn::Param* p : policy.actor->params()) blob.add(p->name, p->value);
  manifest["weights"] = blob.segments;
  write_bundle(base, manifest, blob.bytes);
}

PolicyArtifact load_policy(const std::filesystem::path& base) {
  auto [manifest, bytes] = read_bundle(base);
  if (manifest.at("kind") != "policy")
    throw std::runtime_error("not a policy bundle: " + base.string());
  PolicyArtifact policy;
  policy.env_id = manifest.at("env_id");
  policy.seed = manifest.at("seed");
  auto vec = [&](const char* key) {
    const auto xs = manifest.at(key).get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(xs.data(),
                                             static_cast<Eigen::Index>(xs.size()))
        .eval();
  };
  policy.obs_lo = vec("obs_lo");
  policy.obs_hi = vec("obs_hi");
  policy.action_lo = vec("action_lo");
  policy.action_hi = vec("action_hi");
  std::mt19937_64 rng(policy.seed);
  policy.actor = std::make_shared<nn::Mlp>(
      "actor", manifest.at("obs_dim").get<int>(),
      manifest.at("hidden").get<std::vector<int>>(),
      manifest.at("action_dim").get<int>(), rng);
  BlobReader blob{std::move(bytes), manifest.at("weights")};
  load_params(policy.actor->params(), blob);
  return policy;
}

RunConfig::RunConfig() {
  room_train.lr = 1.544e-5;
  room_train.epochs = 10;
  weather_train.lr = 6.163e-5;
  weather_train.epochs = 80;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

RunConfig config_from_json_text(const std::string& text) {
  return config_from_json(json::parse(text));
}

std::string config_to_json_text(const RunConfig& config) {
  return config_to_json(config).dump(2);
}

std::string config_hash(const RunConfig& config) {
  const std::string dump = config_to_json(config).dump();
  return hex64(fnv1a(dump.data(), dump.size()));
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  return hex64(h);
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& config,
                    const std::vector<std::filesystem::path>& artifacts) {
  json manifest;
  manifest["config_hash"] = config_hash(config);
  manifest["seed"] = config.seed;
  json files = json::array();
  for (const auto& p : artifacts)
    files.push_back({{"path", p.filename().string()},
                     {"checksum", file_checksum(p)}});
  manifest["artifacts"] = files;
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
}

}  // namespace bcl::io
