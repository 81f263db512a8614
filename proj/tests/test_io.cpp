#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "bcl/io.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bcl_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("timeseries csv round trip") {
  TempDir tmp;
  bcl::TimeSeries s;
  s.name = "room_temp";
  s.t0 = 1700000100;  // not midnight-aligned
  s.dt_minutes = 15;
  s.values = {21.5, bcl::TimeSeries::gap(), 23.25, -4.0};
  const auto path = tmp.path / "x.csv";
  bcl::io::write_timeseries_csv(path, s, "test");
  const auto back = bcl::io::read_timeseries_csv(path);
  CHECK(back.name == s.name);
  CHECK(back.t0 == s.t0);
  CHECK(back.dt_minutes == 15);
  REQUIRE(back.size() == 4);
  CHECK(back.values[0] == 21.5);
  CHECK(bcl::TimeSeries::is_gap(back.values[1]));
  CHECK(back.values[2] == 23.25);
  CHECK(back.values[3] == -4.0);
  SUBCASE("header and gap encoding") {
    const auto text = slurp(path);
    CHECK(text.find("timestamp,room_temp") != std::string::npos);
    CHECK(text.find("2023-11-14T22:15:00Z,21.5") != std::string::npos);
  }
  SUBCASE("missing file throws") {
    CHECK_THROWS_AS(bcl::io::read_timeseries_csv(tmp.path / "nope.csv"),
                    std::runtime_error);
  }
}

TEST_CASE("surrogate bundle round trip") {
  TempDir tmp;
  bcl::PlantParams params;
  const auto frame = bcl::frame_from_trace(bcl::generate_history(params, 7, 1));
  bcl::TrainConfig cfg;
  cfg.epochs = 1;
  const auto model =
      bcl::train_surrogate(bcl::weather_model_spec(), frame, cfg).model;
  bcl::io::save_surrogate(tmp.path / "weather", model);
  const auto back = bcl::io::load_surrogate(tmp.path / "weather");
  CHECK(back.spec.inputs == model.spec.inputs);
  CHECK(back.spec.units == model.spec.units);
  CHECK(back.seed == model.seed);
  REQUIRE(back.stats.size() == model.stats.size());
  for (std::size_t i = 0; i < back.stats.size(); ++i) {
    CHECK(back.stats[i].mean == model.stats[i].mean);
    CHECK(back.stats[i].std == model.stats[i].std);
  }
  // predictions must be bit-identical through the round trip
  const auto w = bcl::make_window(frame, model.spec, 30);
  CHECK(back.predict(w) == model.predict(w));

  SUBCASE("truncated blob is rejected") {
    auto bytes = slurp(tmp.path / "weather.bin");
    std::ofstream out(tmp.path / "weather.bin", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS(bcl::io::load_surrogate(tmp.path / "weather"),
                    std::runtime_error);
  }
}

TEST_CASE("policy bundle round trip") {
  TempDir tmp;
  bcl::BanditEnv env(0.7);
  bcl::DdpgConfig cfg;
  cfg.total_steps = 1200;
  cfg.warmup_steps = 1000;
  cfg.seed = 3;
  const auto result = bcl::train_ddpg(env, cfg, "bandit");
  bcl::io::save_policy(tmp.path / "pi", result.policy, cfg.hidden);
  const auto back = bcl::io::load_policy(tmp.path / "pi");
  CHECK(back.env_id == "bandit");
  Eigen::VectorXd obs(1);
  obs << 0.0;
  CHECK(back.act(obs) == result.policy.act(obs));
}

TEST_CASE("config") {
  SUBCASE("defaults round trip through json") {
    bcl::io::RunConfig def;
    const auto text = bcl::io::config_to_json_text(def);
    const auto back = bcl::io::config_from_json_text(text);
    CHECK(back.seed == def.seed);
    CHECK(back.room_train.lr == def.room_train.lr);
    CHECK(bcl::io::config_hash(back) == bcl::io::config_hash(def));
  }
  SUBCASE("partial override keeps other defaults") {
    const auto c = bcl::io::config_from_json_text(
        R"({"seed": 9, "plant": {"h_in_base": 35.0}})");
    CHECK(c.seed == 9);
    CHECK(c.plant.h_in_base == 35.0);
    CHECK(c.plant.h_in_slope == bcl::io::RunConfig{}.plant.h_in_slope);
    CHECK(c.eval_episodes == 100);
  }
  SUBCASE("unknown keys are reported with their path") {
    try {
      bcl::io::config_from_json_text(R"({"plant": {"no_such_knob": 1}})");
      FAIL("expected rejection");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("plant.no_such_knob") !=
            std::string::npos);
    }
  }
  SUBCASE("hash changes with content") {
    bcl::io::RunConfig a, b;
    b.seed = 1;
    CHECK(bcl::io::config_hash(a) != bcl::io::config_hash(b));
  }
}

TEST_CASE("manifest lists artifact checksums") {
  TempDir tmp;
  {
    std::ofstream f(tmp.path / "a.csv");
    f << "hello\n";
  }
  bcl::io::RunConfig cfg;
  bcl::io::write_manifest(tmp.path, cfg, {tmp.path / "a.csv"});
  const auto text = slurp(tmp.path / "manifest.json");
  CHECK(text.find("config_hash") != std::string::npos);
  CHECK(text.find("a.csv") != std::string::npos);
  CHECK(text.find(bcl::io::file_checksum(tmp.path / "a.csv")) !=
        std::string::npos);
}
