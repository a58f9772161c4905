// Copyright 2026 The Lanekeeper Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>
#include <fstream>

#include "lanekeeper/config.hpp"
#include "support/fixtures.hpp"

using namespace lanekeeper;
using Catch::Approx;

TEST_CASE("key value parsing handles comments, spacing, and errors") {
  auto kv = parse_key_values(
      "# header comment\n"
      "gain = 1.5\n"
      "speed=0.25   # trailing comment\n"
      "\n"
      "model = culane\n");
  REQUIRE(kv.size() == 3);
  REQUIRE(kv.at("gain") == "1.5");
  REQUIRE(kv.at("speed") == "0.25");
  REQUIRE(kv.at("model") == "culane");

  REQUIRE_THROWS_AS(parse_key_values("gain 1.5\n"), InvalidConfig);
  REQUIRE_THROWS_AS(parse_key_values("= 3\n"), InvalidConfig);
  REQUIRE_THROWS_AS(parse_key_values("a = 1\na = 2\n"), InvalidConfig);
}

TEST_CASE("model config round-trips through its file format") {
  ModelConfig cfg = ModelConfig::culane();
  auto kv = cfg.to_key_values();
  auto text = format_key_values(kv);
  ModelConfig back = ModelConfig::from_key_values(parse_key_values(text));
  REQUIRE(back == cfg);
}

TEST_CASE("shipped config files match the built-in presets") {
  std::string dir = LK_CONFIG_DIR;
  REQUIRE(ModelConfig::load(dir + "/tusimple.cfg") ==
          ModelConfig::tusimple());
  REQUIRE(ModelConfig::load(dir + "/culane.cfg") == ModelConfig::culane());
}

TEST_CASE("model names resolve presets and file paths") {
  REQUIRE(ModelConfig::named("tusimple") == ModelConfig::tusimple());
  REQUIRE(ModelConfig::named("culane") == ModelConfig::culane());

  fixtures::TempDir tmp("modelcfg");
  {
    std::ofstream out(tmp.file("tiny.cfg"));
    out << "num_cells = 4\nnum_anchors = 3\nnum_lanes = 1\n";
    out << "input_width = 100\ninput_height = 90\n";
    out << "anchor_rows = 10,40,80\n";
  }
  ModelConfig tiny = ModelConfig::named(tmp.file("tiny.cfg"));
  REQUIRE(tiny.num_cells == 4);
  REQUIRE(tiny.anchor_rows == std::vector<int>{10, 40, 80});

  REQUIRE_THROWS_AS(ModelConfig::named("nonexistent.cfg"), IoError);
}

TEST_CASE("model config files reject unknown keys and bad values") {
  REQUIRE_THROWS_AS(
      ModelConfig::from_key_values(parse_key_values(
          "num_cells = 100\nnum_anchors = 56\nnum_lanes = 4\n"
          "input_width = 800\ninput_height = 288\n"
          "anchor_rows = 64,68\nwheelbase = 2\n")),
      InvalidConfig);
  REQUIRE_THROWS_AS(
      ModelConfig::from_key_values(parse_key_values("num_cells = many\n")),
      InvalidConfig);
}

TEST_CASE("run config merges module keys with defaults") {
  auto cfg = RunConfig::from_key_values(parse_key_values(
      "model = culane\n"
      "gain = 2.0\n"
      "half_width = 0.4\n"
      "target_fps = 9\n"
      "deviation_threshold_deg = 10\n"));
  REQUIRE(cfg.model == ModelConfig::culane());
  REQUIRE(cfg.gain == Approx(2.0));
  REQUIRE(cfg.corridor.half_width == Approx(0.4));
  REQUIRE(cfg.target_fps == Approx(9.0));
  REQUIRE(cfg.deviation_threshold_deg == Approx(10.0));
  REQUIRE(cfg.speed == Approx(0.5));  // untouched default
}

TEST_CASE("run config rejects unknown keys") {
  REQUIRE_THROWS_AS(RunConfig::from_key_values(parse_key_values(
                        "gain = 1.0\nturbo = yes\n")),
                    InvalidConfig);
}

TEST_CASE("run config validates every module's values") {
  REQUIRE_THROWS_AS(
      RunConfig::from_key_values(parse_key_values("gain = -1\n")),
      InvalidConfig);
  REQUIRE_THROWS_AS(
      RunConfig::from_key_values(parse_key_values("lookahead_frac = 1.5\n")),
      InvalidConfig);
  REQUIRE_THROWS_AS(
      RunConfig::from_key_values(parse_key_values("sim_dt = 0\n")),
      InvalidConfig);
  REQUIRE_THROWS_AS(
      RunConfig::from_key_values(parse_key_values("target_fps = -9\n")),
      InvalidConfig);
}

TEST_CASE("inline model keys override the named preset") {
  auto cfg = RunConfig::from_key_values(parse_key_values(
      "model = tusimple\n"
      "num_cells = 50\n"));
  REQUIRE(cfg.model.num_cells == 50);
  REQUIRE(cfg.model.num_anchors == 56);
}
