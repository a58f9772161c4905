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

#include "lanekeeper/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace lanekeeper;
using Catch::Approx;

namespace {

const char* kStageNames[] = {"capture_staleness",
                             "preprocess",
                             "inference",
                             "decode",
                             "control",
                             "end_to_end",
                             "preprocess_plus_inference"};

std::string write_scene(const fixtures::TempDir& tmp) {
  std::ofstream out(tmp.file("pair.scene"));
  out << "const 0.35 0 55\n";
  out << "const 0.65 0 55\n";
  return tmp.file("pair.scene");
}

}  // namespace

TEST_CASE("lockstep pipeline processes every frame of a finite source") {
  fixtures::TempDir tmp("pipe_lockstep");
  PipelineOptions opt;
  opt.source_spec = "synthetic:" + write_scene(tmp);
  opt.backend_spec = "synthetic:" + tmp.file("pair.scene");
  opt.source_options.synth_frames = 20;

  auto report = run_pipeline(opt);
  REQUIRE_FALSE(report.incomplete);
  REQUIRE(report.frames_in == 20);
  REQUIRE(report.frames_processed == 20);
  REQUIRE(report.frames_dropped == 0);
  REQUIRE(report.in_flight == 0);
  for (const char* stage : kStageNames) {
    INFO(stage);
    REQUIRE(report.stages.at(stage).count == 20);
  }
  REQUIRE(report.achieved_fps > 0);

  // end_to_end covers the stage chain (0.5 ms slack)
  double chain = report.stages.at("preprocess").mean +
                 report.stages.at("inference").mean +
                 report.stages.at("decode").mean +
                 report.stages.at("control").mean;
  REQUIRE(report.stages.at("end_to_end").mean >= chain - 0.5);
  REQUIRE(report.frames_in ==
          report.frames_processed + report.frames_dropped + report.in_flight);
}

TEST_CASE("per-frame records carry the documented fields") {
  fixtures::TempDir tmp("pipe_records");
  PipelineOptions opt;
  opt.source_spec = "synthetic:" + write_scene(tmp);
  opt.backend_spec = "synthetic:" + tmp.file("pair.scene");
  opt.source_options.synth_frames = 5;
  opt.sink_spec = "jsonl:" + tmp.file("records.jsonl");

  auto report = run_pipeline(opt);
  REQUIRE(report.frames_processed == 5);

  std::ifstream in(tmp.file("records.jsonl"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    Json record = Json::parse(line);
    for (const char* field :
         {"seq", "staleness_ms", "preprocess_ms", "inference_ms", "decode_ms",
          "control_ms", "lanes", "error_value", "omega"}) {
      INFO(field);
      REQUIRE(record.contains(field));
    }
    REQUIRE(record.at("lanes").is_array());
    REQUIRE(record.at("lanes").size() == 2);       // list of point lists
    REQUIRE(record.at("lanes")[0][0].size() == 2);  // [x, y]
    REQUIRE(record.at("error_value").is_number());
    REQUIRE(std::abs(record.at("error_value").get<double>()) < 0.05);
    ++rows;
  }
  REQUIRE(rows == 5);
}

TEST_CASE("overlay sink writes one ppm per processed frame") {
  fixtures::TempDir tmp("pipe_overlay");
  PipelineOptions opt;
  opt.source_spec = "synthetic:" + write_scene(tmp);
  opt.backend_spec = "synthetic:" + tmp.file("pair.scene");
  opt.source_options.synth_frames = 3;
  opt.sink_spec = "overlay:" + tmp.file("frames");

  auto report = run_pipeline(opt);
  REQUIRE(report.frames_processed == 3);
  for (int i = 0; i < 3; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d.ppm", i);
    Image img = read_ppm(tmp.file("frames") + "/" + name);
    REQUIRE(img.width == 800);
    REQUIRE(img.height == 288);
  }
}

TEST_CASE("paced producer drops frames but keeps them fresh") {
  fixtures::TempDir tmp("pipe_fresh");
  PipelineOptions opt;
  opt.source_spec = "synthetic:" + write_scene(tmp);
  opt.backend_spec = "synthetic:" + tmp.file("pair.scene") + ",delay=50";
  opt.producer_fps = 100;
  opt.target_fps = 9;
  opt.max_duration_s = 1.5;

  auto report = run_pipeline(opt);
  REQUIRE_FALSE(report.incomplete);
  REQUIRE(report.frames_dropped > 0);
  REQUIRE(report.frames_processed >= 8);
  REQUIRE(report.stages.at("capture_staleness").max <= 15.0);
  REQUIRE(report.frames_in ==
          report.frames_processed + report.frames_dropped + report.in_flight);
  REQUIRE(report.stages.at("inference").p50 >= 50.0);
}

TEST_CASE("frame budget stops an unbounded source") {
  fixtures::TempDir tmp("pipe_budget");
  PipelineOptions opt;
  opt.source_spec = "synthetic:" + write_scene(tmp);
  opt.backend_spec = "synthetic:";
  opt.max_frames = 5;

  auto report = run_pipeline(opt);
  REQUIRE(report.frames_processed == 5);
  REQUIRE_FALSE(report.incomplete);
}

TEST_CASE("governed consumer approaches the target rate") {
  fixtures::TempDir tmp("pipe_rate");
  PipelineOptions opt;
  opt.source_spec = "synthetic:" + write_scene(tmp);
  opt.backend_spec = "synthetic:delay=20";
  opt.producer_fps = 100;
  opt.target_fps = 9;
  opt.max_duration_s = 2.0;

  auto report = run_pipeline(opt);
  REQUIRE(report.achieved_fps == Approx(9.0).epsilon(0.05));
}

TEST_CASE("a failing source yields a partial report flagged incomplete") {
  fixtures::TempDir tmp("pipe_fail");
  fixtures::write_gray_y4m(tmp.file("clip.y4m"), 5, 16, 8);
  auto bytes = fixtures::read_file(tmp.file("clip.y4m"));
  std::ofstream(tmp.file("cut.y4m"), std::ios::binary)
      << bytes.substr(0, bytes.size() - 30);

  PipelineOptions opt;
  opt.source_spec = tmp.file("cut.y4m");
  opt.backend_spec = "synthetic:";

  auto report = run_pipeline(opt);
  REQUIRE(report.incomplete);
  REQUIRE(report.failure.find("producer") != std::string::npos);
  REQUIRE(report.frames_processed == 4);
}

TEST_CASE("pipeline rejects bad specs before starting") {
  PipelineOptions opt;
  opt.source_spec = "/nonexistent";
  REQUIRE_THROWS_AS(run_pipeline(opt), SourceOpenError);

  fixtures::TempDir tmp("pipe_badsink");
  opt.source_spec = "synthetic:" + write_scene(tmp);
  opt.sink_spec = "carrier-pigeon:coop";
  REQUIRE_THROWS_AS(run_pipeline(opt), InvalidConfig);
}

TEST_CASE("speedup arithmetic reproduces the reference ratios") {
  auto a = bench_speedup(std::vector<double>{2295.0},
                         std::vector<double>{105.0});
  REQUIRE(a.ratio == Approx(21.857142857).margin(1e-9));
  REQUIRE(round2(a.ratio) == Approx(21.86));

  auto b = bench_speedup(std::vector<double>{2280.0},
                         std::vector<double>{101.0});
  REQUIRE(b.ratio == Approx(22.574257426).margin(1e-9));
  REQUIRE(round2(b.ratio) == Approx(22.57));

  auto same = bench_speedup(std::vector<double>{7.0, 9.0},
                            std::vector<double>{9.0, 7.0});
  REQUIRE(round2(same.ratio) == Approx(1.00));
}

TEST_CASE("speedup rejects degenerate timing lists") {
  REQUIRE_THROWS_AS(bench_speedup({}, std::vector<double>{1.0}),
                    InvalidInput);
  REQUIRE_THROWS_AS(bench_speedup(std::vector<double>{1.0, -2.0},
                                  std::vector<double>{1.0}),
                    InvalidInput);
  REQUIRE_THROWS_AS(bench_speedup(std::vector<double>{0.0},
                                  std::vector<double>{1.0}),
                    InvalidInput);
}

TEST_CASE("bench measures every backend and compares against the first") {
  ModelConfig cfg = ModelConfig::tusimple();
  auto report =
      run_bench({"synthetic:delay=40", "synthetic:delay=2"}, cfg, 3);
  REQUIRE(report.backends.size() == 2);
  REQUIRE(report.backends[0].inference.count == 3);
  REQUIRE(report.backends[0].inference.mean >= 40.0);
  REQUIRE(report.speedups.size() == 1);
  REQUIRE(report.speedups[0].baseline == "synthetic:delay=40");
  double ratio = report.speedups[0].speedup.ratio;
  REQUIRE(ratio > 5.0);
  REQUIRE(ratio < 25.0);

  REQUIRE_THROWS_AS(run_bench({}, cfg, 3), InvalidConfig);
  REQUIRE_THROWS_AS(run_bench({"synthetic:"}, cfg, 0), InvalidConfig);
}
