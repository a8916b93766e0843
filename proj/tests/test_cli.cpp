// Copyright 2026 The cuboidlift Authors
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

#include "cuboidlift/cli.hpp"
#include "cuboidlift/fusion.hpp"
#include "cuboidlift/pseudolabel.hpp"
#include "cuboidlift/report_io.hpp"
#include "cuboidlift/scene_io.hpp"
#include "cuboidlift/synth.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace cuboidlift;
namespace fs = std::filesystem;

namespace
{

struct Result
{
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, const std::map<std::string, std::string> & env = {})
{
  args.insert(args.begin(), "cuboidlift");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err, env);
  return {code, out.str(), err.str()};
}

fs::path synth_scene(const std::string & name, bool external = false)
{
  const auto dir = fixture::temp_dir(name);
  synth::SynthConfig cfg = synth::default_config(21);
  cfg.external.enabled = external;
  synth::generate_bundle(cfg, dir);
  return dir;
}

}  // namespace

TEST(Cli, HelpAndUsageErrors)
{
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run({}).code, cli::kExitValidation);
  EXPECT_EQ(run({"teleport"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"generate", "--scene", "x"}).code, cli::kExitValidation);
}

TEST(Cli, LayeredConfigPrecedence)
{
  const auto dir = fixture::temp_dir("layers");
  io::write_text(R"({"fusion": {"tau": 1.5, "iou_min": 0.2}, "eval": {"tp_threshold": 1}})", dir / "c.json");
  const std::map<std::string, std::string> env{{"CUBOIDLIFT_FUSION__TAU", "2.5"},
                                               {"CUBOIDLIFT_EVAL__CLASS_AGNOSTIC", "true"},
                                               {"UNRELATED", "1"}};
  const auto cfg = cli::layered_config(dir / "c.json", env, {"fusion.tau=3.5"});
  EXPECT_DOUBLE_EQ(cfg["fusion"]["tau"].get<double>(), 3.5);
  EXPECT_DOUBLE_EQ(cfg["fusion"]["iou_min"].get<double>(), 0.2);
  EXPECT_EQ(cfg["eval"]["class_agnostic"], true);
  EXPECT_EQ(cfg["eval"]["tp_threshold"], 1);
  const auto no_set = cli::layered_config(dir / "c.json", env, {});
  EXPECT_DOUBLE_EQ(no_set["fusion"]["tau"].get<double>(), 2.5);
}

TEST(Cli, GenerateEmptyMaskBundle)
{
  io::SceneBundle b;
  b.scene_id = "empty";
  b.classes = io::canonical_classes();
  b.shape_priors = io::default_shape_priors();
  io::FrameRecord f;
  f.frame_id = "f0";
  f.lidar_path = "lidar/f0.bin";
  b.frames.push_back(f);
  const auto dir = fixture::temp_dir("cli_empty");
  io::write_bundle(b, dir);
  const auto r = run({"generate", "--scene", (dir / "scene.json").string(), "--out", (dir / "out.json").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto file = io::read_cuboid_file(dir / "out.json");
  EXPECT_TRUE(file.cuboids.empty());
  EXPECT_EQ(file.frame_ids, std::vector<std::string>{"f0"});
}

TEST(Cli, GenerateJobsInvariant)
{
  const auto dir = synth_scene("cli_jobs");
  const auto scene = (dir / "scene.json").string();
  ASSERT_EQ(run({"generate", "--scene", scene, "--out", (dir / "a.json").string(), "--jobs", "1"}).code, 0);
  ASSERT_EQ(run({"generate", "--scene", scene, "--out", (dir / "b.json").string(), "--jobs", "8"}).code, 0);
  EXPECT_EQ(io::read_text(dir / "a.json"), io::read_text(dir / "b.json"));
  const auto lib = pseudolabel::generate_all(io::load_bundle(scene), pseudolabel::PipelineConfig{});
  std::vector<Cuboid> flat;
  for (const auto & f : lib) flat.insert(flat.end(), f.begin(), f.end());
  EXPECT_EQ(io::read_cuboids(dir / "a.json"), flat);
}

TEST(Cli, GenerateFrameRange)
{
  const auto dir = synth_scene("cli_range");
  const auto r = run({"generate", "--scene", (dir / "scene.json").string(), "--out", (dir / "r.json").string(),
                      "--frames", "1..2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::read_cuboid_file(dir / "r.json").frame_ids.size(), 2u);
  EXPECT_EQ(run({"generate", "--scene", (dir / "scene.json").string(), "--out", (dir / "r.json").string(),
                 "--frames", "2..9"}).code,
            cli::kExitValidation);
}

TEST(Cli, GenerateBadManifest)
{
  const auto dir = synth_scene("cli_bad");
  auto j = io::read_json(dir / "scene.json");
  j["frames"][0].erase("frame_id");
  io::write_text(j.dump(), dir / "scene.json");
  const auto r = run({"generate", "--scene", (dir / "scene.json").string(), "--out", (dir / "o.json").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("frame_id"), std::string::npos);
}

TEST(Cli, GenerateConfigOverrides)
{
  const auto dir = synth_scene("cli_cfg");
  const auto scene = (dir / "scene.json").string();
  EXPECT_EQ(run({"generate", "--scene", scene, "--out", (dir / "o.json").string(), "--set",
                 "pipeline.erosion_kernel=4"}).code,
            cli::kExitValidation);
  EXPECT_EQ(run({"generate", "--scene", scene, "--out", (dir / "o.json").string()},
                {{"CUBOIDLIFT_PIPELINE__MEDOID_COMPENSATION", "false"}}).code,
            cli::kExitOk);
  const auto file = io::read_cuboid_file(dir / "o.json");
  EXPECT_EQ(file.provenance["pipeline"]["medoid_compensation"], false);
  EXPECT_EQ(run({"generate", "--scene", scene, "--out", (dir / "o.json").string(), "--config",
                 (dir / "missing.json").string()}).code,
            cli::kExitIo);
}

TEST(Cli, FuseMissingExternal)
{
  const auto dir = synth_scene("cli_fuse_missing");
  ASSERT_EQ(run({"generate", "--scene", (dir / "scene.json").string(), "--out", (dir / "c.json").string()}).code, 0);
  EXPECT_EQ(run({"fuse", "--cm3d", (dir / "c.json").string(), "--external", (dir / "nope.json").string(), "--out",
                 (dir / "f.json").string()}).code,
            cli::kExitIo);
}

TEST(Cli, FuseEmptyExternalIsIdentity)
{
  const auto dir = synth_scene("cli_fuse_empty");
  ASSERT_EQ(run({"generate", "--scene", (dir / "scene.json").string(), "--out", (dir / "c.json").string()}).code, 0);
  io::write_cuboids(io::CuboidFile{}, dir / "e.json");
  ASSERT_EQ(run({"fuse", "--cm3d", (dir / "c.json").string(), "--external", (dir / "e.json").string(), "--out",
                 (dir / "f.json").string()}).code,
            0);
  EXPECT_EQ(io::read_cuboid_file(dir / "f.json"), io::read_cuboid_file(dir / "c.json"));
}

TEST(Cli, FuseMatchesLibrary)
{
  const auto dir = synth_scene("cli_fuse_lib", true);
  ASSERT_EQ(run({"generate", "--scene", (dir / "scene.json").string(), "--out", (dir / "c.json").string()}).code, 0);
  const auto bundle = io::load_bundle(dir / "scene.json");
  io::CuboidFile ext;
  for (const auto & f : bundle.frames) {
    ext.frame_ids.push_back(f.frame_id);
    ext.cuboids.insert(ext.cuboids.end(), f.external_boxes.begin(), f.external_boxes.end());
  }
  io::write_cuboids(ext, dir / "e.json");
  const auto r = run({"fuse", "--cm3d", (dir / "c.json").string(), "--external", (dir / "e.json").string(), "--tau",
                      "2", "--out", (dir / "f.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  fusion::FusionConfig cfg;
  cfg.tau = 2.0;
  EXPECT_EQ(io::read_cuboids(dir / "f.json"), fusion::fuse_frames(io::read_cuboids(dir / "c.json"), ext.cuboids, cfg));
}

TEST(Cli, EvalPerfectAndDeterministic)
{
  const auto dir = synth_scene("cli_eval");
  const auto gt = (dir / "ground_truth.json").string();
  const auto r = run({"eval", "--pred", gt, "--gt", gt, "--out", (dir / "r1.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mAP  1.0000"), std::string::npos) << r.out;
  ASSERT_EQ(run({"eval", "--pred", gt, "--gt", gt, "--out", (dir / "r2.json").string()}).code, 0);
  EXPECT_EQ(io::read_text(dir / "r1.json"), io::read_text(dir / "r2.json"));
  EXPECT_DOUBLE_EQ(io::read_report(dir / "r1.json").aggregate.map, 1.0);
}

TEST(Cli, EvalClassAgnostic)
{
  const auto dir = synth_scene("cli_agnostic");
  const auto gt = (dir / "ground_truth.json").string();
  ASSERT_EQ(run({"eval", "--pred", gt, "--gt", gt, "--class-agnostic", "--out", (dir / "r.json").string()}).code, 0);
  const auto report = io::read_report(dir / "r.json");
  ASSERT_EQ(report.per_class.size(), 1u);
  EXPECT_TRUE(report.per_class.count(metrics::kAgnosticLabel));
}

TEST(Cli, EvalFrameMismatch)
{
  const auto dir = synth_scene("cli_mismatch");
  io::CuboidFile other;
  other.frame_ids = {"elsewhere"};
  io::write_cuboids(other, dir / "p.json");
  const auto r = run({"eval", "--pred", (dir / "p.json").string(), "--gt", (dir / "ground_truth.json").string(), "--out",
                      (dir / "r.json").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
}

TEST(Cli, SynthCommand)
{
  const auto dir = fixture::temp_dir("cli_synth");
  const auto r = run({"synth", "--out", (dir / "a").string(), "--seed", "5", "--mask-fn-rate", "0.2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NO_THROW(io::load_bundle(dir / "a" / "scene.json"));
  ASSERT_EQ(run({"synth", "--out", (dir / "b").string(), "--seed", "5", "--mask-fn-rate", "0.2"}).code, 0);
  EXPECT_EQ(io::read_text(dir / "a" / "scene.json"), io::read_text(dir / "b" / "scene.json"));
  EXPECT_EQ(io::read_text(dir / "a" / "masks" / "synth_0000_CAM_FRONT.json"),
            io::read_text(dir / "b" / "masks" / "synth_0000_CAM_FRONT.json"));
}
