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

#include "cuboidlift/error.hpp"
#include "cuboidlift/synth.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace cuboidlift;
using namespace cuboidlift::synth;
namespace fs = std::filesystem;

namespace
{

std::string slurp_tree(const fs::path & dir)
{
  std::vector<fs::path> files;
  for (const auto & e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto & f : files) all += fs::relative(f, dir).string() + "\n" + io::read_text(f);
  return all;
}

io::SceneBundle many_frames(std::size_t n)
{
  SynthConfig cfg = default_config(2);
  cfg.n_frames = 1;
  io::SceneBundle b = generate(cfg).bundle;
  const io::FrameRecord first = b.frames[0];
  b.frames.clear();
  for (std::size_t i = 0; i < n; ++i) {
    io::FrameRecord f = first;
    f.frame_id = "copy_" + std::to_string(i);
    f.timestamp_ns = static_cast<std::int64_t>(i);
    b.frames.push_back(f);
  }
  return b;
}

std::size_t mask_count(const io::SceneBundle & b)
{
  std::size_t n = 0;
  for (const auto & f : b.frames) {
    for (const auto & e : f.cameras) n += e.masks.size();
  }
  return n;
}

}  // namespace

TEST(CounterRng, ReproducibleAndInRange)
{
  CounterRng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs |= x != c.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_TRUE(differs);
}

TEST(CounterRng, NormalMoments)
{
  CounterRng rng(5);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(1.0, 2.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 1.0, 0.03);
  EXPECT_NEAR(std::sqrt(s2 / n - mean * mean), 2.0, 0.03);
}

TEST(RayBox, EntryDistance)
{
  const auto hit = ray_box_entry(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(10, 0, 0), {2, 4, 2}, 0.0);
  ASSERT_TRUE(hit.has_value());
  EXPECT_NEAR(*hit, 8.0, 1e-12);
  EXPECT_FALSE(ray_box_entry(Vec3(0, 0, 0), Vec3(-1, 0, 0), Vec3(10, 0, 0), {2, 4, 2}, 0.0).has_value());
}

TEST(Synth, DeterministicBytes)
{
  const auto a = fixture::temp_dir("synth_a");
  const auto b = fixture::temp_dir("synth_b");
  generate_bundle(default_config(12), a);
  generate_bundle(default_config(12), b);
  EXPECT_EQ(slurp_tree(a), slurp_tree(b));
  const auto c = fixture::temp_dir("synth_c");
  generate_bundle(default_config(13), c);
  EXPECT_NE(slurp_tree(a), slurp_tree(c));
}

TEST(Synth, LoadsLosslessly)
{
  SynthConfig cfg = default_config(3);
  cfg.external.enabled = true;
  const auto dir = fixture::temp_dir("synth_rt");
  const auto out = generate_bundle(cfg, dir);
  EXPECT_EQ(io::load_bundle(dir / "scene.json"), out.bundle);
  EXPECT_EQ(io::read_cuboid_file(dir / "ground_truth.json"), out.ground_truth);
}

TEST(Synth, PointsLieOnEgoVisibleFaces)
{
  SynthConfig cfg = default_config(4);
  cfg.n_frames = 2;
  const auto out = generate(cfg);
  std::size_t checked = 0;
  for (const auto & frame : out.bundle.frames) {
    const Vec3 sensor = frame.ego_pose.translation();
    std::vector<Cuboid> boxes;
    for (const auto & g : out.ground_truth.cuboids) {
      if (g.frame_id == frame.frame_id) boxes.push_back(g);
    }
    for (const auto & p : io::to_vec3(frame.points)) {
      const Vec3 q = frame.ego_pose.apply(p);
      bool on_visible_face = false;
      for (const auto & b : boxes) {
        const Eigen::Matrix3d r = Eigen::AngleAxisd(b.yaw, Vec3::UnitZ()).toRotationMatrix();
        const Vec3 local = r.transpose() * (q - b.center);
        const Vec3 half(b.dims.length / 2, b.dims.width / 2, b.dims.height / 2);
        if ((local.cwiseAbs() - half).maxCoeff() > 1e-4) continue;
        for (int axis = 0; axis < 3; ++axis) {
          if (std::abs(std::abs(local[axis]) - half[axis]) > 1e-4) continue;
          Vec3 n_local = Vec3::Zero();
          n_local[axis] = local[axis] > 0 ? 1.0 : -1.0;
          const Vec3 normal = r * n_local;
          const Vec3 face_center = b.center + normal * half[axis];
          if (normal.dot(sensor - face_center) > 0) on_visible_face = true;
        }
      }
      EXPECT_TRUE(on_visible_face);
      ++checked;
    }
  }
  EXPECT_GT(checked, 500u);
}

TEST(Synth, ConfigJsonRoundTrip)
{
  SynthConfig cfg = default_config(8);
  cfg.lidar.noise_sigma = 0.05;
  cfg.external.enabled = true;
  EXPECT_EQ(config_to_json(config_from_json(config_to_json(cfg))), config_to_json(cfg));
  EXPECT_THROW(config_from_json(nlohmann::json{{"n_frame", 3}}), ValidationError);
}

TEST(Synth, ExternalBoxesAreLogitScored)
{
  SynthConfig cfg = default_config(9);
  cfg.external.enabled = true;
  const auto out = generate(cfg);
  std::size_t n = 0;
  for (const auto & f : out.bundle.frames) {
    for (const auto & e : f.external_boxes) {
      EXPECT_EQ(e.source, CuboidSource::kExternal);
      EXPECT_EQ(e.frame_id, f.frame_id);
      ++n;
    }
  }
  EXPECT_EQ(n, out.ground_truth.cuboids.size());
}

TEST(MaskNoise, ZeroRatesIdentity)
{
  const auto b = generate(default_config(1)).bundle;
  const auto r = make_mask_noise(b, 0.0, 0.0, 7);
  EXPECT_EQ(r.bundle, b);
  EXPECT_EQ(r.dropped + r.injected, 0u);
}

TEST(MaskNoise, FullDropRemovesAll)
{
  const auto b = generate(default_config(1)).bundle;
  const auto r = make_mask_noise(b, 0.0, 1.0, 7);
  EXPECT_EQ(mask_count(r.bundle), 0u);
  EXPECT_EQ(r.dropped, mask_count(b));
}

TEST(MaskNoise, InjectedCountIsBinomial)
{
  const auto b = many_frames(100);
  const auto r = make_mask_noise(b, 0.5, 0.0, 11);
  EXPECT_LE(std::abs(static_cast<double>(r.injected) - 50.0), 3.0 * std::sqrt(100 * 0.25));
  EXPECT_EQ(mask_count(r.bundle), mask_count(b) + r.injected);
  EXPECT_NO_THROW(io::validate_bundle(r.bundle));
}

TEST(MaskNoise, RatesValidated)
{
  const auto b = many_frames(1);
  EXPECT_THROW(make_mask_noise(b, 1.5, 0.0, 1), ValidationError);
}
