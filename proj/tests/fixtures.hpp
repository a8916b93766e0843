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

// Random instance generators shared by the tests and the acceptance suite.
#ifndef CUBOIDLIFT_TESTS__FIXTURES_HPP_
#define CUBOIDLIFT_TESTS__FIXTURES_HPP_

#include "cuboidlift/geometry.hpp"
#include "cuboidlift/metrics.hpp"
#include "cuboidlift/report_io.hpp"
#include "cuboidlift/scene_io.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixture
{

using namespace cuboidlift;

inline double uni(std::mt19937_64 & rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int pick(std::mt19937_64 & rng, int lo, int hi)
{
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Cuboid random_cuboid(std::mt19937_64 & rng, const std::string & frame_id)
{
  const auto & classes = io::canonical_classes();
  Cuboid c;
  c.frame_id = frame_id;
  c.class_label = classes[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(classes.size()) - 1))];
  c.score = uni(rng, 0.0, 1.0);
  c.center = oracle::random_vec(rng, -80.0, 80.0);
  c.dims = {uni(rng, 0.1, 3.0), uni(rng, 0.1, 12.0), uni(rng, 0.1, 4.0)};
  c.yaw = geometry::normalize_yaw(uni(rng, -4.0, 4.0));
  if (pick(rng, 0, 1)) c.velocity = Eigen::Vector2d(uni(rng, -20, 20), uni(rng, -20, 20));
  c.source = static_cast<CuboidSource>(pick(rng, 0, 3));
  if (c.source == CuboidSource::kExternal) {
    c.class_label = "object";
    c.score = uni(rng, -8.0, 8.0);
  }
  return c;
}

inline io::CuboidFile random_cuboid_file(std::mt19937_64 & rng, int max_cuboids)
{
  io::CuboidFile f;
  const int frames = pick(rng, 1, 4);
  for (int i = 0; i < frames; ++i) f.frame_ids.push_back("frame_" + std::to_string(i));
  const int n = pick(rng, 0, max_cuboids);
  for (int i = 0; i < n; ++i) f.cuboids.push_back(random_cuboid(rng, f.frame_ids[i % frames]));
  return f;
}

inline io::Bitmap random_bitmap(std::mt19937_64 & rng, int w, int h, double density)
{
  io::Bitmap b(w, h);
  std::bernoulli_distribution on(density);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) b.set(x, y, on(rng));
  }
  return b;
}

// A non-empty blob with a tight pixel bbox.
inline io::InstanceMask2D random_mask(std::mt19937_64 & rng, const geometry::CameraModel & cam)
{
  const int x0 = pick(rng, 0, cam.width - 2), y0 = pick(rng, 0, cam.height - 2);
  const int x1 = pick(rng, x0 + 1, cam.width), y1 = pick(rng, y0 + 1, cam.height);
  io::Bitmap b(cam.width, cam.height);
  std::bernoulli_distribution on(0.6);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) b.set(x, y, on(rng));
  }
  b.set(x0, y0);
  const auto & classes = io::canonical_classes();
  io::InstanceMask2D m;
  m.camera_id = cam.camera_id;
  m.class_label = classes[static_cast<std::size_t>(pick(rng, 0, 9))];
  m.raw_prompt = m.class_label + "_alias";
  m.score = uni(rng, 0.0, 1.0);
  m.bbox = {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1),
            static_cast<double>(y1)};
  m.rle = io::encode_rle(b);
  return m;
}

inline io::SceneBundle random_bundle(std::mt19937_64 & rng)
{
  io::SceneBundle b;
  b.scene_id = "scene_" + std::to_string(pick(rng, 0, 999));
  b.classes = io::canonical_classes();
  b.shape_priors = io::default_shape_priors();
  b.shape_priors["car"].length = uni(rng, 3.0, 6.0);
  const int lanes = pick(rng, 0, 3);
  for (int i = 0; i < lanes; ++i) {
    io::Polyline p;
    const int n = pick(rng, 2, 5);
    for (int k = 0; k < n; ++k) p.emplace_back(uni(rng, -50, 50) + 100.0 * k, uni(rng, -50, 50));
    b.lane_graph.lanes.push_back(p);
  }
  const int frames = pick(rng, 1, 3);
  std::int64_t ts = pick(rng, 0, 1000);
  for (int i = 0; i < frames; ++i) {
    io::FrameRecord f;
    f.frame_id = "f" + std::to_string(i);
    ts += pick(rng, 1, 1000000);
    f.timestamp_ns = ts;
    f.ego_pose = geometry::SE3Pose(oracle::random_rotation(rng), oracle::random_vec(rng, -100, 100));
    f.lidar_path = "lidar/" + f.frame_id + ".bin";
    const int npts = pick(rng, 0, 50);
    for (int k = 0; k < npts; ++k) {
      f.points.push_back({static_cast<float>(uni(rng, -50, 50)), static_cast<float>(uni(rng, -50, 50)),
                          static_cast<float>(uni(rng, -3, 3)), static_cast<float>(uni(rng, 0, 1))});
    }
    const int cams = pick(rng, 0, 2);
    for (int c = 0; c < cams; ++c) {
      io::CameraEntry e;
      e.camera.camera_id = "cam" + std::to_string(c);
      e.camera.width = pick(rng, 4, 24);
      e.camera.height = pick(rng, 4, 24);
      e.camera.fx = uni(rng, 10, 100);
      e.camera.fy = uni(rng, 10, 100);
      e.camera.cx = e.camera.width / 2.0;
      e.camera.cy = e.camera.height / 2.0;
      e.camera.extrinsic = geometry::SE3Pose(oracle::random_rotation(rng), oracle::random_vec(rng, -2, 2));
      e.masks_path = "masks/" + f.frame_id + "_" + e.camera.camera_id + ".json";
      const int masks = pick(rng, 0, 3);
      for (int m = 0; m < masks; ++m) e.masks.push_back(random_mask(rng, e.camera));
      f.cameras.push_back(e);
    }
    if (pick(rng, 0, 1)) {
      f.external_boxes_path = "external/" + f.frame_id + ".json";
      const int n = pick(rng, 0, 3);
      for (int k = 0; k < n; ++k) {
        Cuboid c = random_cuboid(rng, f.frame_id);
        c.source = CuboidSource::kExternal;
        c.class_label = "object";
        f.external_boxes.push_back(c);
      }
    }
    b.frames.push_back(f);
  }
  return b;
}

inline metrics::MetricsReport random_report(std::mt19937_64 & rng)
{
  auto q = [&](double lo, double hi) { return io::quantize_metric(uni(rng, lo, hi)); };
  metrics::MetricsReport r;
  r.dist_thresholds = {0.5, 1.0, 2.0, 4.0};
  const int classes = pick(rng, 0, 5);
  for (int i = 0; i < classes; ++i) {
    metrics::ClassMetrics m;
    for (int k = 0; k < 4; ++k) m.ap.push_back(q(0, 1));
    m.mean_ap = q(0, 1);
    m.errors = {q(0, 3), q(0, 1), q(0, 3.14), q(0, 5), 1.0, pick(rng, 0, 1) == 1};
    m.num_gt = static_cast<std::size_t>(pick(rng, 0, 500));
    m.num_pred = static_cast<std::size_t>(pick(rng, 0, 500));
    r.per_class[io::canonical_classes()[static_cast<std::size_t>(i)]] = m;
  }
  r.aggregate = {q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1), 1.0, q(0, 1)};
  r.flags = {"aae_unsupported"};
  if (pick(rng, 0, 1)) r.flags.push_back("no_gt:bus");
  return r;
}

inline std::filesystem::path temp_dir(const std::string & name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("cuboidlift_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture

#endif  // CUBOIDLIFT_TESTS__FIXTURES_HPP_
