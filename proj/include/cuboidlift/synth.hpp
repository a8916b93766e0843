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

#ifndef CUBOIDLIFT__SYNTH_HPP_
#define CUBOIDLIFT__SYNTH_HPP_

#include "cuboidlift/cuboid.hpp"
#include "cuboidlift/geometry.hpp"
#include "cuboidlift/scene_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cuboidlift::synth
{

using geometry::Vec2;
using geometry::Vec3;

// Counter-based generator: output k (k = 1, 2, ...) is the SplitMix64
// finalizer applied to seed + k * 0x9E3779B97F4A7C15. Doubles take the top 53
// bits; normals use one Box-Muller cosine branch per draw. Any language can
// reproduce the stream from this description.
class CounterRng
{
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);  // [0, n)
  double normal(double mean = 0.0, double sigma = 1.0);
  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t seed_;
  std::uint64_t counter_{0};
};

struct SynthObject
{
  std::string class_label;
  std::string raw_prompt;       // defaults to class_label
  Vec3 position{Vec3::Zero()};  // box center at t = 0; z defaults to height / 2
  bool position_z_set{false};
  double yaw{};
  std::optional<Dims> dims;  // defaults to the shape prior of the class
  Vec2 velocity{Vec2::Zero()};
};

struct SynthCamera
{
  std::string camera_id;
  double yaw{};  // relative to the ego heading, counter-clockwise
  double fx{};
  double fy{};
  int width{};
  int height{};
  Vec3 mount{Vec3::Zero()};  // ego frame
};

struct LidarConfig
{
  int points_per_object{300};
  double range_max{60.0};
  double noise_sigma{0.0};
  int ground_points{0};
};

struct EgoTrajectory
{
  std::vector<Vec2> waypoints{Vec2(0.0, 0.0), Vec2(100.0, 0.0)};
  double speed{0.0};          // m/s along the polyline
  double sensor_height{1.8};  // ego frame origin above ground
};

struct ExternalConfig
{
  bool enabled{false};
  double center_sigma{0.2};
  double yaw_sigma{0.1};
  double dims_sigma{0.1};
  double logit_mean{1.0};
  double logit_sigma{1.0};
};

struct SynthConfig
{
  std::uint64_t seed{0};
  std::string scene_id{"synth"};
  int n_frames{3};
  double frame_dt{0.5};
  EgoTrajectory ego;
  std::vector<SynthObject> objects;
  std::vector<SynthCamera> cameras;
  LidarConfig lidar;
  std::vector<io::Polyline> lanes;
  double mask_score_min{0.5};
  double mask_score_max{1.0};
  int min_mask_pixels{4};
  io::ShapePriorTable shape_priors{io::default_shape_priors()};
  ExternalConfig external;
};

void validate_config(const SynthConfig & cfg);
nlohmann::json config_to_json(const SynthConfig & cfg);
SynthConfig config_from_json(const nlohmann::json & j);

// Six cameras at 60 degree spacing with a 70 degree horizontal field of view,
// so neighbours overlap.
std::vector<SynthCamera> default_camera_rig(int width = 480, int height = 270);

// A short two-lane road with a mix of classes around a slowly moving ego.
SynthConfig default_config(std::uint64_t seed = 0);

struct SynthOutput
{
  io::SceneBundle bundle;
  io::CuboidFile ground_truth;
};

// Points are sampled only on ego-facing cuboid faces, occluded samples are
// removed, and masks are filled convex hulls of projected corners resolved
// per pixel by nearest depth. Identical configs give identical output.
SynthOutput generate(const SynthConfig & cfg);

// Writes the bundle under `dir` and the ground truth as `dir/ground_truth.json`.
void write_output(const SynthOutput & out, const std::filesystem::path & dir);
SynthOutput generate_bundle(const SynthConfig & cfg, const std::filesystem::path & dir);

struct NoiseResult
{
  io::SceneBundle bundle;
  std::size_t dropped{};
  std::size_t injected{};
};

// Drops each mask with probability fn_rate and, per frame, injects one
// spurious rectangular mask with probability fp_rate.
NoiseResult make_mask_noise(const io::SceneBundle & bundle, double fp_rate, double fn_rate,
                            std::uint64_t seed);

// Ego -> global pose at time t.
geometry::SE3Pose ego_pose_at(const EgoTrajectory & ego, double t);

// The 8 corners of an oriented box.
std::array<Vec3, 8> box_corners(const Vec3 & center, const Dims & dims, double yaw);

// Entry distance along a ray (origin, unit direction) into an oriented box, if hit.
std::optional<double> ray_box_entry(const Vec3 & origin, const Vec3 & dir, const Vec3 & center,
                                    const Dims & dims, double yaw);

}  // namespace cuboidlift::synth

#endif  // CUBOIDLIFT__SYNTH_HPP_
