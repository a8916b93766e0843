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

#ifndef CUBOIDLIFT__PSEUDOLABEL_HPP_
#define CUBOIDLIFT__PSEUDOLABEL_HPP_

#include "cuboidlift/cuboid.hpp"
#include "cuboidlift/geometry.hpp"
#include "cuboidlift/scene_io.hpp"
#include "cuboidlift/suppression.hpp"

#include <json.hpp>

#include <set>
#include <span>
#include <string>
#include <vector>

namespace cuboidlift::pseudolabel
{

using geometry::Vec2;
using geometry::Vec3;

struct PipelineConfig
{
  double score_min{0.10};
  double nms2d_iou{0.75};
  int erosion_kernel{3};
  int accumulation_frames{3};
  std::set<std::string> vehicle_classes{"car",     "truck",      "bus",    "trailer",
                                        "construction_vehicle", "motorcycle", "bicycle"};
  double nonvehicle_default_yaw{0.0};
  // Vehicles with no lane graph get the default yaw instead of an error.
  bool lane_fallback_to_default{false};
  bool medoid_compensation{true};
  suppression::DistanceThresholds nms3d_thresholds{suppression::default_distance_thresholds()};
};

// Throws ValidationError on out-of-range values, or when a class the bundle can
// emit has no shape prior or NMS threshold.
void validate_config(const PipelineConfig & cfg);
void validate_config(const PipelineConfig & cfg, const io::SceneBundle & bundle);

nlohmann::json config_to_json(const PipelineConfig & cfg);
// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json & j);

struct MaskedPointSet
{
  std::size_t mask_index{};
  std::string class_label;
  double score{};
  std::vector<Vec3> points;  // ego frame of the target frame
};

// Drops masks scoring below score_min, then greedy box NMS by descending score
// (ties by input order) suppressing IoU > nms2d_iou across synonyms.
std::vector<io::InstanceMask2D> filter_and_nms2d(const std::vector<io::InstanceMask2D> & masks,
                                                 const PipelineConfig & cfg);
double box_iou(const io::PixelBox & a, const io::PixelBox & b);

// Square-kernel erosion; pixels outside the image count as background.
io::Bitmap erode_mask(const io::Bitmap & mask, int kernel);

// Points of frames [target - n + 1, target] in the ego frame of `target`:
// the target sweep first, then older sweeps newest to oldest.
std::vector<Vec3> accumulate_sweeps(std::span<const io::FrameRecord> frames, std::size_t target, int n);

// Ego-frame points whose projection lands on a set pixel (floor(u), floor(v)).
std::vector<Vec3> group_points(std::span<const Vec3> points_ego, const geometry::CameraModel & cam,
                               const io::Bitmap & mask);

// Index of the point minimizing the summed Euclidean distance to all points;
// ties go to the lowest index. Throws ValidationError on an empty set.
std::size_t medoid_index(std::span<const Vec3> points);
Vec3 medoid(std::span<const Vec3> points);

// Pushes a surface-biased center radially away from the ego by
// d = min(|w / (2 sin(a - yaw))|, |l / (2 cos(a - yaw))|), with a the heading
// of (ego - center). Throws ValidationError when center == ego.
Vec2 compensate_medoid(const Vec2 & center, const Vec2 & ego, double yaw, double width, double length);
double compensation_distance(const Vec2 & center, const Vec2 & ego, double yaw, double width,
                             double length);

// Vehicles take the direction of the closest lane segment; everything else the
// configured default yaw.
double assign_orientation(const Vec2 & center, const std::string & class_label,
                          const io::LaneGraph & lanes, const PipelineConfig & cfg);

// Per-detection intermediates, mainly for inspection and ablation.
struct CuboidTrace
{
  std::string camera_id;
  std::size_t mask_index{};
  std::size_t num_points{};
  Vec3 raw_medoid_global{Vec3::Zero()};
  Cuboid cuboid;
};

struct FrameResult
{
  std::vector<Cuboid> cuboids;     // after cross-camera NMS, descending score
  std::vector<CuboidTrace> traces;  // every candidate before NMS
};

FrameResult generate_frame_traced(const io::SceneBundle & bundle, std::size_t frame_index,
                                  const PipelineConfig & cfg);
std::vector<Cuboid> generate_frame(const io::SceneBundle & bundle, std::size_t frame_index,
                                   const PipelineConfig & cfg);

// Every frame, in manifest order. `jobs` bounds frame-level parallelism and
// never changes the result.
std::vector<std::vector<Cuboid>> generate_all(const io::SceneBundle & bundle, const PipelineConfig & cfg,
                                              int jobs = 1);

}  // namespace cuboidlift::pseudolabel

#endif  // CUBOIDLIFT__PSEUDOLABEL_HPP_
