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

#ifndef CUBOIDLIFT__CUBOID_HPP_
#define CUBOIDLIFT__CUBOID_HPP_

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>

namespace cuboidlift
{

// Object extents in meters. Length runs along the heading, width across it.
struct Dims
{
  double width{};
  double length{};
  double height{};

  bool operator==(const Dims &) const = default;
};

enum class CuboidSource { kCm3d, kExternal, kFused, kGroundTruth };

std::string_view to_string(CuboidSource source);
CuboidSource cuboid_source_from_string(std::string_view name);

struct Cuboid
{
  std::string frame_id;
  std::string class_label;
  double score{};
  Eigen::Vector3d center{Eigen::Vector3d::Zero()};  // global frame, box center
  Dims dims;
  double yaw{};  // global frame, (-pi, pi]
  std::optional<Eigen::Vector2d> velocity;
  CuboidSource source{CuboidSource::kCm3d};

  bool operator==(const Cuboid & other) const
  {
    return frame_id == other.frame_id && class_label == other.class_label &&
           score == other.score && center == other.center && dims == other.dims &&
           yaw == other.yaw && velocity == other.velocity && source == other.source;
  }
};

// Throws ValidationError unless dims > 0, yaw in (-pi, pi] and score in [0, 1].
// External detections carry raw logits, so their score range is not checked.
void validate_cuboid(const Cuboid & cuboid, const std::string & where);

}  // namespace cuboidlift

#endif  // CUBOIDLIFT__CUBOID_HPP_
