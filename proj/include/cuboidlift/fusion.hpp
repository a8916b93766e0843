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

#ifndef CUBOIDLIFT__FUSION_HPP_
#define CUBOIDLIFT__FUSION_HPP_

#include "cuboidlift/cuboid.hpp"

#include <json.hpp>

#include <vector>

namespace cuboidlift::fusion
{

struct FusionConfig
{
  double tau{1.0};      // logit temperature for external scores
  double iou_min{0.1};  // BEV IoU floor for a match
};

void validate_config(const FusionConfig & cfg);
nlohmann::json config_to_json(const FusionConfig & cfg);
FusionConfig config_from_json(const nlohmann::json & j);

struct Match
{
  std::size_t cm3d{};
  std::size_t external{};
  double iou{};

  bool operator==(const Match &) const = default;
};

struct MatchReport
{
  std::vector<Match> matched;  // acceptance order
  std::vector<std::size_t> unmatched_cm3d;
  std::vector<std::size_t> unmatched_external;

  bool operator==(const MatchReport &) const = default;
};

// sigmoid(logit / tau)
double calibrate(double logit, double tau);

// Greedy one-to-one matching on BEV IoU: overlapping pairs with IoU >= iou_min are taken
// in descending IoU (ties: lower cm3d index, then lower external index).
MatchReport greedy_match(const std::vector<Cuboid> & cm3d, const std::vector<Cuboid> & external,
                         const FusionConfig & cfg);

// Single-frame late fusion. A matched pair keeps the CM3D center, class and
// score, and takes dims and yaw from whichever member is more confident after
// calibrating the external logit (ties keep CM3D). Unmatched CM3D cuboids pass
// through unchanged; unmatched external cuboids are dropped. Output follows
// CM3D input order.
std::vector<Cuboid> fuse(const std::vector<Cuboid> & cm3d, const std::vector<Cuboid> & external,
                         const FusionConfig & cfg);

// Groups both inputs by frame_id and fuses frame by frame. The result keeps
// the order of `cm3d`.
std::vector<Cuboid> fuse_frames(const std::vector<Cuboid> & cm3d, const std::vector<Cuboid> & external,
                                const FusionConfig & cfg);

}  // namespace cuboidlift::fusion

#endif  // CUBOIDLIFT__FUSION_HPP_
