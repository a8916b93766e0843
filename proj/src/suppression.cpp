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

#include "cuboidlift/suppression.hpp"

#include "cuboidlift/error.hpp"

#include <algorithm>
#include <numeric>

namespace cuboidlift::suppression
{

const DistanceThresholds & default_distance_thresholds()
{
  static const DistanceThresholds thresholds = {
    {"car", 4.0},        {"truck", 4.0},      {"bus", 4.0},     {"trailer", 4.0},
    {"construction_vehicle", 4.0}, {"motorcycle", 1.0}, {"bicycle", 1.0},
    {"pedestrian", 0.5}, {"traffic_cone", 0.5}, {"barrier", 0.5},
  };
  return thresholds;
}

std::vector<std::size_t> nms3d_indices(const std::vector<Cuboid> & cuboids,
                                       const DistanceThresholds & thresholds,
                                       const Eigen::Vector2d & ego_xy)
{
  std::vector<double> ego_dist(cuboids.size());
  for (std::size_t i = 0; i < cuboids.size(); ++i) {
    if (!thresholds.count(cuboids[i].class_label)) {
      throw ValidationError("nms3d_thresholds", "no distance threshold for class '" +
                                                  cuboids[i].class_label + "'");
    }
    ego_dist[i] = (cuboids[i].center.head<2>() - ego_xy).norm();
  }

  std::vector<std::size_t> order(cuboids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cuboids[a].score != cuboids[b].score) return cuboids[a].score > cuboids[b].score;
    if (ego_dist[a] != ego_dist[b]) return ego_dist[a] < ego_dist[b];
    return a < b;
  });

  // Kept indices bucketed per class so each candidate only scans its own class.
  std::map<std::string, std::vector<std::size_t>> kept_by_class;
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const Cuboid & c = cuboids[i];
    const double threshold = thresholds.at(c.class_label);
    auto & same = kept_by_class[c.class_label];
    const bool suppressed = std::any_of(same.begin(), same.end(), [&](std::size_t k) {
      return (cuboids[k].center.head<2>() - c.center.head<2>()).norm() < threshold;
    });
    if (suppressed) continue;
    same.push_back(i);
    kept.push_back(i);
  }
  return kept;
}

std::vector<Cuboid> nms3d(const std::vector<Cuboid> & cuboids, const DistanceThresholds & thresholds,
                          const Eigen::Vector2d & ego_xy)
{
  std::vector<Cuboid> out;
  for (std::size_t i : nms3d_indices(cuboids, thresholds, ego_xy)) out.push_back(cuboids[i]);
  return out;
}

}  // namespace cuboidlift::suppression
