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

#ifndef CUBOIDLIFT__SUPPRESSION_HPP_
#define CUBOIDLIFT__SUPPRESSION_HPP_

#include "cuboidlift/cuboid.hpp"

#include <map>
#include <string>
#include <vector>

namespace cuboidlift::suppression
{

using DistanceThresholds = std::map<std::string, double>;

// Class-wise greedy NMS on BEV center distance. Candidates are visited by
// descending score, ties by smaller distance to `ego_xy`, then input index. A
// candidate is dropped iff an already kept cuboid of the same class lies
// strictly closer than threshold(class). Survivors come back in visiting
// order. Throws ValidationError if a class has no threshold.
std::vector<Cuboid> nms3d(const std::vector<Cuboid> & cuboids, const DistanceThresholds & thresholds,
                          const Eigen::Vector2d & ego_xy = Eigen::Vector2d::Zero());

// Indices into `cuboids` of the survivors, in visiting order.
std::vector<std::size_t> nms3d_indices(const std::vector<Cuboid> & cuboids,
                                       const DistanceThresholds & thresholds,
                                       const Eigen::Vector2d & ego_xy = Eigen::Vector2d::Zero());

// 4 m for large vehicles, 1 m for two-wheelers, 0.5 m for the rest.
const DistanceThresholds & default_distance_thresholds();

}  // namespace cuboidlift::suppression

#endif  // CUBOIDLIFT__SUPPRESSION_HPP_
