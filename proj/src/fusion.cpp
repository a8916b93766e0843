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

#include "cuboidlift/fusion.hpp"

#include "cuboidlift/error.hpp"
#include "cuboidlift/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

namespace cuboidlift::fusion
{

using nlohmann::json;

void validate_config(const FusionConfig & cfg)
{
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) throw ValidationError("fusion.tau", "must be > 0");
  if (!(cfg.iou_min >= 0.0 && cfg.iou_min < 1.0)) {
    throw ValidationError("fusion.iou_min", "must lie in [0, 1)");
  }
}

json config_to_json(const FusionConfig & cfg) { return json{{"tau", cfg.tau}, {"iou_min", cfg.iou_min}}; }

FusionConfig config_from_json(const json & j)
{
  FusionConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ValidationError("fusion", "expected an object");
  for (const auto & [key, value] : j.items()) {
    try {
      if (key == "tau") {
        cfg.tau = value.get<double>();
      } else if (key == "iou_min") {
        cfg.iou_min = value.get<double>();
      } else {
        throw ValidationError("fusion." + key, "unknown key");
      }
    } catch (const json::exception & e) {
      throw ValidationError("fusion." + key, e.what());
    }
  }
  validate_config(cfg);
  return cfg;
}

double calibrate(double logit, double tau)
{
  if (!(tau > 0.0)) throw ValidationError("tau", "must be > 0");
  const double x = logit / tau;
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

MatchReport greedy_match(const std::vector<Cuboid> & cm3d, const std::vector<Cuboid> & external,
                         const FusionConfig & cfg)
{
  std::vector<Match> pairs;
  for (std::size_t i = 0; i < cm3d.size(); ++i) {
    const auto a = geometry::bev_rect(cm3d[i]);
    for (std::size_t j = 0; j < external.size(); ++j) {
      const double iou = geometry::bev_iou(a, geometry::bev_rect(external[j]));
      if (iou >= cfg.iou_min && iou > 0.0) pairs.push_back({i, j, iou});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Match & a, const Match & b) {
    return std::tie(b.iou, a.cm3d, a.external) < std::tie(a.iou, b.cm3d, b.external);
  });

  MatchReport report;
  std::vector<bool> used_a(cm3d.size(), false);
  std::vector<bool> used_b(external.size(), false);
  for (const auto & p : pairs) {
    if (used_a[p.cm3d] || used_b[p.external]) continue;
    used_a[p.cm3d] = true;
    used_b[p.external] = true;
    report.matched.push_back(p);
  }
  for (std::size_t i = 0; i < cm3d.size(); ++i) {
    if (!used_a[i]) report.unmatched_cm3d.push_back(i);
  }
  for (std::size_t j = 0; j < external.size(); ++j) {
    if (!used_b[j]) report.unmatched_external.push_back(j);
  }
  return report;
}

std::vector<Cuboid> fuse(const std::vector<Cuboid> & cm3d, const std::vector<Cuboid> & external,
                         const FusionConfig & cfg)
{
  validate_config(cfg);
  const MatchReport report = greedy_match(cm3d, external, cfg);
  std::vector<Cuboid> out = cm3d;
  for (const auto & m : report.matched) {
    Cuboid & fused = out[m.cm3d];
    const Cuboid & ext = external[m.external];
    if (calibrate(ext.score, cfg.tau) > fused.score) {
      fused.dims = ext.dims;
      fused.yaw = ext.yaw;
    }
    fused.source = CuboidSource::kFused;
  }
  return out;
}

std::vector<Cuboid> fuse_frames(const std::vector<Cuboid> & cm3d, const std::vector<Cuboid> & external,
                                const FusionConfig & cfg)
{
  std::map<std::string, std::vector<std::size_t>> cm3d_by_frame;
  std::map<std::string, std::vector<Cuboid>> external_by_frame;
  for (std::size_t i = 0; i < cm3d.size(); ++i) cm3d_by_frame[cm3d[i].frame_id].push_back(i);
  for (const auto & e : external) external_by_frame[e.frame_id].push_back(e);

  std::vector<Cuboid> out = cm3d;
  for (const auto & [frame_id, indices] : cm3d_by_frame) {
    auto it = external_by_frame.find(frame_id);
    if (it == external_by_frame.end()) continue;
    std::vector<Cuboid> frame_cm3d;
    for (std::size_t i : indices) frame_cm3d.push_back(cm3d[i]);
    const auto fused = fuse(frame_cm3d, it->second, cfg);
    for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] = fused[k];
  }
  return out;
}

}  // namespace cuboidlift::fusion
