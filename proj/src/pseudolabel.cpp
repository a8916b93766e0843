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

#include "cuboidlift/pseudolabel.hpp"

#include "cuboidlift/error.hpp"
#include "cuboidlift/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cuboidlift::pseudolabel
{

using nlohmann::json;

void validate_config(const PipelineConfig & cfg)
{
  if (!(cfg.score_min >= 0.0 && cfg.score_min <= 1.0)) {
    throw ValidationError("pipeline.score_min", "must lie in [0, 1]");
  }
  if (!(cfg.nms2d_iou >= 0.0 && cfg.nms2d_iou <= 1.0)) {
    throw ValidationError("pipeline.nms2d_iou", "must lie in [0, 1]");
  }
  if (cfg.erosion_kernel < 1 || cfg.erosion_kernel % 2 == 0) {
    throw ValidationError("pipeline.erosion_kernel", "must be an odd size >= 1");
  }
  if (cfg.accumulation_frames < 1) {
    throw ValidationError("pipeline.accumulation_frames", "must be >= 1");
  }
  if (!std::isfinite(cfg.nonvehicle_default_yaw)) {
    throw ValidationError("pipeline.nonvehicle_default_yaw", "must be finite");
  }
  for (const auto & [label, t] : cfg.nms3d_thresholds) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ValidationError("pipeline.nms3d_thresholds." + label, "must be a finite distance >= 0");
    }
  }
}

void validate_config(const PipelineConfig & cfg, const io::SceneBundle & bundle)
{
  validate_config(cfg);
  for (const auto & c : bundle.classes) {
    if (!bundle.shape_priors.count(c)) {
      throw ValidationError(bundle.shape_priors_path, "no shape prior for class '" + c + "'");
    }
    if (!cfg.nms3d_thresholds.count(c)) {
      throw ValidationError("pipeline.nms3d_thresholds", "no distance threshold for class '" + c + "'");
    }
  }
}

json config_to_json(const PipelineConfig & cfg)
{
  return json{{"score_min", cfg.score_min},
              {"nms2d_iou", cfg.nms2d_iou},
              {"erosion_kernel", cfg.erosion_kernel},
              {"accumulation_frames", cfg.accumulation_frames},
              {"vehicle_classes", cfg.vehicle_classes},
              {"nonvehicle_default_yaw", cfg.nonvehicle_default_yaw},
              {"lane_fallback_to_default", cfg.lane_fallback_to_default},
              {"medoid_compensation", cfg.medoid_compensation},
              {"nms3d_thresholds", cfg.nms3d_thresholds}};
}

PipelineConfig config_from_json(const json & j)
{
  PipelineConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ValidationError("pipeline", "expected an object");
  for (const auto & [key, value] : j.items()) {
    const std::string where = "pipeline." + key;
    try {
      if (key == "score_min") {
        cfg.score_min = value.get<double>();
      } else if (key == "nms2d_iou") {
        cfg.nms2d_iou = value.get<double>();
      } else if (key == "erosion_kernel") {
        cfg.erosion_kernel = value.get<int>();
      } else if (key == "accumulation_frames") {
        cfg.accumulation_frames = value.get<int>();
      } else if (key == "vehicle_classes") {
        cfg.vehicle_classes = value.get<std::set<std::string>>();
      } else if (key == "nonvehicle_default_yaw") {
        cfg.nonvehicle_default_yaw = value.get<double>();
      } else if (key == "lane_fallback_to_default") {
        cfg.lane_fallback_to_default = value.get<bool>();
      } else if (key == "medoid_compensation") {
        cfg.medoid_compensation = value.get<bool>();
      } else if (key == "nms3d_thresholds") {
        cfg.nms3d_thresholds = value.get<suppression::DistanceThresholds>();
      } else {
        throw ValidationError(where, "unknown key");
      }
    } catch (const json::exception & e) {
      throw ValidationError(where, e.what());
    }
  }
  validate_config(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// 2D stage

double box_iou(const io::PixelBox & a, const io::PixelBox & b)
{
  const double iw = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double ih = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = iw * ih;
  const double uni = (a.x_max - a.x_min) * (a.y_max - a.y_min) +
                     (b.x_max - b.x_min) * (b.y_max - b.y_min) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace
{

std::vector<std::size_t> nms2d_indices(const std::vector<io::InstanceMask2D> & masks,
                                       const PipelineConfig & cfg)
{
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].score >= cfg.score_min) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return masks[a].score > masks[b].score; });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return box_iou(masks[k].bbox, masks[i].bbox) > cfg.nms2d_iou;
    });
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

}  // namespace

std::vector<io::InstanceMask2D> filter_and_nms2d(const std::vector<io::InstanceMask2D> & masks,
                                                 const PipelineConfig & cfg)
{
  std::vector<io::InstanceMask2D> out;
  for (std::size_t i : nms2d_indices(masks, cfg)) out.push_back(masks[i]);
  return out;
}

io::Bitmap erode_mask(const io::Bitmap & mask, int kernel)
{
  if (kernel < 1 || kernel % 2 == 0) throw ValidationError("erosion_kernel", "must be an odd size >= 1");
  const int r = kernel / 2;
  const int w = mask.width();
  const int h = mask.height();
  if (r == 0) return mask;

  // Separable: a square window is fully set iff every row span in it is.
  io::Bitmap rows(w, h);
  for (int y = 0; y < h; ++y) {
    int run = 0;  // consecutive set pixels ending at x
    for (int x = 0; x < w; ++x) {
      run = mask.at(x, y) ? run + 1 : 0;
      const int cx = x - r;
      if (cx >= r && run >= kernel) rows.set(cx, y);
    }
  }
  io::Bitmap out(w, h);
  for (int x = 0; x < w; ++x) {
    int run = 0;
    for (int y = 0; y < h; ++y) {
      run = rows.at(x, y) ? run + 1 : 0;
      const int cy = y - r;
      if (cy >= r && run >= kernel) out.set(x, cy);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 3D stage

std::vector<Vec3> accumulate_sweeps(std::span<const io::FrameRecord> frames, std::size_t target, int n)
{
  if (target >= frames.size()) throw ValidationError("accumulate_sweeps", "target frame out of range");
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, n)), target + 1);
  const geometry::SE3Pose global_to_target = frames[target].ego_pose.inverse();

  std::vector<Vec3> out;
  std::size_t total = 0;
  for (std::size_t k = 0; k < count; ++k) total += frames[target - k].points.size();
  out.reserve(total);
  for (std::size_t k = 0; k < count; ++k) {
    const auto & sweep = frames[target - k];
    const auto pts = io::to_vec3(sweep.points);
    if (k == 0) {
      out.insert(out.end(), pts.begin(), pts.end());
      continue;
    }
    const auto moved = geometry::transform_points(pts, global_to_target * sweep.ego_pose);
    out.insert(out.end(), moved.begin(), moved.end());
  }
  return out;
}

std::vector<Vec3> group_points(std::span<const Vec3> points_ego, const geometry::CameraModel & cam,
                               const io::Bitmap & mask)
{
  const geometry::SE3Pose ego_to_cam = cam.extrinsic.inverse();
  const Eigen::Matrix3d r = ego_to_cam.rotation_matrix();
  const Vec3 t = ego_to_cam.translation();
  std::vector<Vec3> out;
  for (const auto & p : points_ego) {
    const auto proj = geometry::project_point(r * p + t, cam);
    if (!proj.valid) continue;
    const int px = static_cast<int>(std::floor(proj.u));
    const int py = static_cast<int>(std::floor(proj.v));
    if (mask.at(px, py)) out.push_back(p);
  }
  return out;
}

namespace
{

double distance(const Vec3 & a, const Vec3 & b)
{
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

std::size_t medoid_index(std::span<const Vec3> points)
{
  if (points.empty()) throw ValidationError("medoid", "empty point set");
  const std::size_t n = points.size();

  // Candidates near the centroid tend to win, so visit them first; the
  // running best then prunes most other candidates after a partial sum.
  Vec3 centroid = Vec3::Zero();
  for (const auto & p : points) centroid += p;
  centroid /= static_cast<double>(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> to_centroid(n);
  for (std::size_t i = 0; i < n; ++i) to_centroid[i] = (points[i] - centroid).squaredNorm();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return to_centroid[a] < to_centroid[b]; });

  double best_sum = std::numeric_limits<double>::infinity();
  std::size_t best = n;
  for (std::size_t c : order) {
    double sum = 0.0;
    bool pruned = false;
    for (std::size_t j = 0; j < n; ++j) {
      sum += distance(points[j], points[c]);
      // Partial sums only grow, so this candidate can no longer win.
      if (sum > best_sum || (sum == best_sum && c > best)) {
        pruned = true;
        break;
      }
    }
    if (pruned) continue;
    if (sum < best_sum || (sum == best_sum && c < best)) {
      best_sum = sum;
      best = c;
    }
  }
  return best;
}

Vec3 medoid(std::span<const Vec3> points) { return points[medoid_index(points)]; }

double compensation_distance(const Vec2 & center, const Vec2 & ego, double yaw, double width,
                             double length)
{
  const Vec2 ce = ego - center;
  if (ce.x() == 0.0 && ce.y() == 0.0) {
    throw ValidationError("compensate_medoid", "center coincides with ego; direction undefined");
  }
  const double alpha = std::atan2(ce.y(), ce.x());
  const double rel = alpha - yaw;
  return std::min(std::abs(width / (2.0 * std::sin(rel))), std::abs(length / (2.0 * std::cos(rel))));
}

Vec2 compensate_medoid(const Vec2 & center, const Vec2 & ego, double yaw, double width, double length)
{
  const double d = compensation_distance(center, ego, yaw, width, length);
  const Vec2 ce = ego - center;
  const double alpha = std::atan2(ce.y(), ce.x());
  return {center.x() - d * std::cos(alpha), center.y() - d * std::sin(alpha)};
}

double assign_orientation(const Vec2 & center, const std::string & class_label,
                          const io::LaneGraph & lanes, const PipelineConfig & cfg)
{
  if (!cfg.vehicle_classes.count(class_label)) return cfg.nonvehicle_default_yaw;
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_yaw = cfg.nonvehicle_default_yaw;
  bool found = false;
  for (const auto & lane : lanes.lanes) {
    for (std::size_t k = 0; k + 1 < lane.size(); ++k) {
      const Vec2 & a = lane[k];
      const Vec2 ab = lane[k + 1] - a;
      const double len2 = ab.squaredNorm();
      if (len2 == 0.0) continue;
      const double t = std::clamp((center - a).dot(ab) / len2, 0.0, 1.0);
      const double d2 = (a + t * ab - center).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_yaw = std::atan2(ab.y(), ab.x());
        found = true;
      }
    }
  }
  if (!found) {
    if (cfg.lane_fallback_to_default) return cfg.nonvehicle_default_yaw;
    throw ValidationError("lanes", "vehicle class '" + class_label + "' needs a non-empty lane graph");
  }
  return geometry::normalize_yaw(best_yaw);
}

FrameResult generate_frame_traced(const io::SceneBundle & bundle, std::size_t frame_index,
                                  const PipelineConfig & cfg)
{
  const io::FrameRecord & frame = bundle.frames.at(frame_index);
  FrameResult result;
  const bool any_masks = std::any_of(frame.cameras.begin(), frame.cameras.end(),
                                     [](const io::CameraEntry & e) { return !e.masks.empty(); });
  if (!any_masks) return result;

  const std::vector<Vec3> points = accumulate_sweeps(bundle.frames, frame_index, cfg.accumulation_frames);
  const Vec2 ego_xy = frame.ego_pose.translation().head<2>();

  std::vector<Cuboid> candidates;
  for (const auto & entry : frame.cameras) {
    const auto & cam = entry.camera;
    for (std::size_t mi : nms2d_indices(entry.masks, cfg)) {
      const auto & mask = entry.masks[mi];
      const io::Bitmap eroded = erode_mask(io::decode_rle(mask.rle, cam.width, cam.height),
                                           cfg.erosion_kernel);
      const std::vector<Vec3> grouped = group_points(points, cam, eroded);
      if (grouped.empty()) continue;

      const Vec3 raw = frame.ego_pose.apply(medoid(grouped));
      const double yaw = assign_orientation(raw.head<2>(), mask.class_label, bundle.lane_graph, cfg);
      const Dims & prior = bundle.shape_priors.at(mask.class_label);
      Vec2 center_xy = raw.head<2>();
      if (cfg.medoid_compensation && center_xy != ego_xy) {
        center_xy = compensate_medoid(center_xy, ego_xy, yaw, prior.width, prior.length);
      }

      Cuboid c;
      c.frame_id = frame.frame_id;
      c.class_label = mask.class_label;
      c.score = mask.score;
      c.center = {center_xy.x(), center_xy.y(), raw.z()};
      c.dims = prior;
      c.yaw = yaw;
      c.source = CuboidSource::kCm3d;
      candidates.push_back(c);
      result.traces.push_back({cam.camera_id, mi, grouped.size(), raw, c});
    }
  }
  result.cuboids = suppression::nms3d(candidates, cfg.nms3d_thresholds, ego_xy);
  return result;
}

std::vector<Cuboid> generate_frame(const io::SceneBundle & bundle, std::size_t frame_index,
                                   const PipelineConfig & cfg)
{
  return generate_frame_traced(bundle, frame_index, cfg).cuboids;
}

std::vector<std::vector<Cuboid>> generate_all(const io::SceneBundle & bundle, const PipelineConfig & cfg,
                                              int jobs)
{
  validate_config(cfg, bundle);
  std::vector<std::vector<Cuboid>> out(bundle.frames.size());
  parallel_for(bundle.frames.size(), jobs,
               [&](std::size_t i) { out[i] = generate_frame(bundle, i, cfg); });
  return out;
}

}  // namespace cuboidlift::pseudolabel
