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

#include "cuboidlift/geometry.hpp"

#include "cuboidlift/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cuboidlift
{

std::string_view to_string(CuboidSource source)
{
  switch (source) {
    case CuboidSource::kCm3d:
      return "cm3d";
    case CuboidSource::kExternal:
      return "external";
    case CuboidSource::kFused:
      return "fused";
    case CuboidSource::kGroundTruth:
      return "ground_truth";
  }
  return "cm3d";
}

CuboidSource cuboid_source_from_string(std::string_view name)
{
  if (name == "cm3d") return CuboidSource::kCm3d;
  if (name == "external") return CuboidSource::kExternal;
  if (name == "fused") return CuboidSource::kFused;
  if (name == "ground_truth") return CuboidSource::kGroundTruth;
  throw ValidationError("source", "unknown cuboid source '" + std::string(name) + "'");
}

void validate_cuboid(const Cuboid & cuboid, const std::string & where)
{
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!(cuboid.dims.width > 0.0 && cuboid.dims.length > 0.0 && cuboid.dims.height > 0.0) ||
      !finite(cuboid.dims.width) || !finite(cuboid.dims.length) || !finite(cuboid.dims.height)) {
    throw ValidationError(where + ".dims", "dimensions must be positive and finite");
  }
  if (!cuboid.center.allFinite()) {
    throw ValidationError(where + ".center", "non-finite center");
  }
  if (!(cuboid.yaw > -geometry::kPi && cuboid.yaw <= geometry::kPi)) {
    throw ValidationError(where + ".yaw", "yaw must lie in (-pi, pi]");
  }
  if (cuboid.source != CuboidSource::kExternal && !(cuboid.score >= 0.0 && cuboid.score <= 1.0)) {
    throw ValidationError(where + ".score", "score must lie in [0, 1]");
  }
  if (cuboid.source == CuboidSource::kExternal && !finite(cuboid.score)) {
    throw ValidationError(where + ".score", "non-finite logit");
  }
  if (cuboid.velocity && !cuboid.velocity->allFinite()) {
    throw ValidationError(where + ".velocity", "non-finite velocity");
  }
  if (cuboid.class_label.empty() && cuboid.source != CuboidSource::kExternal) {
    throw ValidationError(where + ".class_label", "empty class label");
  }
}

}  // namespace cuboidlift

namespace cuboidlift::geometry
{

double normalize_yaw(double yaw)
{
  double r = std::remainder(yaw, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

SE3Pose::SE3Pose(const Eigen::Quaterniond & rotation, const Vec3 & translation)
: rotation_(rotation), translation_(translation)
{
  if (!rotation.coeffs().allFinite() || !translation.allFinite()) {
    throw ValidationError("pose", "non-finite component");
  }
  if (std::abs(rotation.norm() - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "quaternion norm " << rotation.norm() << " is not 1";
    throw ValidationError("pose", os.str());
  }
}

SE3Pose SE3Pose::from_yaw(double yaw, const Vec3 & translation)
{
  return SE3Pose(Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ())), translation);
}

SE3Pose SE3Pose::inverse() const
{
  SE3Pose out;
  out.rotation_ = rotation_.conjugate();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

SE3Pose SE3Pose::operator*(const SE3Pose & other) const
{
  SE3Pose out;
  out.rotation_ = rotation_ * other.rotation_;
  out.translation_ = rotation_ * other.translation_ + translation_;
  return out;
}

void validate_camera(const CameraModel & cam, const std::string & where)
{
  if (cam.camera_id.empty()) throw ValidationError(where + ".camera_id", "empty camera id");
  if (cam.width <= 0 || cam.height <= 0) {
    throw ValidationError(where + ".width", "image size must be positive");
  }
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) {
    throw ValidationError(where + ".fx", "focal lengths must be positive");
  }
  if (!(cam.cx >= 0.0 && cam.cx < cam.width)) {
    throw ValidationError(where + ".cx", "principal point outside image");
  }
  if (!(cam.cy >= 0.0 && cam.cy < cam.height)) {
    throw ValidationError(where + ".cy", "principal point outside image");
  }
}

BevRect bev_rect(const Cuboid & cuboid)
{
  return {cuboid.center.x(), cuboid.center.y(), cuboid.dims.width, cuboid.dims.length, cuboid.yaw};
}

std::vector<Vec3> transform_points(std::span<const Vec3> points, const SE3Pose & pose)
{
  const Eigen::Matrix3d r = pose.rotation_matrix();
  const Vec3 & t = pose.translation();
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw ValidationError("points[" + std::to_string(i) + "]", "non-finite coordinate");
    }
    out.emplace_back(r * points[i] + t);
  }
  return out;
}

ProjectedPoint project_point(const Vec3 & p, const CameraModel & cam)
{
  ProjectedPoint out;
  out.depth = p.z();
  if (!(p.z() > 0.0)) return out;
  out.u = cam.fx * p.x() / p.z() + cam.cx;
  out.v = cam.fy * p.y() / p.z() + cam.cy;
  out.valid = out.u >= 0.0 && out.u < cam.width && out.v >= 0.0 && out.v < cam.height;
  return out;
}

std::vector<ProjectedPoint> project_to_image(std::span<const Vec3> points_cam, const CameraModel & cam)
{
  std::vector<ProjectedPoint> out;
  out.reserve(points_cam.size());
  for (const auto & p : points_cam) out.push_back(project_point(p, cam));
  return out;
}

Vec3 back_project(double u, double v, double depth, const CameraModel & cam)
{
  return {(u - cam.cx) * depth / cam.fx, (v - cam.cy) * depth / cam.fy, depth};
}

std::array<Vec2, 4> bev_corners(const BevRect & rect)
{
  const double c = std::cos(rect.yaw);
  const double s = std::sin(rect.yaw);
  const Vec2 along(c * rect.length * 0.5, s * rect.length * 0.5);
  const Vec2 across(-s * rect.width * 0.5, c * rect.width * 0.5);
  const Vec2 center(rect.center_x, rect.center_y);
  return {center + along + across, center - along + across, center - along - across,
          center + along - across};
}

double polygon_area(const Polygon & polygon)
{
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 & a = polygon[i];
    const Vec2 & b = polygon[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

namespace
{

double cross(const Vec2 & a, const Vec2 & b, const Vec2 & p)
{
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

Polygon corners_polygon(const BevRect & rect)
{
  const auto c = bev_corners(rect);
  return {c.begin(), c.end()};
}

}  // namespace

Polygon clip_convex(const Polygon & subject, const Polygon & clip)
{
  Polygon output = subject;
  const std::size_t n = clip.size();
  for (std::size_t e = 0; e < n && !output.empty(); ++e) {
    const Vec2 & a = clip[e];
    const Vec2 & b = clip[(e + 1) % n];
    Polygon input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2 & cur = input[i];
      const Vec2 & prev = input[(i + input.size() - 1) % input.size()];
      const double c_cur = cross(a, b, cur);
      const double c_prev = cross(a, b, prev);
      const bool in_cur = c_cur >= 0.0;
      const bool in_prev = c_prev >= 0.0;
      if (in_cur != in_prev) {
        const double t = c_prev / (c_prev - c_cur);
        output.push_back(prev + t * (cur - prev));
      }
      if (in_cur) output.push_back(cur);
    }
  }
  return output;
}

double bev_intersection_area(const BevRect & a, const BevRect & b)
{
  return std::max(0.0, polygon_area(clip_convex(corners_polygon(a), corners_polygon(b))));
}

double bev_iou(const BevRect & a, const BevRect & b)
{
  const Polygon pa = corners_polygon(a);
  const Polygon pb = corners_polygon(b);
  const double area_a = polygon_area(pa);
  const double area_b = polygon_area(pb);
  const double inter = std::max(0.0, polygon_area(clip_convex(pa, pb)));
  const double uni = area_a + area_b - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou3d(const Cuboid & a, const Cuboid & b)
{
  const Polygon pa = corners_polygon(bev_rect(a));
  const Polygon pb = corners_polygon(bev_rect(b));
  const double area_a = polygon_area(pa);
  const double area_b = polygon_area(pb);
  const double inter_bev = std::max(0.0, polygon_area(clip_convex(pa, pb)));

  const double za0 = a.center.z() - 0.5 * a.dims.height;
  const double za1 = a.center.z() + 0.5 * a.dims.height;
  const double zb0 = b.center.z() - 0.5 * b.dims.height;
  const double zb1 = b.center.z() + 0.5 * b.dims.height;
  const double overlap_z = std::max(0.0, std::min(za1, zb1) - std::max(za0, zb0));

  const double inter = inter_bev * overlap_z;
  const double uni = area_a * a.dims.height + area_b * b.dims.height - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace cuboidlift::geometry
