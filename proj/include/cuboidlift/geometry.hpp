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

#ifndef CUBOIDLIFT__GEOMETRY_HPP_
#define CUBOIDLIFT__GEOMETRY_HPP_

#include "cuboidlift/cuboid.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace cuboidlift::geometry
{

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into (-pi, pi].
double normalize_yaw(double yaw);

// Rigid transform p' = R p + t.
class SE3Pose
{
public:
  SE3Pose() = default;

  // Throws ValidationError if the quaternion is not unit within 1e-9 or any
  // component is non-finite.
  SE3Pose(const Eigen::Quaterniond & rotation, const Vec3 & translation);

  static SE3Pose identity() { return {}; }
  static SE3Pose from_yaw(double yaw, const Vec3 & translation);

  const Eigen::Quaterniond & rotation() const { return rotation_; }
  const Vec3 & translation() const { return translation_; }
  Eigen::Matrix3d rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Vec3 apply(const Vec3 & p) const { return rotation_ * p + translation_; }
  SE3Pose inverse() const;
  // (a * b).apply(p) == a.apply(b.apply(p))
  SE3Pose operator*(const SE3Pose & other) const;

  bool operator==(const SE3Pose & other) const
  {
    return rotation_.coeffs() == other.rotation_.coeffs() && translation_ == other.translation_;
  }

private:
  Eigen::Quaterniond rotation_{Eigen::Quaterniond::Identity()};
  Vec3 translation_{Vec3::Zero()};
};

// Pinhole camera without distortion. The extrinsic maps camera-frame points
// (z forward, x right, y down) into the ego frame.
struct CameraModel
{
  std::string camera_id;
  double fx{};
  double fy{};
  double cx{};
  double cy{};
  int width{};
  int height{};
  SE3Pose extrinsic;

  bool operator==(const CameraModel &) const = default;
};

void validate_camera(const CameraModel & cam, const std::string & where);

struct ProjectedPoint
{
  double u{};
  double v{};
  double depth{};
  bool valid{false};
};

// Bird's-eye-view rectangle: length along yaw, width across.
struct BevRect
{
  double center_x{};
  double center_y{};
  double width{};
  double length{};
  double yaw{};
};

BevRect bev_rect(const Cuboid & cuboid);

// Throws ValidationError on any non-finite coordinate.
std::vector<Vec3> transform_points(std::span<const Vec3> points, const SE3Pose & pose);

// A point is valid iff depth > 0 and 0 <= u < width, 0 <= v < height.
std::vector<ProjectedPoint> project_to_image(std::span<const Vec3> points_cam, const CameraModel & cam);
ProjectedPoint project_point(const Vec3 & p_cam, const CameraModel & cam);
Vec3 back_project(double u, double v, double depth, const CameraModel & cam);

// Counter-clockwise corners.
std::array<Vec2, 4> bev_corners(const BevRect & rect);

using Polygon = std::vector<Vec2>;

// Signed shoelace area, positive for counter-clockwise vertex order.
double polygon_area(const Polygon & polygon);

// Sutherland-Hodgman clip of `subject` against a convex counter-clockwise
// `clip` polygon.
Polygon clip_convex(const Polygon & subject, const Polygon & clip);

double bev_intersection_area(const BevRect & a, const BevRect & b);
double bev_iou(const BevRect & a, const BevRect & b);

// Rotated BEV overlap times vertical overlap, over the union of volumes.
double iou3d(const Cuboid & a, const Cuboid & b);

}  // namespace cuboidlift::geometry

#endif  // CUBOIDLIFT__GEOMETRY_HPP_
