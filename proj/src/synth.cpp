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

#include "cuboidlift/synth.hpp"

#include "cuboidlift/error.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <iomanip>
#include <limits>
#include <sstream>

namespace cuboidlift::synth
{

using geometry::kPi;
using nlohmann::json;

std::uint64_t CounterRng::next_u64()
{
  ++counter_;
  std::uint64_t z = seed_ + counter_ * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t CounterRng::index(std::size_t n)
{
  if (n == 0) return 0;
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

double CounterRng::normal(double mean, double sigma)
{
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// ---------------------------------------------------------------------------
// Configuration

void validate_config(const SynthConfig & cfg)
{
  if (cfg.n_frames < 1) throw ValidationError("synth.n_frames", "must be >= 1");
  if (!(cfg.frame_dt > 0.0)) throw ValidationError("synth.frame_dt", "must be positive");
  if (cfg.ego.waypoints.size() < 2) throw ValidationError("synth.ego.waypoints", "need >= 2 waypoints");
  for (std::size_t i = 1; i < cfg.ego.waypoints.size(); ++i) {
    if (cfg.ego.waypoints[i] == cfg.ego.waypoints[i - 1]) {
      throw ValidationError("synth.ego.waypoints", "consecutive duplicate waypoints");
    }
  }
  if (!(cfg.ego.speed >= 0.0)) throw ValidationError("synth.ego.speed", "must be >= 0");
  if (!(cfg.lidar.noise_sigma >= 0.0)) throw ValidationError("synth.lidar.noise_sigma", "must be >= 0");
  if (cfg.lidar.points_per_object < 0 || cfg.lidar.ground_points < 0) {
    throw ValidationError("synth.lidar", "point counts must be >= 0");
  }
  if (!(cfg.lidar.range_max > 0.0)) throw ValidationError("synth.lidar.range_max", "must be positive");
  if (!(cfg.mask_score_min >= 0.0 && cfg.mask_score_min <= cfg.mask_score_max && cfg.mask_score_max <= 1.0)) {
    throw ValidationError("synth.mask_score", "need 0 <= min <= max <= 1");
  }
  for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
    const auto & o = cfg.objects[i];
    const std::string where = "synth.objects[" + std::to_string(i) + "]";
    if (!o.dims && !cfg.shape_priors.count(o.class_label)) {
      throw ValidationError(where + ".class_label", "no dims and no shape prior for '" + o.class_label + "'");
    }
    if (o.dims && !(o.dims->width > 0.0 && o.dims->length > 0.0 && o.dims->height > 0.0)) {
      throw ValidationError(where + ".dims", "dimensions must be positive");
    }
  }
  for (std::size_t i = 0; i < cfg.cameras.size(); ++i) {
    const auto & c = cfg.cameras[i];
    if (c.width <= 0 || c.height <= 0 || !(c.fx > 0.0) || !(c.fy > 0.0)) {
      throw ValidationError("synth.cameras[" + std::to_string(i) + "]", "invalid intrinsics");
    }
  }
}

namespace
{

json dims_json(const Dims & d) { return json::array({d.width, d.length, d.height}); }

Dims dims_from(const json & j, const std::string & where)
{
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ValidationError(where, "expected [width, length, height]");
  return {v[0], v[1], v[2]};
}

Vec2 vec2_from(const json & j, const std::string & where)
{
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw ValidationError(where, "expected [x, y]");
  return {v[0], v[1]};
}

}  // namespace

json config_to_json(const SynthConfig & cfg)
{
  json objects = json::array();
  for (const auto & o : cfg.objects) {
    json jo{{"class_label", o.class_label},
            {"raw_prompt", o.raw_prompt},
            {"position", {o.position.x(), o.position.y()}},
            {"yaw", o.yaw},
            {"velocity", {o.velocity.x(), o.velocity.y()}}};
    if (o.position_z_set) jo["position"].push_back(o.position.z());
    if (o.dims) jo["dims"] = dims_json(*o.dims);
    objects.push_back(jo);
  }
  json cameras = json::array();
  for (const auto & c : cfg.cameras) {
    cameras.push_back({{"camera_id", c.camera_id},
                       {"yaw", c.yaw},
                       {"fx", c.fx},
                       {"fy", c.fy},
                       {"width", c.width},
                       {"height", c.height},
                       {"mount", {c.mount.x(), c.mount.y(), c.mount.z()}}});
  }
  json waypoints = json::array();
  for (const auto & w : cfg.ego.waypoints) waypoints.push_back({w.x(), w.y()});
  json lanes = json::array();
  for (const auto & lane : cfg.lanes) {
    json pts = json::array();
    for (const auto & p : lane) pts.push_back({p.x(), p.y()});
    lanes.push_back(pts);
  }
  json priors = json::object();
  for (const auto & [label, d] : cfg.shape_priors) priors[label] = dims_json(d);
  return json{{"seed", cfg.seed},
              {"scene_id", cfg.scene_id},
              {"n_frames", cfg.n_frames},
              {"frame_dt", cfg.frame_dt},
              {"ego",
               {{"waypoints", waypoints},
                {"speed", cfg.ego.speed},
                {"sensor_height", cfg.ego.sensor_height}}},
              {"objects", objects},
              {"cameras", cameras},
              {"lidar",
               {{"points_per_object", cfg.lidar.points_per_object},
                {"range_max", cfg.lidar.range_max},
                {"noise_sigma", cfg.lidar.noise_sigma},
                {"ground_points", cfg.lidar.ground_points}}},
              {"lanes", lanes},
              {"mask_score_min", cfg.mask_score_min},
              {"mask_score_max", cfg.mask_score_max},
              {"min_mask_pixels", cfg.min_mask_pixels},
              {"shape_priors", priors},
              {"external",
               {{"enabled", cfg.external.enabled},
                {"center_sigma", cfg.external.center_sigma},
                {"yaw_sigma", cfg.external.yaw_sigma},
                {"dims_sigma", cfg.external.dims_sigma},
                {"logit_mean", cfg.external.logit_mean},
                {"logit_sigma", cfg.external.logit_sigma}}}};
}

namespace
{

void check_keys(const json & j, std::initializer_list<const char *> allowed, const std::string & where)
{
  if (!j.is_object()) throw ValidationError(where, "expected an object");
  for (const auto & [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char * a) { return key == a; })) {
      throw ValidationError(where + "." + key, "unknown key");
    }
  }
}

}  // namespace

SynthConfig config_from_json(const json & j)
{
  check_keys(j, {"seed", "scene_id", "n_frames", "frame_dt", "ego", "objects", "cameras", "lidar", "lanes",
                 "mask_score_min", "mask_score_max", "min_mask_pixels", "shape_priors", "external"},
             "synth");
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  SynthConfig cfg = default_config(seed);
  try {
    cfg.scene_id = j.value("scene_id", cfg.scene_id);
    cfg.n_frames = j.value("n_frames", cfg.n_frames);
    cfg.frame_dt = j.value("frame_dt", cfg.frame_dt);
    if (auto it = j.find("ego"); it != j.end()) {
      check_keys(*it, {"waypoints", "speed", "sensor_height"}, "synth.ego");
      if (auto w = it->find("waypoints"); w != it->end()) {
        cfg.ego.waypoints.clear();
        for (const auto & p : *w) cfg.ego.waypoints.push_back(vec2_from(p, "synth.ego.waypoints"));
      }
      cfg.ego.speed = it->value("speed", cfg.ego.speed);
      cfg.ego.sensor_height = it->value("sensor_height", cfg.ego.sensor_height);
    }
    if (auto it = j.find("objects"); it != j.end()) {
      cfg.objects.clear();
      for (const auto & jo : *it) {
        check_keys(jo, {"class_label", "raw_prompt", "position", "yaw", "dims", "velocity"}, "synth.objects");
        SynthObject o;
        o.class_label = jo.at("class_label").get<std::string>();
        o.raw_prompt = jo.value("raw_prompt", o.class_label);
        const auto p = jo.at("position").get<std::vector<double>>();
        if (p.size() != 2 && p.size() != 3) throw ValidationError("synth.objects.position", "expected 2 or 3 values");
        o.position = {p[0], p[1], p.size() == 3 ? p[2] : 0.0};
        o.position_z_set = p.size() == 3;
        o.yaw = jo.value("yaw", 0.0);
        if (auto d = jo.find("dims"); d != jo.end()) o.dims = dims_from(*d, "synth.objects.dims");
        if (auto v = jo.find("velocity"); v != jo.end()) o.velocity = vec2_from(*v, "synth.objects.velocity");
        cfg.objects.push_back(o);
      }
    }
    if (auto it = j.find("cameras"); it != j.end()) {
      cfg.cameras.clear();
      for (const auto & jc : *it) {
        check_keys(jc, {"camera_id", "yaw", "fx", "fy", "width", "height", "mount"}, "synth.cameras");
        SynthCamera c;
        c.camera_id = jc.at("camera_id").get<std::string>();
        c.yaw = jc.value("yaw", 0.0);
        c.fx = jc.at("fx").get<double>();
        c.fy = jc.value("fy", c.fx);
        c.width = jc.at("width").get<int>();
        c.height = jc.at("height").get<int>();
        if (auto m = jc.find("mount"); m != jc.end()) {
          const auto v = m->get<std::vector<double>>();
          if (v.size() != 3) throw ValidationError("synth.cameras.mount", "expected [x, y, z]");
          c.mount = {v[0], v[1], v[2]};
        }
        cfg.cameras.push_back(c);
      }
    }
    if (auto it = j.find("lidar"); it != j.end()) {
      check_keys(*it, {"points_per_object", "range_max", "noise_sigma", "ground_points"}, "synth.lidar");
      cfg.lidar.points_per_object = it->value("points_per_object", cfg.lidar.points_per_object);
      cfg.lidar.range_max = it->value("range_max", cfg.lidar.range_max);
      cfg.lidar.noise_sigma = it->value("noise_sigma", cfg.lidar.noise_sigma);
      cfg.lidar.ground_points = it->value("ground_points", cfg.lidar.ground_points);
    }
    if (auto it = j.find("lanes"); it != j.end()) {
      cfg.lanes.clear();
      for (const auto & jl : *it) {
        io::Polyline lane;
        for (const auto & p : jl) lane.push_back(vec2_from(p, "synth.lanes"));
        cfg.lanes.push_back(lane);
      }
    }
    cfg.mask_score_min = j.value("mask_score_min", cfg.mask_score_min);
    cfg.mask_score_max = j.value("mask_score_max", cfg.mask_score_max);
    cfg.min_mask_pixels = j.value("min_mask_pixels", cfg.min_mask_pixels);
    if (auto it = j.find("shape_priors"); it != j.end()) {
      cfg.shape_priors.clear();
      for (const auto & [label, d] : it->items()) cfg.shape_priors[label] = dims_from(d, "synth.shape_priors");
    }
    if (auto it = j.find("external"); it != j.end()) {
      check_keys(*it, {"enabled", "center_sigma", "yaw_sigma", "dims_sigma", "logit_mean", "logit_sigma"},
                 "synth.external");
      auto & e = cfg.external;
      e.enabled = it->value("enabled", e.enabled);
      e.center_sigma = it->value("center_sigma", e.center_sigma);
      e.yaw_sigma = it->value("yaw_sigma", e.yaw_sigma);
      e.dims_sigma = it->value("dims_sigma", e.dims_sigma);
      e.logit_mean = it->value("logit_mean", e.logit_mean);
      e.logit_sigma = it->value("logit_sigma", e.logit_sigma);
    }
  } catch (const json::exception & e) {
    throw ValidationError("synth", e.what());
  }
  validate_config(cfg);
  return cfg;
}

std::vector<SynthCamera> default_camera_rig(int width, int height)
{
  const double fov = 70.0 * kPi / 180.0;
  const double f = 0.5 * width / std::tan(0.5 * fov);
  const std::vector<std::pair<std::string, double>> rig = {
    {"CAM_FRONT", 0.0},      {"CAM_FRONT_LEFT", 60.0},   {"CAM_BACK_LEFT", 120.0},
    {"CAM_BACK", 180.0},     {"CAM_BACK_RIGHT", -120.0}, {"CAM_FRONT_RIGHT", -60.0}};
  std::vector<SynthCamera> out;
  for (const auto & [id, deg] : rig) {
    out.push_back({id, geometry::normalize_yaw(deg * kPi / 180.0), f, f, width, height, Vec3::Zero()});
  }
  return out;
}

SynthConfig default_config(std::uint64_t seed)
{
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.ego.waypoints = {Vec2(-20.0, 0.0), Vec2(120.0, 0.0)};
  cfg.ego.speed = 2.0;
  cfg.cameras = default_camera_rig();
  cfg.lanes = {
    {Vec2(-100.0, 0.0), Vec2(150.0, 0.0)},
    {Vec2(150.0, 3.5), Vec2(-100.0, 3.5)},
    {Vec2(30.0, -60.0), Vec2(30.0, 60.0)},
  };
  const auto obj = [](const char * label, double x, double y, double yaw) {
    SynthObject o;
    o.class_label = label;
    o.raw_prompt = label;
    o.position = {x, y, 0.0};
    o.yaw = yaw;
    return o;
  };
  cfg.objects = {
    obj("car", 15.0, 0.0, 0.0),
    obj("car", 28.0, 3.5, kPi),
    obj("truck", -38.0, 3.5, kPi),
    obj("bus", 30.0, 12.0, kPi / 2),
    obj("pedestrian", 10.0, 7.0, 0.3),
    obj("traffic_cone", 8.0, -3.0, 0.0),
    obj("barrier", 20.0, -4.0, 0.0),
    obj("bicycle", -8.0, -2.0, 0.0),
  };
  return cfg;
}

// ---------------------------------------------------------------------------
// Geometry helpers

geometry::SE3Pose ego_pose_at(const EgoTrajectory & ego, double t)
{
  double remaining = std::max(0.0, ego.speed * t);
  const auto & w = ego.waypoints;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const Vec2 seg = w[i + 1] - w[i];
    const double len = seg.norm();
    const double heading = std::atan2(seg.y(), seg.x());
    if (remaining <= len || i + 2 == w.size()) {
      const Vec2 p = w[i] + seg * (std::min(remaining, len) / len);
      return geometry::SE3Pose::from_yaw(heading, Vec3(p.x(), p.y(), ego.sensor_height));
    }
    remaining -= len;
  }
  return geometry::SE3Pose::from_yaw(0.0, Vec3(w.front().x(), w.front().y(), ego.sensor_height));
}

std::array<Vec3, 8> box_corners(const Vec3 & center, const Dims & dims, double yaw)
{
  const Eigen::Matrix3d r = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3 local((i & 1 ? 0.5 : -0.5) * dims.length, (i & 2 ? 0.5 : -0.5) * dims.width,
                     (i & 4 ? 0.5 : -0.5) * dims.height);
    out[static_cast<std::size_t>(i)] = center + r * local;
  }
  return out;
}

std::optional<double> ray_box_entry(const Vec3 & origin, const Vec3 & dir, const Vec3 & center,
                                    const Dims & dims, double yaw)
{
  const Eigen::Matrix3d r = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  const Vec3 o = r.transpose() * (origin - center);
  const Vec3 d = r.transpose() * dir;
  const Vec3 half(0.5 * dims.length, 0.5 * dims.width, 0.5 * dims.height);
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < -half[a] || o[a] > half[a]) return std::nullopt;
      continue;
    }
    double ta = (-half[a] - o[a]) / d[a];
    double tb = (half[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1 || t1 < 0.0) return std::nullopt;
  return std::max(t0, 0.0);
}

namespace
{

struct ObjectState
{
  std::size_t index{};
  std::string class_label;
  std::string raw_prompt;
  Vec3 center;
  Dims dims;
  double yaw{};
  Vec2 velocity;
};

std::vector<ObjectState> object_states(const SynthConfig & cfg, double t)
{
  std::vector<ObjectState> out;
  for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
    const auto & o = cfg.objects[i];
    ObjectState s;
    s.index = i;
    s.class_label = o.class_label;
    s.raw_prompt = o.raw_prompt.empty() ? o.class_label : o.raw_prompt;
    s.dims = o.dims ? *o.dims : cfg.shape_priors.at(o.class_label);
    s.center = o.position;
    if (!o.position_z_set) s.center.z() = 0.5 * s.dims.height;
    s.center.head<2>() += o.velocity * t;
    s.yaw = geometry::normalize_yaw(o.yaw);
    s.velocity = o.velocity;
    out.push_back(s);
  }
  return out;
}

bool occluded(const Vec3 & sensor, const Vec3 & p, const std::vector<ObjectState> & objects,
              std::size_t self)
{
  const Vec3 ray = p - sensor;
  const double dist = ray.norm();
  if (dist == 0.0) return false;
  const Vec3 dir = ray / dist;
  for (const auto & o : objects) {
    if (o.index == self) continue;
    const auto t = ray_box_entry(sensor, dir, o.center, o.dims, o.yaw);
    if (t && *t < dist - 1e-9) return true;
  }
  return false;
}

struct Face
{
  Vec3 center;
  Vec3 normal;
  Vec3 axis_u;  // half-extent vectors spanning the face
  Vec3 axis_v;
  double area{};
};

std::array<Face, 6> box_faces(const ObjectState & o)
{
  const Eigen::Matrix3d r = Eigen::AngleAxisd(o.yaw, Vec3::UnitZ()).toRotationMatrix();
  const Vec3 ex = r.col(0) * (0.5 * o.dims.length);
  const Vec3 ey = r.col(1) * (0.5 * o.dims.width);
  const Vec3 ez = Vec3::UnitZ() * (0.5 * o.dims.height);
  const double l = o.dims.length;
  const double w = o.dims.width;
  const double h = o.dims.height;
  return {Face{o.center + ex, r.col(0), ey, ez, w * h}, Face{o.center - ex, -r.col(0), ey, ez, w * h},
          Face{o.center + ey, r.col(1), ex, ez, l * h}, Face{o.center - ey, -r.col(1), ex, ez, l * h},
          Face{o.center + ez, Vec3::UnitZ(), ex, ey, l * w},
          Face{o.center - ez, -Vec3::UnitZ(), ex, ey, l * w}};
}

bool inside_footprint(const Vec2 & p, const ObjectState & o)
{
  const Vec2 d = p - o.center.head<2>();
  const double c = std::cos(o.yaw);
  const double s = std::sin(o.yaw);
  const double along = c * d.x() + s * d.y();
  const double across = -s * d.x() + c * d.y();
  return std::abs(along) <= 0.5 * o.dims.length && std::abs(across) <= 0.5 * o.dims.width;
}

geometry::SE3Pose camera_extrinsic(const SynthCamera & cam)
{
  const double c = std::cos(cam.yaw);
  const double s = std::sin(cam.yaw);
  Eigen::Matrix3d r;
  r.col(0) = Vec3(s, -c, 0.0);   // image right
  r.col(1) = Vec3(0.0, 0.0, -1.0);  // image down
  r.col(2) = Vec3(c, s, 0.0);    // optical axis
  Eigen::Quaterniond q(r);
  q.normalize();
  return geometry::SE3Pose(q, cam.mount);
}

using Hull = std::vector<Vec2>;

double cross2(const Vec2 & o, const Vec2 & a, const Vec2 & b)
{
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain; counter-clockwise in (u, v) coordinates.
Hull convex_hull(std::vector<Vec2> pts)
{
  std::sort(pts.begin(), pts.end(), [](const Vec2 & a, const Vec2 & b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Hull h(2 * pts.size());
  std::size_t k = 0;
  for (const auto & p : pts) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], p) <= 0.0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

bool inside_hull(const Hull & h, const Vec2 & p)
{
  if (h.size() < 3) return false;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (cross2(h[i], h[(i + 1) % h.size()], p) < 0.0) return false;
  }
  return true;
}

// Projection of the part of the box in front of the near plane.
Hull projected_hull(const ObjectState & o, const geometry::SE3Pose & global_to_cam,
                    const geometry::CameraModel & cam)
{
  constexpr double kNear = 0.05;
  const auto corners = box_corners(o.center, o.dims, o.yaw);
  std::array<Vec3, 8> c;
  for (std::size_t i = 0; i < 8; ++i) c[i] = global_to_cam.apply(corners[i]);
  std::vector<Vec3> verts;
  for (const auto & p : c) {
    if (p.z() >= kNear) verts.push_back(p);
  }
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t bit = 1; bit < 8; bit <<= 1) {
      const std::size_t j = i | bit;
      if (j == i) continue;
      const Vec3 & a = c[i];
      const Vec3 & b = c[j];
      if ((a.z() < kNear) != (b.z() < kNear)) {
        const double t = (kNear - a.z()) / (b.z() - a.z());
        verts.push_back(a + t * (b - a));
      }
    }
  }
  std::vector<Vec2> uv;
  for (const auto & p : verts) {
    uv.emplace_back(cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy);
  }
  return convex_hull(uv);
}

std::string frame_name(const std::string & scene_id, int f)
{
  std::ostringstream os;
  os << scene_id << "_" << std::setw(4) << std::setfill('0') << f;
  return os.str();
}

io::PointXYZI to_point(const Vec3 & p, float intensity)
{
  return {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z()), intensity};
}

}  // namespace

// ---------------------------------------------------------------------------
// Generation

SynthOutput generate(const SynthConfig & cfg)
{
  validate_config(cfg);
  CounterRng rng(cfg.seed);
  SynthOutput out;
  auto & bundle = out.bundle;
  bundle.scene_id = cfg.scene_id;
  bundle.classes = io::canonical_classes();
  for (const auto & [label, d] : cfg.shape_priors) {
    if (std::find(bundle.classes.begin(), bundle.classes.end(), label) == bundle.classes.end()) {
      bundle.classes.push_back(label);
    }
  }
  bundle.shape_priors = cfg.shape_priors;
  bundle.lane_graph.lanes = cfg.lanes;

  std::vector<geometry::CameraModel> cams;
  for (const auto & c : cfg.cameras) {
    cams.push_back({c.camera_id, c.fx, c.fy, 0.5 * c.width, 0.5 * c.height, c.width, c.height,
                    camera_extrinsic(c)});
  }

  for (int f = 0; f < cfg.n_frames; ++f) {
    const double t = f * cfg.frame_dt;
    const auto objects = object_states(cfg, t);
    io::FrameRecord frame;
    frame.frame_id = frame_name(cfg.scene_id, f);
    frame.timestamp_ns = 1'000'000'000LL + static_cast<std::int64_t>(std::llround(t * 1e9));
    frame.ego_pose = ego_pose_at(cfg.ego, t);
    frame.lidar_path = "lidar/" + frame.frame_id + ".bin";
    const Vec3 sensor = frame.ego_pose.translation();
    const geometry::SE3Pose global_to_ego = frame.ego_pose.inverse();

    // LiDAR: ego-facing faces, weighted by the area they present to the sensor.
    std::vector<Vec3> points_global;
    std::vector<float> intensity;
    std::vector<std::size_t> hits(objects.size(), 0);
    for (const auto & o : objects) {
      if ((o.center.head<2>() - sensor.head<2>()).norm() > cfg.lidar.range_max) continue;
      const auto faces = box_faces(o);
      std::array<double, 6> weight{};
      double total = 0.0;
      for (std::size_t k = 0; k < 6; ++k) {
        const Vec3 to_sensor = sensor - faces[k].center;
        const double facing = faces[k].normal.dot(to_sensor);
        if (facing > 0.0) weight[k] = faces[k].area * facing / to_sensor.norm();
        total += weight[k];
      }
      if (!(total > 0.0)) continue;
      for (int n = 0; n < cfg.lidar.points_per_object; ++n) {
        double pick = rng.uniform() * total;
        std::size_t k = 0;
        for (; k < 6; ++k) {
          if (pick < weight[k]) break;
          pick -= weight[k];
        }
        // Rounding can run past the end; fall back to the last visible face.
        if (k == 6) {
          k = 5;
          while (weight[k] == 0.0) --k;
        }
        const Face & face = faces[k];
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-1.0, 1.0);
        const Vec3 p = face.center + a * face.axis_u + b * face.axis_v;
        const Vec3 noise(rng.normal(0.0, cfg.lidar.noise_sigma), rng.normal(0.0, cfg.lidar.noise_sigma),
                         rng.normal(0.0, cfg.lidar.noise_sigma));
        if (occluded(sensor, p, objects, o.index)) continue;
        points_global.push_back(p + noise);
        intensity.push_back(0.5f);
        ++hits[o.index];
      }
    }
    for (int n = 0; n < cfg.lidar.ground_points; ++n) {
      const double r = cfg.lidar.range_max * std::sqrt(rng.uniform());
      const double phi = rng.uniform(-kPi, kPi);
      const Vec3 p(sensor.x() + r * std::cos(phi), sensor.y() + r * std::sin(phi), 0.0);
      const Vec3 noise(rng.normal(0.0, cfg.lidar.noise_sigma), rng.normal(0.0, cfg.lidar.noise_sigma),
                       rng.normal(0.0, cfg.lidar.noise_sigma));
      const bool under = std::any_of(objects.begin(), objects.end(),
                                     [&](const ObjectState & o) { return inside_footprint(p.head<2>(), o); });
      if (under || occluded(sensor, p, objects, objects.size())) continue;
      points_global.push_back(p + noise);
      intensity.push_back(0.1f);
    }
    for (std::size_t i = 0; i < points_global.size(); ++i) {
      frame.points.push_back(to_point(global_to_ego.apply(points_global[i]), intensity[i]));
    }

    // Masks: per-pixel nearest object inside its projected hull.
    for (std::size_t ci = 0; ci < cams.size(); ++ci) {
      const auto & cam = cams[ci];
      const geometry::SE3Pose cam_to_global = frame.ego_pose * cam.extrinsic;
      const geometry::SE3Pose global_to_cam = cam_to_global.inverse();
      const Eigen::Matrix3d cam_rot = cam_to_global.rotation_matrix();
      const Vec3 cam_origin = cam_to_global.translation();
      const std::size_t npx = static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height);
      std::vector<double> depth(npx, std::numeric_limits<double>::infinity());
      std::vector<int> owner(npx, -1);

      for (const auto & o : objects) {
        const Hull hull = projected_hull(o, global_to_cam, cam);
        if (hull.size() < 3) continue;
        double u0 = hull[0].x(), u1 = hull[0].x(), v0 = hull[0].y(), v1 = hull[0].y();
        for (const auto & p : hull) {
          u0 = std::min(u0, p.x());
          u1 = std::max(u1, p.x());
          v0 = std::min(v0, p.y());
          v1 = std::max(v1, p.y());
        }
        const int x0 = std::max(0, static_cast<int>(std::floor(u0)));
        const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(u1)));
        const int y0 = std::max(0, static_cast<int>(std::floor(v0)));
        const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(v1)));
        for (int y = y0; y <= y1; ++y) {
          for (int x = x0; x <= x1; ++x) {
            const Vec2 px(x + 0.5, y + 0.5);
            if (!inside_hull(hull, px)) continue;
            const Vec3 dir_cam = Vec3((px.x() - cam.cx) / cam.fx, (px.y() - cam.cy) / cam.fy, 1.0).normalized();
            const auto hit = ray_box_entry(cam_origin, cam_rot * dir_cam, o.center, o.dims, o.yaw);
            const double d = hit ? *hit : std::numeric_limits<double>::max();
            const std::size_t idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(cam.width) +
                                    static_cast<std::size_t>(x);
            if (d < depth[idx] || owner[idx] < 0) {
              depth[idx] = d;
              owner[idx] = static_cast<int>(o.index);
            }
          }
        }
      }

      io::CameraEntry entry;
      entry.camera = cam;
      entry.masks_path = "masks/" + frame.frame_id + "_" + cam.camera_id + ".json";
      for (const auto & o : objects) {
        io::Bitmap bitmap(cam.width, cam.height);
        int bx0 = cam.width, by0 = cam.height, bx1 = -1, by1 = -1;
        int count = 0;
        for (int y = 0; y < cam.height; ++y) {
          for (int x = 0; x < cam.width; ++x) {
            if (owner[static_cast<std::size_t>(y) * static_cast<std::size_t>(cam.width) +
                      static_cast<std::size_t>(x)] != static_cast<int>(o.index)) {
              continue;
            }
            bitmap.set(x, y);
            bx0 = std::min(bx0, x);
            by0 = std::min(by0, y);
            bx1 = std::max(bx1, x);
            by1 = std::max(by1, y);
            ++count;
          }
        }
        if (count < std::max(1, cfg.min_mask_pixels)) continue;
        io::InstanceMask2D m;
        m.camera_id = cam.camera_id;
        m.class_label = o.class_label;
        m.raw_prompt = o.raw_prompt;
        m.score = rng.uniform(cfg.mask_score_min, cfg.mask_score_max);
        m.bbox = {static_cast<double>(bx0), static_cast<double>(by0), static_cast<double>(bx1 + 1),
                  static_cast<double>(by1 + 1)};
        m.rle = io::encode_rle(bitmap);
        entry.masks.push_back(std::move(m));
      }
      frame.cameras.push_back(std::move(entry));
    }

    out.ground_truth.frame_ids.push_back(frame.frame_id);
    std::vector<Cuboid> frame_gt;
    for (const auto & o : objects) {
      if (hits[o.index] == 0) continue;
      Cuboid c;
      c.frame_id = frame.frame_id;
      c.class_label = o.class_label;
      c.score = 1.0;
      c.center = o.center;
      c.dims = o.dims;
      c.yaw = o.yaw;
      c.velocity = o.velocity;
      c.source = CuboidSource::kGroundTruth;
      frame_gt.push_back(c);
    }
    if (cfg.external.enabled) {
      frame.external_boxes_path = "external/" + frame.frame_id + ".json";
      for (const auto & g : frame_gt) {
        Cuboid e = g;
        e.class_label = "object";
        e.center.x() += rng.normal(0.0, cfg.external.center_sigma);
        e.center.y() += rng.normal(0.0, cfg.external.center_sigma);
        e.yaw = geometry::normalize_yaw(g.yaw + rng.normal(0.0, cfg.external.yaw_sigma));
        e.dims.width = std::max(0.05, g.dims.width * (1.0 + rng.normal(0.0, cfg.external.dims_sigma)));
        e.dims.length = std::max(0.05, g.dims.length * (1.0 + rng.normal(0.0, cfg.external.dims_sigma)));
        e.dims.height = std::max(0.05, g.dims.height * (1.0 + rng.normal(0.0, cfg.external.dims_sigma)));
        e.score = rng.normal(cfg.external.logit_mean, cfg.external.logit_sigma);
        e.velocity.reset();
        e.source = CuboidSource::kExternal;
        frame.external_boxes.push_back(e);
      }
    }
    out.ground_truth.cuboids.insert(out.ground_truth.cuboids.end(), frame_gt.begin(), frame_gt.end());
    bundle.frames.push_back(std::move(frame));
  }
  io::validate_bundle(bundle);
  return out;
}

void write_output(const SynthOutput & out, const std::filesystem::path & dir)
{
  io::write_bundle(out.bundle, dir);
  io::write_cuboids(out.ground_truth, dir / "ground_truth.json");
}

SynthOutput generate_bundle(const SynthConfig & cfg, const std::filesystem::path & dir)
{
  SynthOutput out = generate(cfg);
  write_output(out, dir);
  return out;
}

NoiseResult make_mask_noise(const io::SceneBundle & bundle, double fp_rate, double fn_rate,
                            std::uint64_t seed)
{
  if (!(fp_rate >= 0.0 && fp_rate <= 1.0) || !(fn_rate >= 0.0 && fn_rate <= 1.0)) {
    throw ValidationError("mask_noise", "rates must lie in [0, 1]");
  }
  CounterRng rng(seed);
  NoiseResult out;
  out.bundle = bundle;
  for (auto & frame : out.bundle.frames) {
    for (auto & entry : frame.cameras) {
      std::vector<io::InstanceMask2D> kept;
      for (auto & m : entry.masks) {
        if (rng.uniform() < fn_rate) {
          ++out.dropped;
        } else {
          kept.push_back(std::move(m));
        }
      }
      entry.masks = std::move(kept);
    }
    if (frame.cameras.empty() || bundle.classes.empty()) continue;
    if (!(rng.uniform() < fp_rate)) continue;
    auto & entry = frame.cameras[rng.index(frame.cameras.size())];
    const auto & cam = entry.camera;
    const int bw = std::max(1, std::min(cam.width, 8 + static_cast<int>(rng.index(57))));
    const int bh = std::max(1, std::min(cam.height, 8 + static_cast<int>(rng.index(57))));
    const int x0 = static_cast<int>(rng.index(static_cast<std::size_t>(cam.width - bw + 1)));
    const int y0 = static_cast<int>(rng.index(static_cast<std::size_t>(cam.height - bh + 1)));
    io::Bitmap bitmap(cam.width, cam.height);
    for (int y = y0; y < y0 + bh; ++y) {
      for (int x = x0; x < x0 + bw; ++x) bitmap.set(x, y);
    }
    io::InstanceMask2D m;
    m.camera_id = cam.camera_id;
    m.class_label = bundle.classes[rng.index(bundle.classes.size())];
    m.raw_prompt = m.class_label;
    m.score = rng.uniform(0.1, 1.0);
    m.bbox = {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x0 + bw),
              static_cast<double>(y0 + bh)};
    m.rle = io::encode_rle(bitmap);
    entry.masks.push_back(std::move(m));
    ++out.injected;
  }
  return out;
}

}  // namespace cuboidlift::synth
