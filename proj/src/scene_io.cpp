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

#include "cuboidlift/scene_io.hpp"

#include "cuboidlift/error.hpp"
#include "cuboidlift/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace cuboidlift::io
{

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t Bitmap::count() const
{
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

Bitmap decode_rle(std::span<const std::uint32_t> counts, int width, int height)
{
  if (width <= 0 || height <= 0) throw ValidationError("rle", "image size must be positive");
  const std::uint64_t total = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  if (sum != total) {
    std::ostringstream os;
    os << "run lengths sum to " << sum << ", expected " << total;
    throw ValidationError("rle", os.str());
  }
  Bitmap out(width, height);
  std::uint64_t pos = 0;
  bool foreground = false;
  for (auto c : counts) {
    if (foreground) {
      for (std::uint64_t k = pos; k < pos + c; ++k) {
        out.set(static_cast<int>(k / static_cast<std::uint64_t>(height)),
                static_cast<int>(k % static_cast<std::uint64_t>(height)));
      }
    }
    pos += c;
    foreground = !foreground;
  }
  return out;
}

RleCounts encode_rle(const Bitmap & bitmap)
{
  RleCounts counts;
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < bitmap.width(); ++x) {
    for (int y = 0; y < bitmap.height(); ++y) {
      const bool v = bitmap.at(x, y);
      if (v != current) {
        counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

const std::vector<std::string> & canonical_classes()
{
  static const std::vector<std::string> classes = {
    "car",        "truck",   "bus",     "trailer",      "construction_vehicle",
    "pedestrian", "motorcycle", "bicycle", "traffic_cone", "barrier"};
  return classes;
}

const ShapePriorTable & default_shape_priors()
{
  static const ShapePriorTable table = {
    {"car", {1.80, 4.50, 1.50}},
    {"truck", {2.60, 8.00, 3.60}},
    {"bus", {2.50, 12.00, 4.00}},
    {"trailer", {2.60, 12.00, 3.60}},
    {"construction_vehicle", {2.00, 4.50, 2.50}},
    {"pedestrian", {0.40, 0.70, 1.70}},
    {"motorcycle", {0.80, 2.10, 1.70}},
    {"bicycle", {0.60, 1.80, 1.40}},
    {"traffic_cone", {0.30, 0.30, 0.70}},
    {"barrier", {0.50, 1.20, 0.90}},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Raw file helpers

std::string read_text(const fs::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path.string(), "read failed");
  return ss.str();
}

void write_text(const std::string & text, const fs::path & path)
{
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open file for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

json read_json(const fs::path & path)
{
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error & e) {
    throw ValidationError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

namespace
{

std::string dump(const json & j) { return j.dump(2) + "\n"; }

const json & field(const json & j, const char * key, const std::string & where)
{
  if (!j.is_object()) throw ValidationError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + "." + key, "missing field");
  return *it;
}

double get_number(const json & j, const char * key, const std::string & where)
{
  const json & v = field(j, key, where);
  if (!v.is_number()) throw ValidationError(where + "." + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(where + "." + key, "non-finite number");
  return d;
}

std::int64_t get_int(const json & j, const char * key, const std::string & where)
{
  const json & v = field(j, key, where);
  if (!v.is_number_integer()) throw ValidationError(where + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json & j, const char * key, const std::string & where)
{
  const json & v = field(j, key, where);
  if (!v.is_string()) throw ValidationError(where + "." + key, "expected a string");
  return v.get<std::string>();
}

const json & get_array(const json & j, const char * key, const std::string & where)
{
  const json & v = field(j, key, where);
  if (!v.is_array()) throw ValidationError(where + "." + key, "expected an array");
  return v;
}

void check_version(const json & j, const std::string & where)
{
  const auto version = get_int(j, "version", where);
  if (version != kSchemaVersion) {
    throw ValidationError(where + ".version", "unsupported schema version " + std::to_string(version));
  }
}

std::vector<double> get_numbers(const json & arr, std::size_t n, const std::string & where)
{
  if (!arr.is_array() || arr.size() != n) {
    throw ValidationError(where, "expected an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto & v : arr) {
    if (!v.is_number()) throw ValidationError(where, "expected a number");
    out.push_back(v.get<double>());
    if (!std::isfinite(out.back())) throw ValidationError(where, "non-finite number");
  }
  return out;
}

json pose_to_json(const geometry::SE3Pose & pose)
{
  const auto & q = pose.rotation();
  const auto & t = pose.translation();
  return json{{"qw", q.w()}, {"qx", q.x()}, {"qy", q.y()}, {"qz", q.z()},
              {"tx", t.x()}, {"ty", t.y()}, {"tz", t.z()}};
}

geometry::SE3Pose pose_from_json(const json & j, const std::string & where)
{
  const Eigen::Quaterniond q(get_number(j, "qw", where), get_number(j, "qx", where),
                             get_number(j, "qy", where), get_number(j, "qz", where));
  const geometry::Vec3 t(get_number(j, "tx", where), get_number(j, "ty", where),
                         get_number(j, "tz", where));
  try {
    return geometry::SE3Pose(q, t);
  } catch (const ValidationError & e) {
    throw ValidationError(where, e.what());
  }
}

json camera_to_json(const CameraEntry & entry)
{
  const auto & c = entry.camera;
  return json{{"camera_id", c.camera_id}, {"fx", c.fx},         {"fy", c.fy},
              {"cx", c.cx},               {"cy", c.cy},         {"width", c.width},
              {"height", c.height},       {"extrinsic", pose_to_json(c.extrinsic)},
              {"masks", entry.masks_path}};
}

CameraEntry camera_from_json(const json & j, const std::string & where)
{
  CameraEntry entry;
  auto & c = entry.camera;
  c.camera_id = get_string(j, "camera_id", where);
  c.fx = get_number(j, "fx", where);
  c.fy = get_number(j, "fy", where);
  c.cx = get_number(j, "cx", where);
  c.cy = get_number(j, "cy", where);
  c.width = static_cast<int>(get_int(j, "width", where));
  c.height = static_cast<int>(get_int(j, "height", where));
  c.extrinsic = pose_from_json(field(j, "extrinsic", where), where + ".extrinsic");
  entry.masks_path = get_string(j, "masks", where);
  geometry::validate_camera(c, where);
  return entry;
}

json mask_to_json(const InstanceMask2D & m)
{
  return json{{"class_label", m.class_label},
              {"raw_prompt", m.raw_prompt},
              {"score", m.score},
              {"bbox", {m.bbox.x_min, m.bbox.y_min, m.bbox.x_max, m.bbox.y_max}},
              {"rle", m.rle}};
}

InstanceMask2D mask_from_json(const json & j, const std::string & camera_id, const std::string & where)
{
  InstanceMask2D m;
  m.camera_id = camera_id;
  m.class_label = get_string(j, "class_label", where);
  m.raw_prompt = get_string(j, "raw_prompt", where);
  m.score = get_number(j, "score", where);
  const auto b = get_numbers(field(j, "bbox", where), 4, where + ".bbox");
  m.bbox = {b[0], b[1], b[2], b[3]};
  const json & rle = get_array(j, "rle", where);
  m.rle.reserve(rle.size());
  for (const auto & c : rle) {
    if (!c.is_number_unsigned()) throw ValidationError(where + ".rle", "expected non-negative integers");
    const auto v = c.get<std::uint64_t>();
    if (v > 0xffffffffULL) throw ValidationError(where + ".rle", "run length out of range");
    m.rle.push_back(static_cast<std::uint32_t>(v));
  }
  return m;
}

std::string mask_file_text(const CameraEntry & entry)
{
  json masks = json::array();
  for (const auto & m : entry.masks) masks.push_back(mask_to_json(m));
  return dump(json{{"version", kSchemaVersion},
                   {"camera_id", entry.camera.camera_id},
                   {"width", entry.camera.width},
                   {"height", entry.camera.height},
                   {"masks", masks}});
}

std::vector<InstanceMask2D> read_masks(const fs::path & path, const geometry::CameraModel & cam)
{
  const json j = read_json(path);
  const std::string where = path.string();
  check_version(j, where);
  if (get_string(j, "camera_id", where) != cam.camera_id) {
    throw ValidationError(where + ".camera_id", "does not match manifest camera '" + cam.camera_id + "'");
  }
  if (get_int(j, "width", where) != cam.width || get_int(j, "height", where) != cam.height) {
    throw ValidationError(where + ".width", "image size does not match manifest camera");
  }
  std::vector<InstanceMask2D> out;
  const json & arr = get_array(j, "masks", where);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(mask_from_json(arr[i], cam.camera_id, where + ".masks[" + std::to_string(i) + "]"));
  }
  return out;
}

std::string lanes_text(const LaneGraph & graph)
{
  json lanes = json::array();
  for (const auto & lane : graph.lanes) {
    json pts = json::array();
    for (const auto & p : lane) pts.push_back({p.x(), p.y()});
    lanes.push_back(pts);
  }
  return dump(json{{"version", kSchemaVersion}, {"lanes", lanes}});
}

LaneGraph read_lanes(const fs::path & path)
{
  const json j = read_json(path);
  const std::string where = path.string();
  check_version(j, where);
  LaneGraph graph;
  const json & lanes = get_array(j, "lanes", where);
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const std::string lw = where + ".lanes[" + std::to_string(i) + "]";
    if (!lanes[i].is_array()) throw ValidationError(lw, "expected an array of vertices");
    Polyline poly;
    for (const auto & v : lanes[i]) {
      const auto xy = get_numbers(v, 2, lw);
      poly.emplace_back(xy[0], xy[1]);
    }
    graph.lanes.push_back(std::move(poly));
  }
  return graph;
}

std::string priors_text(const ShapePriorTable & priors)
{
  json table = json::object();
  for (const auto & [label, d] : priors) table[label] = {d.width, d.length, d.height};
  return dump(json{{"version", kSchemaVersion}, {"priors", table}});
}

ShapePriorTable read_priors(const fs::path & path)
{
  const json j = read_json(path);
  const std::string where = path.string();
  check_version(j, where);
  const json & table = field(j, "priors", where);
  if (!table.is_object()) throw ValidationError(where + ".priors", "expected an object");
  ShapePriorTable out;
  for (const auto & [label, dims] : table.items()) {
    const auto d = get_numbers(dims, 3, where + ".priors." + label);
    out[label] = {d[0], d[1], d[2]};
  }
  return out;
}

void validate_lanes(const LaneGraph & graph, const std::string & where)
{
  for (std::size_t i = 0; i < graph.lanes.size(); ++i) {
    const auto & lane = graph.lanes[i];
    const std::string lw = where + ".lanes[" + std::to_string(i) + "]";
    if (lane.size() < 2) throw ValidationError(lw, "a lane needs at least 2 vertices");
    for (std::size_t k = 0; k < lane.size(); ++k) {
      if (!lane[k].allFinite()) throw ValidationError(lw, "non-finite vertex");
      if (k > 0 && lane[k] == lane[k - 1]) throw ValidationError(lw, "consecutive duplicate vertices");
    }
  }
}

void validate_priors(const ShapePriorTable & priors, const std::vector<std::string> & classes,
                     const std::string & where)
{
  for (const auto & [label, d] : priors) {
    if (!(d.width > 0.0 && d.length > 0.0 && d.height > 0.0)) {
      throw ValidationError(where + ".priors." + label, "dimensions must be positive");
    }
  }
  for (const auto & c : classes) {
    if (!priors.count(c)) throw ValidationError(where + ".priors", "no shape prior for class '" + c + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Point clouds

std::vector<PointXYZI> read_point_cloud(const fs::path & path)
{
  const std::string bytes = read_text(path);
  if (bytes.size() % 16 != 0) {
    throw ValidationError(path.string(), "byte count " + std::to_string(bytes.size()) +
                                           " is not a multiple of 16");
  }
  std::vector<PointXYZI> out(bytes.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t raw[4];
    std::memcpy(raw, bytes.data() + 16 * i, 16);
    if constexpr (std::endian::native == std::endian::big) {
      for (auto & r : raw) r = __builtin_bswap32(r);
    }
    float f[4];
    std::memcpy(f, raw, 16);
    out[i] = {f[0], f[1], f[2], f[3]};
    if (!std::isfinite(f[0]) || !std::isfinite(f[1]) || !std::isfinite(f[2])) {
      throw ValidationError(path.string(), "non-finite coordinate in point " + std::to_string(i));
    }
  }
  return out;
}

void write_point_cloud(std::span<const PointXYZI> points, const fs::path & path)
{
  std::string bytes(points.size() * 16, '\0');
  for (std::size_t i = 0; i < points.size(); ++i) {
    const float f[4] = {points[i].x, points[i].y, points[i].z, points[i].intensity};
    std::uint32_t raw[4];
    std::memcpy(raw, f, 16);
    if constexpr (std::endian::native == std::endian::big) {
      for (auto & r : raw) r = __builtin_bswap32(r);
    }
    std::memcpy(bytes.data() + 16 * i, raw, 16);
  }
  write_text(bytes, path);
}

std::vector<geometry::Vec3> to_vec3(std::span<const PointXYZI> points)
{
  std::vector<geometry::Vec3> out;
  out.reserve(points.size());
  for (const auto & p : points) out.emplace_back(p.x, p.y, p.z);
  return out;
}

// ---------------------------------------------------------------------------
// Cuboids

json cuboid_to_json(const Cuboid & c)
{
  json j{{"frame_id", c.frame_id},
         {"class_label", c.class_label},
         {"score", c.score},
         {"center", {c.center.x(), c.center.y(), c.center.z()}},
         {"dims", {c.dims.width, c.dims.length, c.dims.height}},
         {"yaw", c.yaw},
         {"velocity", nullptr},
         {"source", std::string(to_string(c.source))}};
  if (c.velocity) j["velocity"] = {c.velocity->x(), c.velocity->y()};
  return j;
}

Cuboid cuboid_from_json(const json & j, const std::string & where)
{
  Cuboid c;
  c.frame_id = get_string(j, "frame_id", where);
  c.class_label = get_string(j, "class_label", where);
  c.score = get_number(j, "score", where);
  const auto center = get_numbers(field(j, "center", where), 3, where + ".center");
  c.center = {center[0], center[1], center[2]};
  const auto dims = get_numbers(field(j, "dims", where), 3, where + ".dims");
  c.dims = {dims[0], dims[1], dims[2]};
  c.yaw = get_number(j, "yaw", where);
  const json & vel = field(j, "velocity", where);
  if (!vel.is_null()) {
    const auto v = get_numbers(vel, 2, where + ".velocity");
    c.velocity = Eigen::Vector2d(v[0], v[1]);
  }
  try {
    c.source = cuboid_source_from_string(get_string(j, "source", where));
  } catch (const ValidationError & e) {
    throw ValidationError(where + ".source", e.what());
  }
  validate_cuboid(c, where);
  return c;
}

std::string serialize_cuboids(const CuboidFile & file)
{
  json cuboids = json::array();
  for (const auto & c : file.cuboids) cuboids.push_back(cuboid_to_json(c));
  json j{{"version", kSchemaVersion}, {"frame_ids", file.frame_ids}, {"cuboids", cuboids}};
  if (!file.provenance.is_null()) j["provenance"] = file.provenance;
  return dump(j);
}

CuboidFile parse_cuboids(const std::string & text, const std::string & where)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error & e) {
    throw ValidationError(where, std::string("malformed JSON: ") + e.what());
  }
  check_version(j, where);
  CuboidFile out;
  if (auto it = j.find("frame_ids"); it != j.end()) {
    if (!it->is_array()) throw ValidationError(where + ".frame_ids", "expected an array");
    for (const auto & f : *it) {
      if (!f.is_string()) throw ValidationError(where + ".frame_ids", "expected strings");
      out.frame_ids.push_back(f.get<std::string>());
    }
  }
  const json & arr = get_array(j, "cuboids", where);
  out.cuboids.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.cuboids.push_back(cuboid_from_json(arr[i], where + ".cuboids[" + std::to_string(i) + "]"));
  }
  if (auto it = j.find("provenance"); it != j.end()) out.provenance = *it;
  return out;
}

void write_cuboids(const CuboidFile & file, const fs::path & path)
{
  write_text(serialize_cuboids(file), path);
}

void write_cuboids(const std::vector<Cuboid> & cuboids, const fs::path & path)
{
  CuboidFile file;
  file.cuboids = cuboids;
  write_cuboids(file, path);
}

CuboidFile read_cuboid_file(const fs::path & path)
{
  return parse_cuboids(read_text(path), path.string());
}

std::vector<Cuboid> read_cuboids(const fs::path & path) { return read_cuboid_file(path).cuboids; }

// ---------------------------------------------------------------------------
// Bundles

void validate_mask(const InstanceMask2D & m, const geometry::CameraModel & cam,
                   const std::vector<std::string> & classes, const std::string & where)
{
  if (m.camera_id != cam.camera_id) throw ValidationError(where + ".camera_id", "camera mismatch");
  if (std::find(classes.begin(), classes.end(), m.class_label) == classes.end()) {
    throw ValidationError(where + ".class_label", "unknown class '" + m.class_label + "'");
  }
  if (!(m.score >= 0.0 && m.score <= 1.0)) throw ValidationError(where + ".score", "score outside [0, 1]");
  const auto & b = m.bbox;
  if (!(b.x_min >= 0.0 && b.x_min < b.x_max && b.x_max <= cam.width && b.y_min >= 0.0 &&
        b.y_min < b.y_max && b.y_max <= cam.height)) {
    throw ValidationError(where + ".bbox", "box outside the image or empty");
  }
  Bitmap bitmap;
  try {
    bitmap = decode_rle(m.rle, cam.width, cam.height);
  } catch (const ValidationError & e) {
    throw ValidationError(where + ".rle", e.what());
  }
  bool any = false;
  for (int x = 0; x < bitmap.width(); ++x) {
    for (int y = 0; y < bitmap.height(); ++y) {
      if (!bitmap.at(x, y)) continue;
      any = true;
      const double px = x + 0.5;
      const double py = y + 0.5;
      if (px < b.x_min || px > b.x_max || py < b.y_min || py > b.y_max) {
        throw ValidationError(where + ".rle", "set pixel (" + std::to_string(x) + ", " +
                                                std::to_string(y) + ") lies outside bbox");
      }
    }
  }
  if (!any) throw ValidationError(where + ".rle", "empty mask");
}

void validate_bundle(const SceneBundle & bundle)
{
  const std::string where = "scene";
  if (bundle.scene_id.empty()) throw ValidationError(where + ".scene_id", "empty scene id");
  if (bundle.classes.empty()) throw ValidationError(where + ".classes", "no classes configured");
  validate_lanes(bundle.lane_graph, bundle.lanes_path);
  validate_priors(bundle.shape_priors, bundle.classes, bundle.shape_priors_path);
  std::set<std::string> frame_ids;
  for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
    const auto & f = bundle.frames[i];
    const std::string fw = where + ".frames[" + std::to_string(i) + "]";
    if (f.frame_id.empty()) throw ValidationError(fw + ".frame_id", "empty frame id");
    if (!frame_ids.insert(f.frame_id).second) throw ValidationError(fw + ".frame_id", "duplicate frame id");
    if (i > 0 && f.timestamp_ns <= bundle.frames[i - 1].timestamp_ns) {
      throw ValidationError(fw + ".timestamp_ns", "timestamps must be strictly increasing");
    }
    std::set<std::string> cam_ids;
    for (std::size_t c = 0; c < f.cameras.size(); ++c) {
      const auto & entry = f.cameras[c];
      const std::string cw = fw + ".cameras[" + std::to_string(c) + "]";
      geometry::validate_camera(entry.camera, cw);
      if (!cam_ids.insert(entry.camera.camera_id).second) {
        throw ValidationError(cw + ".camera_id", "duplicate camera id in frame");
      }
      for (std::size_t m = 0; m < entry.masks.size(); ++m) {
        validate_mask(entry.masks[m], entry.camera, bundle.classes,
                      entry.masks_path + ".masks[" + std::to_string(m) + "]");
      }
    }
    if (f.external_boxes_path) {
      for (std::size_t k = 0; k < f.external_boxes.size(); ++k) {
        const auto & c = f.external_boxes[k];
        const std::string ew = *f.external_boxes_path + ".cuboids[" + std::to_string(k) + "]";
        validate_cuboid(c, ew);
        if (c.frame_id != f.frame_id) throw ValidationError(ew + ".frame_id", "frame id mismatch");
        if (c.source != CuboidSource::kExternal) {
          throw ValidationError(ew + ".source", "external boxes must have source 'external'");
        }
      }
    } else if (!f.external_boxes.empty()) {
      throw ValidationError(fw + ".external_boxes", "boxes present without a file reference");
    }
  }
}

SceneBundle load_bundle(const fs::path & manifest_path, int jobs)
{
  const json j = read_json(manifest_path);
  const std::string where = manifest_path.string();
  const fs::path root = manifest_path.parent_path();
  check_version(j, where);

  SceneBundle bundle;
  bundle.scene_id = get_string(j, "scene_id", where);
  if (auto it = j.find("classes"); it != j.end()) {
    if (!it->is_array()) throw ValidationError(where + ".classes", "expected an array");
    for (const auto & c : *it) {
      if (!c.is_string()) throw ValidationError(where + ".classes", "expected strings");
      bundle.classes.push_back(c.get<std::string>());
    }
  } else {
    bundle.classes = canonical_classes();
  }
  bundle.lanes_path = get_string(j, "lanes", where);
  bundle.lane_graph = read_lanes(root / bundle.lanes_path);
  bundle.shape_priors_path = get_string(j, "shape_priors", where);
  bundle.shape_priors = read_priors(root / bundle.shape_priors_path);

  const json & frames = get_array(j, "frames", where);
  bundle.frames.resize(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string fw = where + ".frames[" + std::to_string(i) + "]";
    const json & fj = frames[i];
    auto & f = bundle.frames[i];
    f.frame_id = get_string(fj, "frame_id", fw);
    f.timestamp_ns = get_int(fj, "timestamp_ns", fw);
    f.ego_pose = pose_from_json(field(fj, "ego_pose", fw), fw + ".ego_pose");
    f.lidar_path = get_string(fj, "lidar", fw);
    const json & cams = get_array(fj, "cameras", fw);
    for (std::size_t c = 0; c < cams.size(); ++c) {
      f.cameras.push_back(camera_from_json(cams[c], fw + ".cameras[" + std::to_string(c) + "]"));
    }
    if (auto it = fj.find("external_boxes"); it != fj.end() && !it->is_null()) {
      if (!it->is_string()) throw ValidationError(fw + ".external_boxes", "expected a path");
      f.external_boxes_path = it->get<std::string>();
    }
  }

  parallel_for(bundle.frames.size(), jobs, [&](std::size_t i) {
    auto & f = bundle.frames[i];
    f.points = read_point_cloud(root / f.lidar_path);
    for (auto & entry : f.cameras) entry.masks = read_masks(root / entry.masks_path, entry.camera);
    if (f.external_boxes_path) f.external_boxes = read_cuboids(root / *f.external_boxes_path);
  });

  validate_bundle(bundle);
  return bundle;
}

void write_bundle(const SceneBundle & bundle, const fs::path & dir)
{
  validate_bundle(bundle);
  json frames = json::array();
  for (const auto & f : bundle.frames) {
    json cams = json::array();
    for (const auto & entry : f.cameras) {
      cams.push_back(camera_to_json(entry));
      write_text(mask_file_text(entry), dir / entry.masks_path);
    }
    json fj{{"frame_id", f.frame_id},
            {"timestamp_ns", f.timestamp_ns},
            {"ego_pose", pose_to_json(f.ego_pose)},
            {"lidar", f.lidar_path},
            {"cameras", cams}};
    if (f.external_boxes_path) {
      fj["external_boxes"] = *f.external_boxes_path;
      CuboidFile ext;
      ext.frame_ids = {f.frame_id};
      ext.cuboids = f.external_boxes;
      write_cuboids(ext, dir / *f.external_boxes_path);
    }
    write_point_cloud(f.points, dir / f.lidar_path);
    frames.push_back(fj);
  }
  write_text(lanes_text(bundle.lane_graph), dir / bundle.lanes_path);
  write_text(priors_text(bundle.shape_priors), dir / bundle.shape_priors_path);
  const json manifest{{"version", kSchemaVersion},   {"scene_id", bundle.scene_id},
                      {"classes", bundle.classes},   {"lanes", bundle.lanes_path},
                      {"shape_priors", bundle.shape_priors_path}, {"frames", frames}};
  write_text(dump(manifest), dir / "scene.json");
}

}  // namespace cuboidlift::io
