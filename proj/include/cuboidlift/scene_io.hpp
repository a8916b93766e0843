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

#ifndef CUBOIDLIFT__SCENE_IO_HPP_
#define CUBOIDLIFT__SCENE_IO_HPP_

#include "cuboidlift/cuboid.hpp"
#include "cuboidlift/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cuboidlift::io
{

inline constexpr int kSchemaVersion = 1;

// Binary mask in raster order: at(x, y) with x in [0, width), y in [0, height).
class Bitmap
{
public:
  Bitmap() = default;
  Bitmap(int width, int height, bool fill = false)
  : width_(width), height_(height),
    data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0)
  {
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return data_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { data_[index(x, y)] = value ? 1 : 0; }
  std::size_t count() const;

  bool operator==(const Bitmap &) const = default;

private:
  std::size_t index(int x, int y) const
  {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_{0};
  int height_{0};
  std::vector<std::uint8_t> data_;
};

// Uncompressed column-major RLE: alternating background/foreground runs,
// starting with background, walking each column top to bottom.
using RleCounts = std::vector<std::uint32_t>;

Bitmap decode_rle(std::span<const std::uint32_t> counts, int width, int height);
RleCounts encode_rle(const Bitmap & bitmap);

struct PixelBox
{
  double x_min{};
  double y_min{};
  double x_max{};
  double y_max{};

  bool operator==(const PixelBox &) const = default;
};

struct InstanceMask2D
{
  std::string camera_id;
  std::string class_label;  // canonical class after synonym collapse
  std::string raw_prompt;   // synonym that fired
  double score{};
  PixelBox bbox;
  RleCounts rle;

  bool operator==(const InstanceMask2D &) const = default;
};

using Polyline = std::vector<geometry::Vec2>;

struct LaneGraph
{
  std::vector<Polyline> lanes;  // vertex order is travel direction

  bool operator==(const LaneGraph &) const = default;
};

using ShapePriorTable = std::map<std::string, Dims>;

// The ten nuScenes detection classes.
const std::vector<std::string> & canonical_classes();
// Per-class {width, length, height} proposed by a language model for each class name.
const ShapePriorTable & default_shape_priors();

struct PointXYZI
{
  float x{};
  float y{};
  float z{};
  float intensity{};

  bool operator==(const PointXYZI &) const = default;
};

struct CameraEntry
{
  geometry::CameraModel camera;
  std::string masks_path;  // relative to the manifest directory
  std::vector<InstanceMask2D> masks;

  bool operator==(const CameraEntry &) const = default;
};

struct FrameRecord
{
  std::string frame_id;
  std::int64_t timestamp_ns{};
  geometry::SE3Pose ego_pose;  // ego -> global
  std::string lidar_path;
  std::vector<PointXYZI> points;  // ego frame at sweep time
  std::vector<CameraEntry> cameras;
  std::optional<std::string> external_boxes_path;
  std::vector<Cuboid> external_boxes;

  bool operator==(const FrameRecord &) const = default;
};

struct SceneBundle
{
  std::string scene_id;
  std::vector<std::string> classes;
  std::vector<FrameRecord> frames;
  std::string lanes_path{"lanes.json"};
  LaneGraph lane_graph;
  std::string shape_priors_path{"shape_priors.json"};
  ShapePriorTable shape_priors;

  bool operator==(const SceneBundle &) const = default;
};

// Loads and validates every referenced file. Missing or unreadable files raise
// IoError; malformed content or violated invariants raise ValidationError.
// `jobs` bounds parallel frame loading.
SceneBundle load_bundle(const std::filesystem::path & manifest_path, int jobs = 1);

// Writes the manifest as `dir/scene.json` plus every payload file at the
// relative paths recorded in the bundle.
void write_bundle(const SceneBundle & bundle, const std::filesystem::path & dir);

// Structural checks shared by the loader and writer.
void validate_bundle(const SceneBundle & bundle);
void validate_mask(const InstanceMask2D & mask, const geometry::CameraModel & cam,
                   const std::vector<std::string> & classes, const std::string & where);

std::vector<PointXYZI> read_point_cloud(const std::filesystem::path & path);
void write_point_cloud(std::span<const PointXYZI> points, const std::filesystem::path & path);
std::vector<geometry::Vec3> to_vec3(std::span<const PointXYZI> points);

struct CuboidFile
{
  std::vector<std::string> frame_ids;  // every frame covered, including empty ones
  std::vector<Cuboid> cuboids;
  nlohmann::json provenance;  // effective config echo; ignored on read

  bool operator==(const CuboidFile & other) const
  {
    return frame_ids == other.frame_ids && cuboids == other.cuboids;
  }
};

nlohmann::json cuboid_to_json(const Cuboid & cuboid);
Cuboid cuboid_from_json(const nlohmann::json & j, const std::string & where);

std::string serialize_cuboids(const CuboidFile & file);
CuboidFile parse_cuboids(const std::string & text, const std::string & where);

void write_cuboids(const CuboidFile & file, const std::filesystem::path & path);
void write_cuboids(const std::vector<Cuboid> & cuboids, const std::filesystem::path & path);
CuboidFile read_cuboid_file(const std::filesystem::path & path);
std::vector<Cuboid> read_cuboids(const std::filesystem::path & path);

std::string read_text(const std::filesystem::path & path);
void write_text(const std::string & text, const std::filesystem::path & path);
nlohmann::json read_json(const std::filesystem::path & path);

}  // namespace cuboidlift::io

#endif  // CUBOIDLIFT__SCENE_IO_HPP_
