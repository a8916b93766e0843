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

// Reference implementations used only by tests. Each one is written for
// clarity, not speed, and shares no code with the library.
#ifndef CUBOIDLIFT_TESTS__ORACLES_HPP_
#define CUBOIDLIFT_TESTS__ORACLES_HPP_

#include "cuboidlift/cuboid.hpp"
#include "cuboidlift/scene_io.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle
{

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using cuboidlift::Cuboid;

inline double dist3(const Vec3 & a, const Vec3 & b)
{
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Full O(n^2) scan; ties resolve to the lowest index.
inline std::size_t medoid(const std::vector<Vec3> & pts)
{
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) s += dist3(pts[i], pts[j]);
    if (s < best_sum) {
      best_sum = s;
      best = i;
    }
  }
  return best;
}

inline double box_iou(const cuboidlift::io::PixelBox & a, const cuboidlift::io::PixelBox & b)
{
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0 || h <= 0) return 0.0;
  const double area_a = (a.x_max - a.x_min) * (a.y_max - a.y_min);
  const double area_b = (b.x_max - b.x_min) * (b.y_max - b.y_min);
  return w * h / (area_a + area_b - w * h);
}

// Repeatedly take the best remaining mask and strike everything it covers.
inline std::vector<std::size_t> nms2d(const std::vector<cuboidlift::io::InstanceMask2D> & masks,
                                      double score_min, double iou_thr)
{
  std::vector<bool> alive(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) alive[i] = masks[i].score >= score_min;
  std::vector<std::size_t> kept;
  while (true) {
    std::size_t best = masks.size();
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (alive[i] && (best == masks.size() || masks[i].score > masks[best].score)) best = i;
    }
    if (best == masks.size()) break;
    kept.push_back(best);
    alive[best] = false;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (alive[i] && box_iou(masks[best].bbox, masks[i].bbox) > iou_thr) alive[i] = false;
    }
  }
  return kept;
}

inline double planar(const Cuboid & a, const Cuboid & b)
{
  return std::hypot(a.center.x() - b.center.x(), a.center.y() - b.center.y());
}

// Same contract as nms2d above, in BEV center distance, per class.
inline std::vector<std::size_t> nms3d(const std::vector<Cuboid> & boxes, double thr, const Vec2 & ego)
{
  auto ego_d = [&](std::size_t i) {
    return std::hypot(boxes[i].center.x() - ego.x(), boxes[i].center.y() - ego.y());
  };
  std::vector<bool> alive(boxes.size(), true);
  std::vector<std::size_t> kept;
  while (true) {
    std::size_t best = boxes.size();
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (!alive[i]) continue;
      if (best == boxes.size() || boxes[i].score > boxes[best].score ||
          (boxes[i].score == boxes[best].score && ego_d(i) < ego_d(best))) {
        best = i;
      }
    }
    if (best == boxes.size()) break;
    kept.push_back(best);
    alive[best] = false;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (alive[i] && boxes[i].class_label == boxes[best].class_label && planar(boxes[i], boxes[best]) < thr) {
        alive[i] = false;
      }
    }
  }
  return kept;
}

// Exhaustive greedy: scan every open pair for the maximum each round.
struct PairMatch
{
  std::size_t a;
  std::size_t b;
  double iou;
};

template <typename IouFn>
std::vector<PairMatch> greedy(std::size_t na, std::size_t nb, IouFn iou, double iou_min)
{
  std::vector<bool> used_a(na, false);
  std::vector<bool> used_b(nb, false);
  std::vector<PairMatch> out;
  while (true) {
    PairMatch best{na, nb, -1.0};
    for (std::size_t i = 0; i < na; ++i) {
      for (std::size_t j = 0; j < nb; ++j) {
        if (used_a[i] || used_b[j]) continue;
        const double v = iou(i, j);
        if (v > best.iou) best = {i, j, v};
      }
    }
    if (best.a == na || best.iou <= 0.0 || best.iou < iou_min) break;
    used_a[best.a] = used_b[best.b] = true;
    out.push_back(best);
  }
  return out;
}

// Point-in-oriented-box test used by the volume oracle.
inline bool inside(const Cuboid & c, const Vec3 & p)
{
  const double dx = p.x() - c.center.x();
  const double dy = p.y() - c.center.y();
  const double along = std::cos(c.yaw) * dx + std::sin(c.yaw) * dy;
  const double across = -std::sin(c.yaw) * dx + std::cos(c.yaw) * dy;
  return std::abs(along) <= c.dims.length / 2 && std::abs(across) <= c.dims.width / 2 &&
         std::abs(p.z() - c.center.z()) <= c.dims.height / 2;
}

inline double monte_carlo_iou3d(const Cuboid & a, const Cuboid & b, std::size_t samples, std::mt19937_64 & rng)
{
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Cuboid * c : {&a, &b}) {
    const double r = 0.5 * std::hypot(c->dims.width, c->dims.length);
    lo = lo.cwiseMin(c->center - Vec3(r, r, c->dims.height / 2));
    hi = hi.cwiseMax(c->center + Vec3(r, r, c->dims.height / 2));
  }
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y()), uz(lo.z(), hi.z());
  std::size_t in_a = 0, in_b = 0, both = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec3 p(ux(rng), uy(rng), uz(rng));
    const bool ia = inside(a, p);
    const bool ib = inside(b, p);
    in_a += ia;
    in_b += ib;
    both += ia && ib;
  }
  const double uni = static_cast<double>(in_a + in_b - both);
  return uni == 0 ? 0.0 : static_cast<double>(both) / uni;
}

// Pixel kept iff every pixel of the k x k window exists and is set.
inline cuboidlift::io::Bitmap erode(const cuboidlift::io::Bitmap & m, int k)
{
  const int r = k / 2;
  cuboidlift::io::Bitmap out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool all = true;
      for (int dy = -r; dy <= r && all; ++dy) {
        for (int dx = -r; dx <= r && all; ++dx) {
          const int xx = x + dx, yy = y + dy;
          all = xx >= 0 && yy >= 0 && xx < m.width() && yy < m.height() && m.at(xx, yy);
        }
      }
      out.set(x, y, all);
    }
  }
  return out;
}

// numpy.interp(x, xp, fp, right=0) via binary search per query.
inline double interp(double x, const std::vector<double> & xp, const std::vector<double> & fp)
{
  if (x > xp.back()) return 0.0;
  if (x < xp.front()) return fp.front();
  const std::size_t j = static_cast<std::size_t>(std::upper_bound(xp.begin(), xp.end(), x) - xp.begin()) - 1;
  if (j + 1 >= xp.size()) return fp[j];
  return fp[j] + (fp[j + 1] - fp[j]) * (x - xp[j]) / (xp[j + 1] - xp[j]);
}

// nuScenes-style AP from a TP/FP sequence already sorted by score.
inline double nuscenes_ap(const std::vector<bool> & tp, std::size_t num_gt, double min_recall = 0.1,
                          double min_precision = 0.1)
{
  if (num_gt == 0 || tp.empty()) return 0.0;
  std::vector<double> rec, prec;
  double c = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    c += tp[i] ? 1 : 0;
    rec.push_back(c / num_gt);
    prec.push_back(c / (i + 1));
  }
  // numpy.linspace(0, 1, 101): arange(101) * step, last element pinned to stop.
  const double step = 1.0 / 100;
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(interp(i == 100 ? 1.0 : i * step, rec, prec));
  const int start = static_cast<int>(std::round(100 * min_recall)) + 1;
  double s = 0;
  int n = 0;
  for (int i = start; i <= 100; ++i, ++n) s += std::max(grid[i] - min_precision, 0.0);
  return s / n / (1.0 - min_precision);
}

inline Vec3 random_vec(std::mt19937_64 & rng, double lo, double hi)
{
  std::uniform_real_distribution<double> u(lo, hi);
  const double x = u(rng), y = u(rng), z = u(rng);
  return {x, y, z};
}

inline Eigen::Quaterniond random_rotation(std::mt19937_64 & rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  const double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  return Eigen::Quaterniond(w, x, y, z).normalized();
}

}  // namespace oracle

#endif  // CUBOIDLIFT_TESTS__ORACLES_HPP_
