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

#ifndef CUBOIDLIFT__METRICS_HPP_
#define CUBOIDLIFT__METRICS_HPP_

#include "cuboidlift/cuboid.hpp"

#include <json.hpp>

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cuboidlift::metrics
{

enum class ApMode { kNuscenesNormalized, kRawAuc };

struct EvalConfig
{
  std::vector<double> dist_thresholds{0.5, 1.0, 2.0, 4.0};
  bool class_agnostic{false};
  ApMode ap_mode{ApMode::kNuscenesNormalized};
  double default_yaw_period{2.0 * 3.14159265358979323846};
  std::map<std::string, double> yaw_period{{"barrier", 3.14159265358979323846}};
  double tp_threshold{2.0};  // matching distance feeding the TP error metrics
  double min_recall{0.1};
  double min_precision{0.1};
};

void validate_config(const EvalConfig & cfg);
nlohmann::json config_to_json(const EvalConfig & cfg);
EvalConfig config_from_json(const nlohmann::json & j);

// Label used for every cuboid in class-agnostic mode.
inline constexpr const char * kAgnosticLabel = "all";

struct CenterMatch
{
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (pred, gt), in pred visiting order
  std::vector<std::size_t> unmatched_preds;
  std::vector<std::size_t> unmatched_gts;
};

// Single frame, single class. Predictions are visited by descending score
// (ties by index); each takes the nearest unused GT within `threshold_m` on
// the ground plane (ties by lower GT index).
CenterMatch match_center_distance(std::span<const Cuboid> preds, std::span<const Cuboid> gts,
                                  double threshold_m);

// Operating points of a PR curve: TP flag per prediction in descending score
// order, accumulated over all frames.
struct PrCurve
{
  std::vector<double> scores;
  std::vector<bool> tp;
  std::size_t num_gt{};
  std::vector<std::pair<Cuboid, Cuboid>> matched;  // (pred, gt)
};

// Matches frame by frame and merges the results into one score-sorted curve.
// Inputs are canonicalized first, so the result does not depend on ordering.
PrCurve build_pr_curve(std::span<const Cuboid> preds, std::span<const Cuboid> gts, double threshold_m);

struct ApResult
{
  double ap{};
  bool no_gt{false};
};

// raw_auc: sum of precision at each true positive, weighted 1 / num_gt.
// nuscenes_normalized: precision sampled at 101 recall points (linear
// interpolation, zero beyond the last recall), points at or below min_recall
// dropped, precision floored at min_precision and renormalized.
double ap_from_curve(const std::vector<bool> & tp_sorted, std::size_t num_gt, ApMode mode,
                     double min_recall = 0.1, double min_precision = 0.1);
ApResult average_precision(std::span<const Cuboid> preds, std::span<const Cuboid> gts, double threshold_m,
                           ApMode mode, double min_recall = 0.1, double min_precision = 0.1);

struct TpErrors
{
  double ate{1.0};
  double ase{1.0};
  double aoe{1.0};
  double ave{1.0};
  double aae{1.0};
  bool empty{true};
};

double yaw_error(double a, double b, double period);
double scale_error(const Dims & a, const Dims & b);

// Means over matched (pred, gt) pairs. Without pairs every error is 1.0 and
// `empty` is set. Attributes are not modeled, so AAE is always 1.0.
TpErrors tp_errors(const std::vector<std::pair<Cuboid, Cuboid>> & pairs, const EvalConfig & cfg);

double nds(double map, double mate, double mase, double maoe, double mave, double maae);

struct ClassMetrics
{
  std::vector<double> ap;  // aligned with dist_thresholds
  double mean_ap{};
  TpErrors errors;
  std::size_t num_gt{};
  std::size_t num_pred{};

  bool operator==(const ClassMetrics & o) const
  {
    return ap == o.ap && mean_ap == o.mean_ap && errors.ate == o.errors.ate &&
           errors.ase == o.errors.ase && errors.aoe == o.errors.aoe && errors.ave == o.errors.ave &&
           errors.aae == o.errors.aae && errors.empty == o.errors.empty && num_gt == o.num_gt &&
           num_pred == o.num_pred;
  }
};

struct Aggregate
{
  double map{};
  double mate{1.0};
  double mase{1.0};
  double maoe{1.0};
  double mave{1.0};
  double maae{1.0};
  double nds{};

  bool operator==(const Aggregate &) const = default;
};

struct MetricsReport
{
  std::vector<double> dist_thresholds;
  std::map<std::string, ClassMetrics> per_class;
  Aggregate aggregate;
  std::vector<std::string> flags;

  bool operator==(const MetricsReport &) const = default;
};

// Classes without GT are reported and flagged but excluded from the means.
MetricsReport evaluate(const std::vector<Cuboid> & preds, const std::vector<Cuboid> & gts,
                       const EvalConfig & cfg);

// Same, after checking that both sides cover the same frames. An explicit
// frame list wins over the frames implied by the cuboids.
MetricsReport evaluate(const std::vector<Cuboid> & preds, const std::vector<std::string> & pred_frames,
                       const std::vector<Cuboid> & gts, const std::vector<std::string> & gt_frames,
                       const EvalConfig & cfg);

// Fixed-width text table, one row per class plus the aggregate.
std::string format_table(const MetricsReport & report);

}  // namespace cuboidlift::metrics

#endif  // CUBOIDLIFT__METRICS_HPP_
