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

#include "cuboidlift/metrics.hpp"

#include "cuboidlift/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace cuboidlift::metrics
{

using nlohmann::json;

void validate_config(const EvalConfig & cfg)
{
  if (cfg.dist_thresholds.empty()) throw ValidationError("eval.dist_thresholds", "must not be empty");
  for (std::size_t i = 0; i < cfg.dist_thresholds.size(); ++i) {
    if (!(cfg.dist_thresholds[i] > 0.0) || !std::isfinite(cfg.dist_thresholds[i])) {
      throw ValidationError("eval.dist_thresholds", "thresholds must be positive");
    }
    if (i > 0 && !(cfg.dist_thresholds[i] > cfg.dist_thresholds[i - 1])) {
      throw ValidationError("eval.dist_thresholds", "thresholds must be ascending");
    }
  }
  if (!(cfg.tp_threshold > 0.0)) throw ValidationError("eval.tp_threshold", "must be positive");
  if (!(cfg.default_yaw_period > 0.0)) throw ValidationError("eval.default_yaw_period", "must be positive");
  for (const auto & [label, p] : cfg.yaw_period) {
    if (!(p > 0.0)) throw ValidationError("eval.yaw_period." + label, "must be positive");
  }
  if (!(cfg.min_recall >= 0.0 && cfg.min_recall < 1.0)) {
    throw ValidationError("eval.min_recall", "must lie in [0, 1)");
  }
  if (!(cfg.min_precision >= 0.0 && cfg.min_precision < 1.0)) {
    throw ValidationError("eval.min_precision", "must lie in [0, 1)");
  }
}

json config_to_json(const EvalConfig & cfg)
{
  return json{{"dist_thresholds", cfg.dist_thresholds},
              {"class_agnostic", cfg.class_agnostic},
              {"ap_mode", cfg.ap_mode == ApMode::kRawAuc ? "raw_auc" : "nuscenes_normalized"},
              {"default_yaw_period", cfg.default_yaw_period},
              {"yaw_period", cfg.yaw_period},
              {"tp_threshold", cfg.tp_threshold},
              {"min_recall", cfg.min_recall},
              {"min_precision", cfg.min_precision}};
}

EvalConfig config_from_json(const json & j)
{
  EvalConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ValidationError("eval", "expected an object");
  for (const auto & [key, value] : j.items()) {
    const std::string where = "eval." + key;
    try {
      if (key == "dist_thresholds") {
        cfg.dist_thresholds = value.get<std::vector<double>>();
      } else if (key == "class_agnostic") {
        cfg.class_agnostic = value.get<bool>();
      } else if (key == "ap_mode") {
        const auto mode = value.get<std::string>();
        if (mode == "raw_auc") {
          cfg.ap_mode = ApMode::kRawAuc;
        } else if (mode == "nuscenes_normalized") {
          cfg.ap_mode = ApMode::kNuscenesNormalized;
        } else {
          throw ValidationError(where, "unknown mode '" + mode + "'");
        }
      } else if (key == "default_yaw_period") {
        cfg.default_yaw_period = value.get<double>();
      } else if (key == "yaw_period") {
        cfg.yaw_period = value.get<std::map<std::string, double>>();
      } else if (key == "tp_threshold") {
        cfg.tp_threshold = value.get<double>();
      } else if (key == "min_recall") {
        cfg.min_recall = value.get<double>();
      } else if (key == "min_precision") {
        cfg.min_precision = value.get<double>();
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

namespace
{

double planar_distance(const Cuboid & a, const Cuboid & b)
{
  return (a.center.head<2>() - b.center.head<2>()).norm();
}

// Total order on cuboid content with the highest score first.
bool canonical_less(const Cuboid & a, const Cuboid & b)
{
  const auto key = [](const Cuboid & c) {
    const double vx = c.velocity ? c.velocity->x() : std::numeric_limits<double>::lowest();
    const double vy = c.velocity ? c.velocity->y() : std::numeric_limits<double>::lowest();
    return std::make_tuple(-c.score, std::cref(c.frame_id), std::cref(c.class_label), c.center.x(),
                           c.center.y(), c.center.z(), c.yaw, c.dims.width, c.dims.length,
                           c.dims.height, c.velocity.has_value(), vx, vy, static_cast<int>(c.source));
  };
  return key(a) < key(b);
}

std::vector<Cuboid> canonical(std::span<const Cuboid> in)
{
  std::vector<Cuboid> out(in.begin(), in.end());
  std::stable_sort(out.begin(), out.end(), canonical_less);
  return out;
}

}  // namespace

CenterMatch match_center_distance(std::span<const Cuboid> preds, std::span<const Cuboid> gts,
                                  double threshold_m)
{
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  CenterMatch out;
  std::vector<bool> used(gts.size(), false);
  for (std::size_t p : order) {
    std::size_t best = gts.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g]) continue;
      const double d = planar_distance(preds[p], gts[g]);
      if (d <= threshold_m && d < best_d) {
        best_d = d;
        best = g;
      }
    }
    if (best == gts.size()) {
      out.unmatched_preds.push_back(p);
    } else {
      used[best] = true;
      out.pairs.emplace_back(p, best);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!used[g]) out.unmatched_gts.push_back(g);
  }
  return out;
}

PrCurve build_pr_curve(std::span<const Cuboid> preds, std::span<const Cuboid> gts, double threshold_m)
{
  const std::vector<Cuboid> p_sorted = canonical(preds);
  const std::vector<Cuboid> g_sorted = canonical(gts);

  std::map<std::string, std::vector<Cuboid>> gts_by_frame;
  for (const auto & g : g_sorted) gts_by_frame[g.frame_id].push_back(g);
  std::map<std::string, std::vector<std::size_t>> preds_by_frame;
  for (std::size_t i = 0; i < p_sorted.size(); ++i) preds_by_frame[p_sorted[i].frame_id].push_back(i);

  std::vector<bool> is_tp(p_sorted.size(), false);
  PrCurve curve;
  curve.num_gt = g_sorted.size();
  for (const auto & [frame_id, indices] : preds_by_frame) {
    std::vector<Cuboid> frame_preds;
    for (std::size_t i : indices) frame_preds.push_back(p_sorted[i]);
    static const std::vector<Cuboid> kNone;
    auto it = gts_by_frame.find(frame_id);
    const auto & frame_gts = it == gts_by_frame.end() ? kNone : it->second;
    const CenterMatch m = match_center_distance(frame_preds, frame_gts, threshold_m);
    for (const auto & [p, g] : m.pairs) {
      is_tp[indices[p]] = true;
      curve.matched.emplace_back(frame_preds[p], frame_gts[g]);
    }
  }
  // Matched pairs in global score order so downstream means are order-stable.
  std::stable_sort(curve.matched.begin(), curve.matched.end(),
                   [](const auto & a, const auto & b) { return canonical_less(a.first, b.first); });
  for (std::size_t i = 0; i < p_sorted.size(); ++i) {
    curve.scores.push_back(p_sorted[i].score);
    curve.tp.push_back(is_tp[i]);
  }
  return curve;
}

double ap_from_curve(const std::vector<bool> & tp_sorted, std::size_t num_gt, ApMode mode,
                     double min_recall, double min_precision)
{
  if (num_gt == 0 || tp_sorted.empty()) return 0.0;
  const double n_gt = static_cast<double>(num_gt);
  std::vector<double> recall;
  std::vector<double> precision;
  recall.reserve(tp_sorted.size());
  precision.reserve(tp_sorted.size());
  double tp = 0.0;
  for (std::size_t k = 0; k < tp_sorted.size(); ++k) {
    if (tp_sorted[k]) tp += 1.0;
    recall.push_back(tp / n_gt);
    precision.push_back(tp / static_cast<double>(k + 1));
  }

  if (mode == ApMode::kRawAuc) {
    double ap = 0.0;
    for (std::size_t k = 0; k < tp_sorted.size(); ++k) {
      if (tp_sorted[k]) ap += precision[k] / n_gt;
    }
    return ap;
  }

  // Piecewise-linear precision over recall, walking the query grid and the
  // curve together. Within a run of equal recalls the last point is used.
  const std::size_t n = recall.size();
  const std::size_t first_bin = static_cast<std::size_t>(std::lround(100.0 * min_recall)) + 1;
  double sum = 0.0;
  std::size_t j = 0;
  for (std::size_t b = 0; b <= 100; ++b) {
    const double r = static_cast<double>(b) * 0.01;
    double p;
    if (r > recall[n - 1]) {
      p = 0.0;
    } else if (r < recall[0]) {
      p = precision[0];
    } else if (r == recall[n - 1]) {
      p = precision[n - 1];
    } else {
      while (j + 1 < n && recall[j + 1] <= r) ++j;
      const double slope = (precision[j + 1] - precision[j]) / (recall[j + 1] - recall[j]);
      p = slope * (r - recall[j]) + precision[j];
    }
    if (b >= first_bin) sum += std::max(0.0, p - min_precision);
  }
  const double bins = static_cast<double>(101 - std::min<std::size_t>(first_bin, 101));
  if (bins == 0.0) return 0.0;
  return sum / bins / (1.0 - min_precision);
}

ApResult average_precision(std::span<const Cuboid> preds, std::span<const Cuboid> gts, double threshold_m,
                           ApMode mode, double min_recall, double min_precision)
{
  if (gts.empty()) return {0.0, true};
  const PrCurve curve = build_pr_curve(preds, gts, threshold_m);
  return {ap_from_curve(curve.tp, curve.num_gt, mode, min_recall, min_precision), false};
}

double yaw_error(double a, double b, double period)
{
  const double diff = std::fmod(std::abs(a - b), period);
  return std::min(diff, period - diff);
}

double scale_error(const Dims & a, const Dims & b)
{
  const double inter = std::min(a.width, b.width) * std::min(a.length, b.length) *
                       std::min(a.height, b.height);
  const double uni = a.width * a.length * a.height + b.width * b.length * b.height - inter;
  return 1.0 - inter / uni;
}

TpErrors tp_errors(const std::vector<std::pair<Cuboid, Cuboid>> & pairs, const EvalConfig & cfg)
{
  TpErrors out;
  if (pairs.empty()) return out;
  double ate = 0.0;
  double ase = 0.0;
  double aoe = 0.0;
  double ave = 0.0;
  for (const auto & [pred, gt] : pairs) {
    ate += planar_distance(pred, gt);
    ase += scale_error(pred.dims, gt.dims);
    auto it = cfg.yaw_period.find(gt.class_label);
    const double period = it == cfg.yaw_period.end() ? cfg.default_yaw_period : it->second;
    aoe += yaw_error(pred.yaw, gt.yaw, period);
    ave += (pred.velocity && gt.velocity) ? (*pred.velocity - *gt.velocity).norm() : 1.0;
  }
  const double n = static_cast<double>(pairs.size());
  out.ate = ate / n;
  out.ase = ase / n;
  out.aoe = aoe / n;
  out.ave = ave / n;
  out.aae = 1.0;
  out.empty = false;
  return out;
}

double nds(double map, double mate, double mase, double maoe, double mave, double maae)
{
  double tp_score = 0.0;
  for (double e : {mate, mase, maoe, mave, maae}) tp_score += 1.0 - std::min(1.0, e);
  return (5.0 * map + tp_score) / 10.0;
}

MetricsReport evaluate(const std::vector<Cuboid> & preds_in, const std::vector<Cuboid> & gts_in,
                       const EvalConfig & cfg)
{
  validate_config(cfg);
  std::vector<Cuboid> preds = preds_in;
  std::vector<Cuboid> gts = gts_in;
  if (cfg.class_agnostic) {
    for (auto & c : preds) c.class_label = kAgnosticLabel;
    for (auto & c : gts) c.class_label = kAgnosticLabel;
  }

  std::map<std::string, std::pair<std::vector<Cuboid>, std::vector<Cuboid>>> by_class;
  for (const auto & c : preds) by_class[c.class_label].first.push_back(c);
  for (const auto & c : gts) by_class[c.class_label].second.push_back(c);

  MetricsReport report;
  report.dist_thresholds = cfg.dist_thresholds;
  report.flags.push_back("aae_unsupported");

  std::vector<const ClassMetrics *> evaluated;
  for (const auto & [label, sets] : by_class) {
    const auto & [cp, cg] = sets;
    ClassMetrics m;
    m.num_pred = cp.size();
    m.num_gt = cg.size();
    for (double t : cfg.dist_thresholds) {
      m.ap.push_back(average_precision(cp, cg, t, cfg.ap_mode, cfg.min_recall, cfg.min_precision).ap);
    }
    m.mean_ap = std::accumulate(m.ap.begin(), m.ap.end(), 0.0) / static_cast<double>(m.ap.size());
    m.errors = tp_errors(build_pr_curve(cp, cg, cfg.tp_threshold).matched, cfg);
    if (cg.empty()) report.flags.push_back("no_gt:" + label);
    if (m.errors.empty) report.flags.push_back("no_tp_matches:" + label);
    report.per_class[label] = m;
  }
  for (const auto & [label, m] : report.per_class) {
    if (m.num_gt > 0) evaluated.push_back(&m);
  }

  Aggregate & agg = report.aggregate;
  if (evaluated.empty()) {
    report.flags.push_back("no_ground_truth");
  } else {
    const double n = static_cast<double>(evaluated.size());
    agg.map = agg.mate = agg.mase = agg.maoe = agg.mave = agg.maae = 0.0;
    for (const ClassMetrics * m : evaluated) {
      agg.map += m->mean_ap / n;
      agg.mate += m->errors.ate / n;
      agg.mase += m->errors.ase / n;
      agg.maoe += m->errors.aoe / n;
      agg.mave += m->errors.ave / n;
      agg.maae += m->errors.aae / n;
    }
  }
  agg.nds = nds(agg.map, agg.mate, agg.mase, agg.maoe, agg.mave, agg.maae);
  std::sort(report.flags.begin() + 1, report.flags.end());
  return report;
}

MetricsReport evaluate(const std::vector<Cuboid> & preds, const std::vector<std::string> & pred_frames,
                       const std::vector<Cuboid> & gts, const std::vector<std::string> & gt_frames,
                       const EvalConfig & cfg)
{
  std::set<std::string> gt_set(gt_frames.begin(), gt_frames.end());
  if (gt_frames.empty()) {
    for (const auto & g : gts) gt_set.insert(g.frame_id);
  }
  if (!pred_frames.empty() && !gt_frames.empty()) {
    const std::set<std::string> pred_set(pred_frames.begin(), pred_frames.end());
    if (pred_set != gt_set) {
      throw ValidationError("frame_ids", "prediction and ground-truth files cover different frames");
    }
  }
  for (const auto & p : preds) {
    if (!gt_set.count(p.frame_id)) {
      throw ValidationError("frame_ids", "prediction for frame '" + p.frame_id +
                                           "' has no ground-truth frame");
    }
  }
  return evaluate(preds, gts, cfg);
}

std::string format_table(const MetricsReport & report)
{
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << std::left << std::setw(22) << "class" << std::right;
  for (double t : report.dist_thresholds) {
    std::ostringstream h;
    h << "AP@" << t;
    os << std::setw(9) << h.str();
  }
  os << std::setw(9) << "mAP" << std::setw(9) << "ATE" << std::setw(9) << "ASE" << std::setw(9) << "AOE"
     << std::setw(9) << "AVE" << std::setw(9) << "AAE" << std::setw(7) << "n_gt" << std::setw(8)
     << "n_pred" << "\n";
  for (const auto & [label, m] : report.per_class) {
    os << std::left << std::setw(22) << label << std::right;
    for (double ap : m.ap) os << std::setw(9) << ap;
    os << std::setw(9) << m.mean_ap << std::setw(9) << m.errors.ate << std::setw(9) << m.errors.ase
       << std::setw(9) << m.errors.aoe << std::setw(9) << m.errors.ave << std::setw(9) << m.errors.aae
       << std::setw(7) << m.num_gt << std::setw(8) << m.num_pred << "\n";
  }
  const auto & a = report.aggregate;
  os << "\nmAP  " << a.map << "\nmATE " << a.mate << "\nmASE " << a.mase << "\nmAOE " << a.maoe
     << "\nmAVE " << a.mave << "\nmAAE " << a.maae << "\nNDS  " << a.nds << "\n";
  return os.str();
}

}  // namespace cuboidlift::metrics
