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

#include "cuboidlift/report_io.hpp"

#include "cuboidlift/error.hpp"
#include "cuboidlift/scene_io.hpp"

#include <cmath>

namespace cuboidlift::io
{

using nlohmann::json;

double quantize_metric(double value) { return std::round(value * 1e4) / 1e4; }

namespace
{

double read_value(const json & j, const char * key, const std::string & where)
{
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw ValidationError(where + "." + key, "expected a number");
  return it->get<double>();
}

}  // namespace

std::string serialize_report(const metrics::MetricsReport & report, const json & config)
{
  const auto q = quantize_metric;
  json per_class = json::object();
  for (const auto & [label, m] : report.per_class) {
    json ap = json::array();
    for (double v : m.ap) ap.push_back(q(v));
    per_class[label] = json{{"ap", ap},
                            {"mean_ap", q(m.mean_ap)},
                            {"mATE", q(m.errors.ate)},
                            {"mASE", q(m.errors.ase)},
                            {"mAOE", q(m.errors.aoe)},
                            {"mAVE", q(m.errors.ave)},
                            {"mAAE", q(m.errors.aae)},
                            {"no_tp_matches", m.errors.empty},
                            {"num_gt", m.num_gt},
                            {"num_pred", m.num_pred}};
  }
  const auto & a = report.aggregate;
  json j{{"version", kSchemaVersion},
         {"dist_thresholds", report.dist_thresholds},
         {"per_class", per_class},
         {"aggregate",
          {{"mAP", q(a.map)},
           {"mATE", q(a.mate)},
           {"mASE", q(a.mase)},
           {"mAOE", q(a.maoe)},
           {"mAVE", q(a.mave)},
           {"mAAE", q(a.maae)},
           {"NDS", q(a.nds)}}},
         {"flags", report.flags}};
  if (!config.is_null()) j["config"] = config;
  return j.dump(2) + "\n";
}

metrics::MetricsReport parse_report(const std::string & text, const std::string & where)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error & e) {
    throw ValidationError(where, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("version", -1) != kSchemaVersion) {
    throw ValidationError(where + ".version", "unsupported or missing schema version");
  }
  metrics::MetricsReport r;
  try {
    r.dist_thresholds = j.at("dist_thresholds").get<std::vector<double>>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
    for (const auto & [label, m] : j.at("per_class").items()) {
      const std::string cw = where + ".per_class." + label;
      metrics::ClassMetrics cm;
      cm.ap = m.at("ap").get<std::vector<double>>();
      if (cm.ap.size() != r.dist_thresholds.size()) {
        throw ValidationError(cw + ".ap", "one AP per distance threshold expected");
      }
      cm.mean_ap = read_value(m, "mean_ap", cw);
      cm.errors.ate = read_value(m, "mATE", cw);
      cm.errors.ase = read_value(m, "mASE", cw);
      cm.errors.aoe = read_value(m, "mAOE", cw);
      cm.errors.ave = read_value(m, "mAVE", cw);
      cm.errors.aae = read_value(m, "mAAE", cw);
      cm.errors.empty = m.at("no_tp_matches").get<bool>();
      cm.num_gt = m.at("num_gt").get<std::size_t>();
      cm.num_pred = m.at("num_pred").get<std::size_t>();
      r.per_class[label] = cm;
    }
    const json & a = j.at("aggregate");
    const std::string aw = where + ".aggregate";
    r.aggregate.map = read_value(a, "mAP", aw);
    r.aggregate.mate = read_value(a, "mATE", aw);
    r.aggregate.mase = read_value(a, "mASE", aw);
    r.aggregate.maoe = read_value(a, "mAOE", aw);
    r.aggregate.mave = read_value(a, "mAVE", aw);
    r.aggregate.maae = read_value(a, "mAAE", aw);
    r.aggregate.nds = read_value(a, "NDS", aw);
  } catch (const json::exception & e) {
    throw ValidationError(where, e.what());
  }
  return r;
}

void write_report(const metrics::MetricsReport & report, const std::filesystem::path & path,
                  const json & config)
{
  write_text(serialize_report(report, config), path);
}

metrics::MetricsReport read_report(const std::filesystem::path & path)
{
  return parse_report(read_text(path), path.string());
}

}  // namespace cuboidlift::io
