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

#ifndef CUBOIDLIFT__REPORT_IO_HPP_
#define CUBOIDLIFT__REPORT_IO_HPP_

#include "cuboidlift/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace cuboidlift::io
{

// Metric values are written as fractions rounded to 4 decimals; `config` is
// echoed verbatim as provenance and ignored on read.
std::string serialize_report(const metrics::MetricsReport & report, const nlohmann::json & config = {});
metrics::MetricsReport parse_report(const std::string & text, const std::string & where);

void write_report(const metrics::MetricsReport & report, const std::filesystem::path & path,
                  const nlohmann::json & config = {});
metrics::MetricsReport read_report(const std::filesystem::path & path);

// Rounds to the 4 decimals kept on disk.
double quantize_metric(double value);

}  // namespace cuboidlift::io

#endif  // CUBOIDLIFT__REPORT_IO_HPP_
