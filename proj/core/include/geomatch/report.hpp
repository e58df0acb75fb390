/*
 * Copyright (c) 2026 The geomatch Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Evaluation reports: PCK at several thresholds, the geometry-aware split,
// the error breakdown, and azimuth sensitivity; plus CSV and SVG renderings.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geomatch/json_io.hpp"
#include "geomatch/manifest.hpp"
#include "geomatch/pipeline.hpp"

namespace geomatch {

struct EvalInputs {
  const PairManifest* manifest = nullptr;
  const Predictions* predictions = nullptr;
  const SchemaRegistry* schemas = nullptr;  // optional; enables geo split and breakdown
  const FeatureStore* masks = nullptr;      // optional; foreground masks for the breakdown
};

/// Full report as JSON (format geomatch.report/1). Throws InputError when a
/// pair or keypoint has no prediction.
Json evaluate_report(const EvalInputs& in, const EvalConfig& cfg, std::uint64_t seed,
                     const std::string& config_hash);

/// One row per (category, alpha).
std::string report_csv(const Json& report);

struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per group; NaN renders as a gap
};

/// Grouped vertical bar chart on a 0..1 axis.
std::string render_bar_chart_svg(const std::string& title, const std::vector<std::string>& groups,
                                 const std::vector<BarSeries>& series);

/// PCK per category and geo-aware vs standard charts from a report.
std::map<std::string, std::string> report_charts(const Json& report);

}  // namespace geomatch
