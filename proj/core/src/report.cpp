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
#include "geomatch/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "geomatch/error.hpp"
#include "geomatch/npy.hpp"

namespace geomatch {

namespace {

struct PairEval {
  const ManifestPair* pair = nullptr;
  std::vector<ImagePoint> preds;  // aligned with pair->mutual_visible
  std::vector<bool> geo;          // aligned likewise; empty without a split
};

Json aggregate_json(const std::vector<PckResult>& results) {
  std::size_t keypoints = 0;
  for (const auto& r : results) keypoints += r.correct.size();
  if (keypoints == 0) {
    return {{"per_point", nullptr}, {"per_image", nullptr}, {"keypoints", 0}};
  }
  return {{"per_point", aggregate(results, Grouping::per_point)},
          {"per_image", aggregate(results, Grouping::per_image)},
          {"keypoints", keypoints}};
}

PckResult subset(const PckResult& r, const std::vector<bool>& geo, bool want) {
  PckResult out;
  out.threshold = r.threshold;
  for (std::size_t i = 0; i < r.correct.size(); ++i) {
    if (geo[i] != want) continue;
    out.correct.push_back(r.correct[i]);
    out.distance.push_back(r.distance[i]);
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double number_or_nan(const Json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

Json evaluate_report(const EvalInputs& in, const EvalConfig& cfg, std::uint64_t seed,
                     const std::string& config_hash) {
  cfg.validate();
  const PairManifest& manifest = *in.manifest;
  const Predictions& predictions = *in.predictions;

  std::vector<PairEval> evals;
  std::vector<AnnotatedPair> annotated;
  for (const auto& p : manifest.pairs) {
    auto it = predictions.pairs.find(p.id);
    if (it == predictions.pairs.end()) throw InputError("no predictions for pair " + p.id);
    PairEval e;
    e.pair = &p;
    for (int k : p.mutual_visible) {
      auto pt = it->second.points.find(k);
      if (pt == it->second.points.end()) {
        throw InputError("pair " + p.id + ": no prediction for keypoint " + std::to_string(k));
      }
      e.preds.push_back(pt->second);
    }
    evals.push_back(std::move(e));
    annotated.push_back(p.annotated());
  }

  Json geo_json = nullptr;
  const bool with_schemas = in.schemas != nullptr && !in.schemas->empty();
  if (with_schemas && cfg.geo_split) {
    const GeoSplit split = split_geo_standard(annotated, *in.schemas);
    for (std::size_t k = 0; k < evals.size(); ++k) evals[k].geo = split.geo[k];
    geo_json = {{"geo_keypoints", split.geo_keypoints},
                {"total_keypoints", split.total_keypoints},
                {"keypoint_fraction", split.keypoint_fraction()},
                {"geo_pairs", split.geo_pairs},
                {"total_pairs", split.total_pairs},
                {"pair_fraction", split.pair_fraction()}};
  }

  std::size_t total_keypoints = 0;
  for (const auto& e : evals) total_keypoints += e.preds.size();

  // Per-alpha overall and per-category PCK.
  Json pck_rows = Json::array();
  std::map<std::string, Json> category_rows;
  std::map<std::string, std::map<int, std::vector<PckResult>>> azimuth_bins;
  for (double alpha : cfg.alphas) {
    const PckConfig pc{alpha, cfg.reference};
    std::vector<PckResult> all;
    std::vector<PckResult> geo;
    std::vector<PckResult> standard;
    std::map<std::string, std::vector<PckResult>> by_category;
    for (const auto& e : evals) {
      PckResult r;
      try {
        r = pck(e.preds, e.pair->target, e.pair->mutual_visible, pc);
      } catch (const ArgumentError& err) {
        throw InputError("pair " + e.pair->id + ": " + err.what());
      }
      if (!e.geo.empty()) {
        geo.push_back(subset(r, e.geo, true));
        standard.push_back(subset(r, e.geo, false));
      }
      by_category[e.pair->category].push_back(r);
      all.push_back(std::move(r));
    }
    Json row = aggregate_json(all);
    row["alpha"] = alpha;
    row["geo"] = geo_json.is_null() ? Json(nullptr) : aggregate_json(geo);
    row["standard"] = geo_json.is_null() ? Json(nullptr) : aggregate_json(standard);
    pck_rows.push_back(std::move(row));
    for (const auto& [cat, results] : by_category) {
      Json crow = aggregate_json(results);
      crow["alpha"] = alpha;
      if (!category_rows.count(cat)) category_rows[cat] = Json::array();
      category_rows[cat].push_back(std::move(crow));
    }
  }

  // Breakdown and azimuth bins use the breakdown threshold.
  const PckConfig bc{cfg.breakdown_alpha, cfg.reference};
  Json breakdown_json = nullptr;
  BreakdownCounts counts;
  for (const auto& e : evals) {
    const ManifestPair& p = *e.pair;
    const PckResult r = pck(e.preds, p.target, p.mutual_visible, bc);
    if (p.azimuth_difference) azimuth_bins[p.category][*p.azimuth_difference].push_back(r);
    if (!with_schemas) continue;
    auto schema = in.schemas->find(p.category);
    if (schema == in.schemas->end()) {
      throw InputError("pair " + p.id + ": no subgroup schema for category \"" + p.category +
                       "\"");
    }
    std::optional<InstanceMask> mask;
    Foreground fg;
    fg.bbox = p.target.bbox;
    if (in.masks && in.masks->has_masks()) {
      mask = in.masks->stored_mask(p.tgt_id);
      fg.mask = &*mask;
    }
    if (!fg.mask && !fg.bbox) {
      throw InputError("pair " + p.id + ": breakdown needs a target mask or bounding box");
    }
    for (const auto& o : breakdown(e.preds, p.target, p.mutual_visible, schema->second, fg, bc)) {
      counts.add(o);
    }
  }
  if (with_schemas && counts.total() > 0) {
    const BreakdownFractions f = fractions(counts);
    breakdown_json = {{"alpha", cfg.breakdown_alpha},
                      {"counts",
                       {{"correct", counts.correct},
                        {"jitter", counts.jitter},
                        {"miss", counts.miss},
                        {"swap", counts.swap},
                        {"swap_lr", counts.swap_lr}}},
                      {"fractions",
                       {{"correct", f.correct},
                        {"jitter", f.jitter},
                        {"miss", f.miss},
                        {"swap", f.swap},
                        {"swap_lr", f.swap_lr}}}};
  }

  Json categories = Json::object();
  for (auto& [cat, rows] : category_rows) {
    std::size_t pairs = 0;
    for (const auto& e : evals) pairs += e.pair->category == cat ? 1 : 0;
    Json entry = {{"pairs", pairs}, {"pck", std::move(rows)}, {"azimuth", nullptr}};
    auto bins = azimuth_bins.find(cat);
    if (bins != azimuth_bins.end()) {
      Json bin_json = Json::object();
      std::map<int, double> scores;
      for (const auto& [bin, results] : bins->second) {
        std::size_t n = 0;
        for (const auto& r : results) n += r.correct.size();
        if (n == 0) continue;
        scores[bin] = aggregate(results, Grouping::per_point);
        bin_json[std::to_string(bin)] = scores[bin];
      }
      Json sensitivity = nullptr;
      if (!scores.empty()) {
        try {
          sensitivity = azimuth_sensitivity(scores);
        } catch (const ArgumentError&) {
          sensitivity = nullptr;
        }
      }
      entry["azimuth"] = {{"alpha", cfg.breakdown_alpha},
                          {"bins", std::move(bin_json)},
                          {"sensitivity", sensitivity}};
    }
    categories[cat] = std::move(entry);
  }

  Json report = {{"format", kReportFormat},
                 {"seed", seed},
                 {"config_hash", config_hash},
                 {"config", to_json(cfg)},
                 {"pairs", evals.size()},
                 {"keypoints", total_keypoints},
                 {"pck", std::move(pck_rows)},
                 {"geo_split", std::move(geo_json)},
                 {"breakdown", std::move(breakdown_json)},
                 {"categories", std::move(categories)}};
  if (!predictions.alignment.empty()) {
    Json chosen = Json::object();
    Json per_pair = Json::object();
    for (const auto& p : manifest.pairs) {
      auto it = predictions.alignment.find(p.id);
      if (it == predictions.alignment.end()) continue;
      const std::string label = to_string(it->second.chosen);
      chosen[label] = chosen.value(label, 0) + 1;
      Json scores = Json::object();
      for (const auto& [variant, score] : it->second.scores) scores[to_string(variant)] = score;
      per_pair[p.id] = {{"chosen", label}, {"scores", std::move(scores)}};
    }
    report["alignment"] = {{"chosen", std::move(chosen)}, {"pairs", std::move(per_pair)}};
  }
  return report;
}

std::string report_csv(const Json& report) {
  std::ostringstream out;
  out << "category,alpha,pairs,keypoints,pck_per_point,pck_per_image\n";
  for (const auto& [cat, entry] : report.at("categories").items()) {
    for (const auto& row : entry.at("pck")) {
      out << cat << ',' << format_number(row.at("alpha").get<double>()) << ','
          << entry.at("pairs").get<std::size_t>() << ',' << row.at("keypoints").get<std::size_t>()
          << ',' << format_number(number_or_nan(row.at("per_point"))) << ','
          << format_number(number_or_nan(row.at("per_image"))) << '\n';
    }
  }
  return out.str();
}

std::string render_bar_chart_svg(const std::string& title, const std::vector<std::string>& groups,
                                 const std::vector<BarSeries>& series) {
  static const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
                                  "#937860"};
  const double left = 60;
  const double top = 40;
  const double plot_h = 240;
  const double bar_w = 18;
  const double gap = 24;
  const double group_w = bar_w * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + gap;
  const double plot_w = std::max(200.0, group_w * static_cast<double>(groups.size()));
  const double width = left + plot_w + 160;
  const double height = top + plot_h + 90;
  char buf[256];
  std::ostringstream s;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "font-family=\"sans-serif\" font-size=\"11\">\n",
                width, height);
  s << buf;
  std::snprintf(buf, sizeof(buf), "<text x=\"%.0f\" y=\"20\" font-size=\"14\">", left);
  s << buf << xml_escape(title) << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = top + plot_h - plot_h * t / 4.0;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>\n"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.2f</text>\n",
                  left, y, left + plot_w, y, left - 6, y + 4, t / 4.0);
    s << buf;
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = left + gap / 2 + group_w * static_cast<double>(g);
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double v = g < series[k].values.size() ? series[k].values[g]
                                                   : std::numeric_limits<double>::quiet_NaN();
      if (std::isnan(v)) continue;
      const double h = plot_h * std::clamp(v, 0.0, 1.0);
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"%s\">"
                    "<title>%.4f</title></rect>\n",
                    gx + bar_w * static_cast<double>(k), top + plot_h - h, bar_w - 2, h,
                    kColors[k % 6], v);
      s << buf;
    }
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">",
                  gx + bar_w * static_cast<double>(series.size()) / 2, top + plot_h + 16);
    s << buf << xml_escape(groups[g]) << "</text>\n";
  }
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#333\"/>\n", left,
                top + plot_h, left + plot_w, top + plot_h);
  s << buf;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double ly = top + 14.0 * static_cast<double>(k);
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"10\" height=\"10\" fill=\"%s\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\">",
                  left + plot_w + 16, ly, kColors[k % 6], left + plot_w + 30, ly + 9);
    s << buf << xml_escape(series[k].name) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::map<std::string, std::string> report_charts(const Json& report) {
  std::map<std::string, std::string> charts;
  std::vector<std::string> cats;
  std::vector<BarSeries> per_alpha;
  for (const auto& row : report.at("pck")) {
    per_alpha.push_back({"PCK@" + format_number(row.at("alpha").get<double>()).substr(0, 4), {}});
  }
  for (const auto& [cat, entry] : report.at("categories").items()) {
    cats.push_back(cat);
    const auto& rows = entry.at("pck");
    for (std::size_t k = 0; k < per_alpha.size() && k < rows.size(); ++k) {
      per_alpha[k].values.push_back(number_or_nan(rows[k].at("per_point")));
    }
  }
  charts["pck_per_category.svg"] = render_bar_chart_svg("PCK per category", cats, per_alpha);

  if (!report.at("geo_split").is_null()) {
    std::vector<std::string> alphas;
    BarSeries geo{"geometry-aware", {}};
    BarSeries standard{"standard", {}};
    for (const auto& row : report.at("pck")) {
      alphas.push_back("alpha=" + format_number(row.at("alpha").get<double>()).substr(0, 4));
      geo.values.push_back(number_or_nan(row.at("geo").at("per_point")));
      standard.values.push_back(number_or_nan(row.at("standard").at("per_point")));
    }
    charts["geo_vs_standard.svg"] =
        render_bar_chart_svg("Geometry-aware vs standard keypoints", alphas, {geo, standard});
  }
  return charts;
}

}  // namespace geomatch
