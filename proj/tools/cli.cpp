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
#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>

#include "geomatch/checkpoint.hpp"
#include "geomatch/error.hpp"
#include "geomatch/json_io.hpp"
#include "geomatch/manifest.hpp"
#include "geomatch/npy.hpp"
#include "geomatch/pipeline.hpp"
#include "geomatch/report.hpp"
#include "geomatch/synthetic.hpp"

namespace geomatch::cli {
namespace {

namespace fs = std::filesystem;

inline constexpr const char* kPoseFormat = "geomatch.pose/1";
inline constexpr const char* kTrainFormat = "geomatch.train/1";
inline constexpr const char* kBenchmarkIndexFormat = "geomatch.benchmark/1";

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

// Settings shared by every subcommand: the config file plus flag overrides,
// collected as a JSON patch in config-file shape.
struct Settings {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  Json overrides = Json::object();

  void set(const std::string& pointer, Json value) {
    overrides[Json::json_pointer(pointer)] = std::move(value);
  }
  template <typename T>
  void set_if(const std::string& pointer, const std::optional<T>& value) {
    if (value) set(pointer, *value);
  }
  void set_path_if(const std::string& pointer, const std::optional<std::string>& value) {
    if (value) set(pointer, absolute(*value));
  }

  RunConfig resolve() const {
    Json doc = Json::object();
    fs::path base = fs::current_path();
    std::string origin = "command line";
    if (!config_file.empty()) {
      doc = read_json_file(config_file);
      if (!doc.is_object()) throw InputError(config_file + ": config must be a JSON object");
      base = fs::absolute(config_file).parent_path();
      origin = config_file;
    }
    doc.merge_patch(overrides);
    if (seed) doc["seed"] = *seed;
    RunConfig cfg = run_config_from_json(JsonCursor(doc, origin), base);
    cfg.check_paths();
    return cfg;
  }
};

void add_common(CLI::App* cmd, Settings& s) {
  cmd->add_option("--config", s.config_file, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", s.seed, "Random seed recorded in every output");
}

fs::path require_dir(const std::optional<fs::path>& p, const char* flag) {
  if (!p) throw ArgumentError(std::string("missing ") + flag + " (flag or config file)");
  return *p;
}

SchemaRegistry schemas_of(const RunConfig& cfg) {
  return cfg.schema_dir ? load_schema_dir(*cfg.schema_dir) : SchemaRegistry{};
}

std::optional<PostProcessor> net_of(const std::optional<std::string>& checkpoint) {
  if (!checkpoint) return std::nullopt;
  return load_checkpoint(*checkpoint);
}

Json stamp(Json j, const RunConfig& cfg) {
  j["seed"] = cfg.seed;
  j["config_hash"] = cfg.hash();
  j["config"] = cfg.settings_json();
  return j;
}

// ---- match ----------------------------------------------------------------

struct MatchArgs {
  Settings s;
  std::string manifest;
  std::string out;
  std::optional<std::string> features, schemas, alignment, checkpoint, mode, sampling;
  std::optional<int> window;
  std::optional<double> temperature, sigma;
};

void add_inference_flags(CLI::App* cmd, MatchArgs& a) {
  cmd->add_option("--mode", a.mode, "argmax | soft | window | kernel");
  cmd->add_option("--window", a.window, "Soft-argmax window size (odd)");
  cmd->add_option("--temperature", a.temperature, "Softmax temperature");
  cmd->add_option("--sigma", a.sigma, "Kernel soft-argmax Gaussian sigma (cells)");
  cmd->add_option("--sampling", a.sampling, "Query descriptor sampling: bilinear | nearest");
}

int cmd_match(MatchArgs& a, std::ostream& out) {
  a.s.set_path_if("/features_dir", a.features);
  a.s.set_path_if("/schema_dir", a.schemas);
  a.s.set_if("/inference/mode", a.mode);
  a.s.set_if("/inference/window", a.window);
  a.s.set_if("/inference/temperature", a.temperature);
  a.s.set_if("/inference/kernel_sigma", a.sigma);
  a.s.set_if("/inference/sampling", a.sampling);
  const RunConfig cfg = a.s.resolve();
  const PairManifest manifest = load_manifest(a.manifest);
  const FeatureStore store(require_dir(cfg.features_dir, "--features"), cfg.masks_dir);
  const SchemaRegistry schemas = schemas_of(cfg);
  const auto net = net_of(a.checkpoint);
  std::optional<AlignmentTable> alignment;
  if (a.alignment) alignment = load_alignment(*a.alignment);

  MatchContext ctx{&store, cfg.schema_dir ? &schemas : nullptr, net ? &*net : nullptr, 0};
  Predictions preds =
      run_match(manifest, ctx, cfg.inference.canonical(), alignment ? &*alignment : nullptr);
  preds.seed = cfg.seed;
  preds.config_hash = cfg.hash();
  preds.config = cfg.settings_json();
  write_json_file(a.out, to_json(preds));
  out << "matched " << manifest.pairs.size() << " pairs -> " << a.out << "\n";
  return kExitOk;
}

// ---- align ----------------------------------------------------------------

struct AlignArgs {
  Settings s;
  std::string manifest;
  std::string out;
  std::optional<std::string> features, masks, schemas, checkpoint, variants, metric, reduction;
};

int cmd_align(AlignArgs& a, std::ostream& out) {
  a.s.set_path_if("/features_dir", a.features);
  a.s.set_path_if("/masks_dir", a.masks);
  a.s.set_path_if("/schema_dir", a.schemas);
  a.s.set_if("/alignment/variants", a.variants);
  a.s.set_if("/alignment/metric", a.metric);
  a.s.set_if("/alignment/reduction", a.reduction);
  const RunConfig cfg = a.s.resolve();
  const PairManifest manifest = load_manifest(a.manifest);
  const FeatureStore store(require_dir(cfg.features_dir, "--features"), cfg.masks_dir);
  const SchemaRegistry schemas = schemas_of(cfg);
  const auto net = net_of(a.checkpoint);
  MatchContext ctx{&store, cfg.schema_dir ? &schemas : nullptr, net ? &*net : nullptr, 0};
  AlignmentTable table = run_align(manifest, ctx, cfg.alignment);
  table.seed = cfg.seed;
  table.config_hash = cfg.hash();
  table.config = cfg.settings_json();
  write_json_file(a.out, to_json(table));
  out << "aligned " << manifest.pairs.size() << " pairs -> " << a.out << "\n";
  return kExitOk;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  Settings s;
  std::string manifest;
  std::string predictions;
  std::string out;
  std::optional<std::string> schemas, masks, alphas, reference, csv, charts;
  std::optional<double> breakdown_alpha;
  bool geo_split = false;
  bool no_geo_split = false;
};

void write_charts(const Json& report, const fs::path& dir) {
  for (const auto& [name, svg] : report_charts(report)) write_text_file(dir / name, svg);
}

int cmd_evaluate(EvaluateArgs& a, std::ostream& out) {
  a.s.set_path_if("/schema_dir", a.schemas);
  a.s.set_path_if("/masks_dir", a.masks);
  if (a.alphas) {
    Json list = Json::array();
    std::stringstream ss(*a.alphas);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        list.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        throw ArgumentError("--alpha: not a number: '" + item + "'");
      }
    }
    a.s.set("/evaluation/alphas", list);
  }
  a.s.set_if("/evaluation/reference", a.reference);
  a.s.set_if("/evaluation/breakdown_alpha", a.breakdown_alpha);
  if (a.geo_split) a.s.set("/evaluation/geo_split", true);
  if (a.no_geo_split) a.s.set("/evaluation/geo_split", false);
  const RunConfig cfg = a.s.resolve();

  const PairManifest manifest = load_manifest(a.manifest);
  const Predictions preds = load_predictions(a.predictions);
  const SchemaRegistry schemas = schemas_of(cfg);
  std::optional<FeatureStore> masks;
  if (cfg.masks_dir) masks.emplace(fs::path(), cfg.masks_dir);
  EvalInputs in{&manifest, &preds, cfg.schema_dir ? &schemas : nullptr, masks ? &*masks : nullptr};
  const Json report = evaluate_report(in, cfg.evaluation, cfg.seed, cfg.hash());
  write_json_file(a.out, report);
  if (a.csv) write_text_file(*a.csv, report_csv(report));
  if (a.charts) write_charts(report, *a.charts);

  for (const auto& row : report.at("pck")) {
    out << "PCK@" << row.at("alpha").get<double>() << " per-point "
        << row.at("per_point").get<double>() << " per-image " << row.at("per_image").get<double>()
        << "\n";
  }
  return kExitOk;
}

// ---- build-benchmark ------------------------------------------------------

struct BuildArgs {
  Settings s;
  std::string out;
  std::optional<std::string> annotations, category;
  std::optional<int> n_val, n_test, holdout_below, train_pair_factor, min_visible,
      min_mutual_visible;
};

int cmd_build(BuildArgs& a, std::ostream& out) {
  a.s.set_path_if("/dataset_root", a.annotations);
  a.s.set_if("/benchmark/category", a.category);
  a.s.set_if("/benchmark/n_val", a.n_val);
  a.s.set_if("/benchmark/n_test", a.n_test);
  a.s.set_if("/benchmark/holdout_below", a.holdout_below);
  a.s.set_if("/benchmark/train_pair_factor", a.train_pair_factor);
  a.s.set_if("/benchmark/min_visible", a.min_visible);
  a.s.set_if("/benchmark/min_mutual_visible", a.min_mutual_visible);
  const RunConfig cfg = a.s.resolve();
  if (!cfg.dataset_root) throw ArgumentError("missing --annotations (flag or config file)");

  const fs::path annotations = *cfg.dataset_root;
  const Json coco = read_json_file(annotations);
  const AnnotationCorpus corpus = corpus_from_coco(JsonCursor(coco, annotations.string()));
  const BenchmarkOutput result = run_build_benchmark(corpus, cfg.benchmark, cfg.hash());

  const fs::path dir = a.out;
  Json index = {{"format", kBenchmarkIndexFormat}, {"settings", Json::object()}};
  for (const auto& [name, manifest] : result.settings) {
    const std::string file = name + ".json";
    write_json_file(dir / file, to_json(manifest));
    index["settings"][name] = {{"file", file}, {"pairs", manifest.pairs.size()}};
    out << name << ": " << manifest.pairs.size() << " pairs\n";
  }
  write_json_file(dir / "stats.json", result.stats);
  write_json_file(dir / "index.json", stamp(index, cfg));
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  Settings s;
  std::string manifest;
  std::string out;
  std::optional<std::string> features, schemas, init;
  std::optional<std::size_t> steps, checkpoint_every;
  std::optional<double> lr, weight_decay, dropout, perturb_std, temperature;
  std::optional<int> bottleneck, blocks, kernel;
  bool no_augment = false;
};

int cmd_train(TrainArgs& a, std::ostream& out) {
  a.s.set_path_if("/features_dir", a.features);
  a.s.set_path_if("/schema_dir", a.schemas);
  a.s.set_if("/train/total_steps", a.steps);
  a.s.set_if("/train/checkpoint_every", a.checkpoint_every);
  a.s.set_if("/train/learning_rate", a.lr);
  a.s.set_if("/train/weight_decay", a.weight_decay);
  a.s.set_if("/train/dropout", a.dropout);
  a.s.set_if("/train/perturb_std", a.perturb_std);
  a.s.set_if("/train/temperature", a.temperature);
  a.s.set_if("/train/bottleneck", a.bottleneck);
  a.s.set_if("/train/blocks", a.blocks);
  a.s.set_if("/train/kernel", a.kernel);
  if (a.no_augment) a.s.set("/train/augment", false);
  const RunConfig cfg = a.s.resolve();

  const PairManifest manifest = load_manifest(a.manifest);
  const FeatureStore store(require_dir(cfg.features_dir, "--features"), cfg.masks_dir);
  const SchemaRegistry schemas = schemas_of(cfg);
  if (cfg.train.augment && !cfg.schema_dir) {
    throw ArgumentError("augmentation needs flip maps: pass --schemas or --no-augment");
  }
  const auto pairs =
      load_train_pairs(manifest, store, cfg.schema_dir ? &schemas : nullptr, cfg.train.augment);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  auto hook = [&](std::size_t step, const PostProcessor& net) {
    std::ostringstream name;
    name << "checkpoint_" << step << ".bin";
    save_checkpoint(dir / name.str(), net);
  };
  const TrainResult result =
      train(pairs, cfg.train, net_of(a.init),
            cfg.train.checkpoint_every > 0 ? CheckpointHook(hook) : CheckpointHook{});
  save_checkpoint(dir / "final.bin", result.net);
  save_trace_csv(dir / "trace.csv", result.trace);

  Json summary = {{"format", kTrainFormat},
                  {"pairs", pairs.size()},
                  {"steps", result.trace.size()},
                  {"parameters", result.net.params().size()},
                  {"checkpoint", "final.bin"},
                  {"trace", "trace.csv"}};
  if (!result.trace.empty()) summary["final_loss"] = result.trace.back().total;
  write_json_file(dir / "train.json", stamp(summary, cfg));
  out << "trained " << result.trace.size() << " steps on " << pairs.size() << " pairs -> "
      << (dir / "final.bin").string() << "\n";
  return kExitOk;
}

// ---- predict-pose ---------------------------------------------------------

struct PoseArgs {
  Settings s;
  std::string features;
  std::string templates;
  std::string out;
  std::optional<std::string> mask;
};

int cmd_predict_pose(PoseArgs& a, std::ostream& out) {
  const RunConfig cfg = a.s.resolve();
  FeatureMap query = npy::load_feature_map(a.features);
  if (!query.normalized()) query = l2_normalize(query);
  const InstanceMask mask =
      a.mask ? npy::load_mask(*a.mask) : InstanceMask(query.grid().height, query.grid().width, true);
  const PoseTemplateManifest templates = load_pose_templates(a.templates);
  const PosePrediction p = predict_pose(query, mask, templates.sets);

  Json sets = Json::array();
  for (std::size_t k = 0; k < templates.sets.size(); ++k) {
    sets.push_back({{"name", templates.sets[k].name},
                    {"choice", p.set_choices[k]},
                    {"scores", p.set_scores[k]}});
  }
  const Json j = {{"format", kPoseFormat}, {"label", p.label},
                  {"votes", p.votes},      {"total_imd", p.total_imd},
                  {"sets", std::move(sets)}};
  write_json_file(a.out, stamp(j, cfg));
  out << "pose: " << p.label << "\n";
  return kExitOk;
}

// ---- plot -----------------------------------------------------------------

struct PlotArgs {
  std::string report;
  std::string out;
};

int cmd_plot(PlotArgs& a, std::ostream& out) {
  const Json report = read_json_file(a.report);
  const JsonCursor c(report, a.report);
  if (c.at("format").as_string() != kReportFormat) c.at("format").fail("not a geomatch report");
  write_charts(report, a.out);
  out << "charts -> " << a.out << "\n";
  return kExitOk;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::uint64_t seed = 0;
  std::string category = "ap10k";
  int channels = 16;
  int grid = 16;
};

int cmd_synth(SynthArgs& a, std::ostream& out) {
  SyntheticCorpusConfig corpus_cfg;
  corpus_cfg.seed = a.seed;
  SyntheticFeatureConfig feature_cfg;
  feature_cfg.seed = a.seed;
  feature_cfg.channels = a.channels;
  feature_cfg.grid = {a.grid, a.grid};
  const AnnotationCorpus corpus = make_synthetic_corpus(corpus_cfg);
  write_synthetic_dataset(a.out, corpus, quadruped_schema(a.category), feature_cfg);
  out << "synthetic dataset: " << corpus.images.size() << " images -> " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometry-aware semantic correspondence toolkit", "geomatch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "geomatch 0.1.0");

  MatchArgs match;
  auto* m = app.add_subcommand("match", "Predict target keypoints for every pair in a manifest");
  m->add_option("manifest", match.manifest, "Pair manifest JSON")->required();
  m->add_option("--out", match.out, "Predictions JSON to write")->required();
  m->add_option("--features", match.features, "Feature directory (<id>__<variant>.npy)");
  m->add_option("--schemas", match.schemas, "Schema directory (flip maps for hflip)");
  m->add_option("--alignment", match.alignment, "Alignment table from `align`");
  m->add_option("--checkpoint", match.checkpoint, "Trained post-processor checkpoint");
  add_inference_flags(m, match);
  add_common(m, match.s);

  AlignArgs align;
  auto* al = app.add_subcommand("align", "Choose the source pose variant with the lowest IMD");
  al->add_option("manifest", align.manifest, "Pair manifest JSON")->required();
  al->add_option("--out", align.out, "Alignment JSON to write")->required();
  al->add_option("--features", align.features, "Feature directory");
  al->add_option("--masks", align.masks, "Source instance mask directory (<id>.npy)");
  al->add_option("--schemas", align.schemas, "Schema directory");
  al->add_option("--checkpoint", align.checkpoint, "Trained post-processor checkpoint");
  al->add_option("--variants", align.variants, "Comma list, identity first (e.g. identity,hflip)");
  al->add_option("--metric", align.metric, "imd | mutual_nn");
  al->add_option("--reduction", align.reduction, "mean | sum");
  add_common(al, align.s);

  EvaluateArgs eval;
  auto* ev = app.add_subcommand("evaluate", "Score predictions (PCK, geo split, breakdown)");
  ev->add_option("manifest", eval.manifest, "Pair manifest JSON")->required();
  ev->add_option("predictions", eval.predictions, "Predictions JSON")->required();
  ev->add_option("--out", eval.out, "Report JSON to write")->required();
  ev->add_option("--schemas", eval.schemas, "Schema directory (enables the geo split)");
  ev->add_option("--masks", eval.masks, "Target instance masks (enables the breakdown)");
  ev->add_option("--alpha", eval.alphas, "Comma list of PCK thresholds");
  ev->add_option("--reference", eval.reference, "bbox | image");
  ev->add_option("--breakdown-alpha", eval.breakdown_alpha, "Threshold of the error breakdown");
  auto* geo = ev->add_flag("--geo-split", eval.geo_split, "Report geometry-aware subsets");
  ev->add_flag("--no-geo-split", eval.no_geo_split, "Skip the geometry-aware split")
      ->excludes(geo);
  ev->add_option("--csv", eval.csv, "Also write a CSV summary");
  ev->add_option("--charts", eval.charts, "Also write SVG charts to this directory");
  add_common(ev, eval.s);

  BuildArgs build;
  auto* b = app.add_subcommand("build-benchmark", "Sample benchmark pair manifests");
  b->add_option("--annotations", build.annotations, "COCO-style keypoint annotations");
  b->add_option("--out", build.out, "Output directory")->required();
  b->add_option("--category", build.category, "Schema key stored with every pair");
  b->add_option("--n-val", build.n_val, "Validation images per species");
  b->add_option("--n-test", build.n_test, "Test images per species");
  b->add_option("--holdout-below", build.holdout_below, "Hold out species with fewer images");
  b->add_option("--train-pair-factor", build.train_pair_factor, "Train pairs per train image");
  b->add_option("--min-visible", build.min_visible, "Minimum visible keypoints per image");
  b->add_option("--min-mutual-visible", build.min_mutual_visible,
                "Minimum mutually visible keypoints per pair");
  add_common(b, build.s);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the feature post-processor");
  t->add_option("manifest", tr.manifest, "Training pair manifest JSON")->required();
  t->add_option("--out", tr.out, "Output directory (checkpoints, trace.csv, train.json)")
      ->required();
  t->add_option("--features", tr.features, "Feature directory");
  t->add_option("--schemas", tr.schemas, "Schema directory (flip maps for augmentation)");
  t->add_option("--init", tr.init, "Start from this checkpoint");
  t->add_option("--steps", tr.steps, "Total optimizer steps");
  t->add_option("--checkpoint-every", tr.checkpoint_every, "Checkpoint interval (0 = final only)");
  t->add_option("--lr", tr.lr, "Peak learning rate");
  t->add_option("--weight-decay", tr.weight_decay, "Decoupled weight decay");
  t->add_option("--dropout", tr.dropout, "Channel dropout rate on input features");
  t->add_option("--perturb-std", tr.perturb_std, "Ground-truth perturbation std (cells)");
  t->add_option("--temperature", tr.temperature, "Dense loss softmax temperature");
  t->add_option("--bottleneck", tr.bottleneck, "Bottleneck width");
  t->add_option("--blocks", tr.blocks, "Residual blocks");
  t->add_option("--kernel", tr.kernel, "Middle layer kernel size (1 or 3)");
  t->add_flag("--no-augment", tr.no_augment, "Disable flip augmentation");
  add_common(t, tr.s);

  PoseArgs pose;
  auto* p = app.add_subcommand("predict-pose", "Predict a pose label by template voting");
  p->add_option("features", pose.features, "Query feature map (.npy)")->required();
  p->add_option("--templates", pose.templates, "Template directory (templates.json)")
      ->required();
  p->add_option("--mask", pose.mask, "Query instance mask (.npy)");
  p->add_option("--out", pose.out, "Pose JSON to write")->required();
  add_common(p, pose.s);

  PlotArgs plot;
  auto* pl = app.add_subcommand("plot", "Render SVG charts from a report");
  pl->add_option("report", plot.report, "Report JSON")->required();
  pl->add_option("--out", plot.out, "Output directory")->required();

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Write a deterministic synthetic dataset");
  sy->add_option("--out", synth.out, "Output directory")->required();
  sy->add_option("--seed", synth.seed, "Random seed");
  sy->add_option("--category", synth.category, "Category name of the schema");
  sy->add_option("--channels", synth.channels, "Feature channels");
  sy->add_option("--grid", synth.grid, "Feature grid side");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "geomatch 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (m->parsed()) return cmd_match(match, out);
    if (al->parsed()) return cmd_align(align, out);
    if (ev->parsed()) return cmd_evaluate(eval, out);
    if (b->parsed()) return cmd_build(build, out);
    if (t->parsed()) return cmd_train(tr, out);
    if (p->parsed()) return cmd_predict_pose(pose, out);
    if (pl->parsed()) return cmd_plot(plot, out);
    if (sy->parsed()) return cmd_synth(synth, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ArgumentError& e) {
    err << "argument error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace geomatch::cli
