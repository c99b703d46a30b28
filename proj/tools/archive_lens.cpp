// archive-lens: command-line front end for the photo-archive analysis
// pipeline. Exit codes: 0 success, 1 input or configuration error, 2
// internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "archive_lens/archive_lens.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace archive_lens;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

struct Options {
  std::string config_path;
  bool strict = false;

  // fuse
  std::string manifest;
  std::vector<std::string> detection_files;
  std::vector<std::string> threshold_overrides;
  std::optional<double> iou_threshold;
  std::string merge_strategy;
  // framing / stats
  std::string fused;
  std::string classes;
  std::string stats_json;
  std::optional<double> closeup;
  std::optional<double> overall;
  // split
  std::string fractions;
  std::string order = "random";
  // weights
  std::string labels;
  // emd / tsne
  std::string features;
  std::optional<std::size_t> cap;
  std::optional<double> perplexity;
  std::optional<std::size_t> iterations;
  std::optional<double> learning_rate;
  // preprocess
  std::string out_dir;

  std::optional<std::uint64_t> seed;
  std::string out;
};

json load_config(const Options& o) {
  if (o.config_path.empty()) return json::object();
  std::ifstream in(o.config_path);
  if (!in) throw InvalidInput("cannot open config '" + o.config_path + "'");
  try {
    json j;
    in >> j;
    if (!j.is_object()) throw InvalidInput("config must be a JSON object");
    return j;
  } catch (const json::exception& ex) {
    throw InvalidInput(o.config_path + ": " + ex.what());
  }
}

json section(const json& cfg, const char* name) {
  return cfg.contains(name) && cfg[name].is_object() ? cfg[name] : json::object();
}

template <typename T>
T pick(const std::optional<T>& flag, const json& sec, const char* key, T fallback) {
  if (flag) return *flag;
  if (sec.contains(key)) {
    try {
      return sec[key].get<T>();
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("config key '") + key + "': " + ex.what());
    }
  }
  return fallback;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Writes atomically enough for our purposes: render to memory, then dump.
void write_file(const std::string& path, const std::string& content) {
  if (path.empty()) throw InvalidInput("--out is required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << content;
}

// Reports row errors; in strict mode any row error aborts the command.
void report_rows(const std::vector<RowError>& errors, bool strict) {
  for (const auto& e : errors) std::cerr << "row error: " << describe(e) << '\n';
  if (strict && !errors.empty()) {
    throw InvalidInput(std::to_string(errors.size()) + " row error(s) with --strict");
  }
}

std::optional<std::uint64_t> seed_or(const Options& o, const json& sec) {
  if (o.seed) return o.seed;
  if (sec.contains("seed")) return sec["seed"].get<std::uint64_t>();
  return std::nullopt;
}

// ---------------------------------------------------------------------------

FusionConfig fusion_config(const Options& o, const json& cfg) {
  const json sec = section(cfg, "fusion");
  FusionConfig fc = FusionConfig::archive_defaults();
  if (sec.contains("thresholds")) {
    fc.per_detector_thresholds.clear();
    for (const auto& [id, v] : sec["thresholds"].items()) fc.per_detector_thresholds[id] = v.get<double>();
  }
  for (const auto& kv : o.threshold_overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--threshold expects detector=value, got '" + kv + "'");
    fc.per_detector_thresholds[kv.substr(0, eq)] = parse_number(kv.substr(eq + 1), "threshold");
  }
  fc.grouping_iou_threshold = pick(o.iou_threshold, sec, "iou_threshold", fc.grouping_iou_threshold);
  std::string strategy = o.merge_strategy;
  if (strategy.empty() && sec.contains("merge_strategy")) strategy = sec["merge_strategy"].get<std::string>();
  if (!strategy.empty()) fc.merge_strategy = merge_strategy_from_string(strategy);
  fc.validate();
  return fc;
}

int cmd_fuse(const Options& o) {
  const json cfg = load_config(o);
  const FusionConfig fc = fusion_config(o, cfg);
  auto mp = parse_manifest(o.manifest);
  report_rows(mp.errors, o.strict);

  DetectionParseResult dets;
  for (const auto& path : o.detection_files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open detection file '" + path + "'");
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& ex) {
      throw InvalidInput(path + ": " + ex.what());
    }
    parse_detections(doc, mp.manifest, path, dets);
  }
  report_rows(dets.errors, o.strict);

  auto photos = photos_from_manifest(mp.manifest);
  parallel_for(photos.size(), [&](std::size_t i) {
    auto it = dets.by_photo.find(photos[i].photo_id);
    if (it != dets.by_photo.end()) photos[i].fused_detections = fuse_image(it->second, fc);
  });
  write_file(o.out, to_json(photos).dump(2) + "\n");
  std::size_t fused = 0;
  for (const auto& p : photos) fused += p.fused_detections.size();
  std::cerr << "fused " << dets.accepted << " detections into " << fused << " objects over "
            << photos.size() << " photos\n";
  return 0;
}

int cmd_framing(const Options& o) {
  const json sec = section(load_config(o), "framing");
  FramingConfig fc;
  fc.closeup_min_fraction = pick(o.closeup, sec, "closeup_min_fraction", fc.closeup_min_fraction);
  fc.overall_max_fraction = pick(o.overall, sec, "overall_max_fraction", fc.overall_max_fraction);
  fc.validate();
  const auto photos = read_fused(o.fused);
  std::ostringstream out;
  report::write_framing_csv(out, framing_distribution(photos, fc));
  write_file(o.out, out.str());
  return 0;
}

int cmd_stats(const Options& o) {
  const json sec = section(load_config(o), "stats");
  std::vector<std::string> classes = default_classes_of_interest();
  if (!o.classes.empty()) {
    classes = split_list(o.classes);
  } else if (sec.contains("classes")) {
    classes = sec["classes"].get<std::vector<std::string>>();
  }
  const auto photos = read_fused(o.fused);
  const auto stats = content_stats(photos, classes);
  std::ostringstream out;
  report::write_stats_csv(out, stats, classes);
  write_file(o.out, out.str());
  if (!o.stats_json.empty()) write_file(o.stats_json, report::stats_to_json(stats).dump(2) + "\n");
  return 0;
}

int cmd_split(const Options& o) {
  const json sec = section(load_config(o), "split");
  SplitFractions fr;
  if (!o.fractions.empty()) {
    const auto parts = split_list(o.fractions);
    if (parts.size() != 3) throw InvalidInput("--fractions expects train,validation,test");
    fr = {parse_number(parts[0], "fraction"), parse_number(parts[1], "fraction"),
          parse_number(parts[2], "fraction")};
  } else if (sec.contains("fractions")) {
    const auto v = sec["fractions"].get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("split.fractions must have three entries");
    fr = {v[0], v[1], v[2]};
  }
  auto mp = parse_manifest(o.manifest);
  report_rows(mp.errors, o.strict);
  const auto photos = photos_from_manifest(mp.manifest);
  SplitAssignment split;
  if (o.order == "date") {
    split = split_dataset_by_date(photos, fr);
  } else if (o.order == "random") {
    split = split_dataset(photos, fr, seed_or(o, sec).value_or(0));
  } else {
    throw InvalidInput("--order must be 'random' or 'date'");
  }
  std::ostringstream out;
  report::write_split_csv(out, photos, split);
  write_file(o.out, out.str());
  return 0;
}

int cmd_weights(const Options& o) {
  auto lp = parse_labels(o.labels);
  report_rows(lp.errors, o.strict);
  std::map<std::string, std::uint64_t> counts;
  for (const auto& l : lp.labels) ++counts[l];
  std::vector<std::string> names;
  std::vector<std::uint64_t> n;
  for (const auto& [name, c] : counts) {
    names.push_back(name);
    n.push_back(c);
  }
  const auto w = class_weights(n);
  std::ostringstream out;
  report::write_weights_csv(out, names, w);
  write_file(o.out, out.str());
  return 0;
}

int cmd_emd(const Options& o) {
  const json sec = section(load_config(o), "emd");
  auto fp = parse_features(o.features);
  report_rows(fp.errors, o.strict);
  const std::size_t cap = pick(o.cap, sec, "cap", kDefaultSignatureCap);
  const auto dm = photographer_distance_matrix(fp.features, cap, seed_or(o, sec).value_or(0));
  std::ostringstream out;
  report::write_distance_matrix_csv(out, dm);
  write_file(o.out, out.str());
  return 0;
}

int cmd_tsne(const Options& o) {
  const json sec = section(load_config(o), "tsne");
  auto fp = parse_features(o.features);
  report_rows(fp.errors, o.strict);
  EmbeddingConfig ec;
  ec.perplexity = pick(o.perplexity, sec, "perplexity", ec.perplexity);
  ec.iterations = pick(o.iterations, sec, "iterations", ec.iterations);
  ec.learning_rate = pick(o.learning_rate, sec, "learning_rate", ec.learning_rate);
  ec.early_exaggeration = pick<double>(std::nullopt, sec, "early_exaggeration", ec.early_exaggeration);
  ec.seed = seed_or(o, sec).value_or(0);
  std::vector<std::vector<double>> x;
  x.reserve(fp.features.size());
  for (const auto& f : fp.features) x.push_back(f.values);
  const auto result = tsne_embed(x, ec);
  std::ostringstream out;
  report::write_embedding_csv(out, fp.features, result.coordinates);
  write_file(o.out, out.str());
  return 0;
}

int cmd_preprocess(const Options& o) {
  auto mp = parse_manifest(o.manifest);
  report_rows(mp.errors, o.strict);
  if (o.out_dir.empty()) throw InvalidInput("--out-dir is required");
  fs::create_directories(o.out_dir);
  const fs::path base = fs::path(o.manifest).parent_path();
  const auto& entries = mp.manifest.entries;
  std::vector<std::optional<RowError>> failures(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    const auto& e = entries[i];
    try {
      if (e.image_path.empty()) throw InvalidInput("no image_path");
      fs::path src(e.image_path);
      if (src.is_relative()) src = base / src;
      const ColorImage eq = hist_equalize(read_pnm(src.string()));
      write_ppm((fs::path(o.out_dir) / (e.photo_id + ".ppm")).string(), eq);
    } catch (const InvalidInput& ex) {
      failures[i] = RowError{o.manifest, 0, e.photo_id + ": " + ex.what()};
    }
  });
  std::vector<RowError> errors;
  for (auto& f : failures) {
    if (f) errors.push_back(*f);
  }
  report_rows(errors, o.strict);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"archive-lens: photo-archive detection fusion, statistics and similarity"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "JSON config shared by all commands")->check(CLI::ExistingFile);
  app.add_flag("--strict", o.strict, "Abort on any row-level input error");

  auto* fuse = app.add_subcommand("fuse", "Fuse per-detector exports into consensus detections");
  fuse->add_option("--manifest", o.manifest, "Archive manifest CSV")->required();
  fuse->add_option("--detections", o.detection_files, "Detector export JSON files")->required();
  fuse->add_option("--threshold", o.threshold_overrides, "Per-detector threshold, detector=value");
  fuse->add_option("--iou-threshold", o.iou_threshold, "Grouping IoU threshold");
  fuse->add_option("--merge", o.merge_strategy, "mean_coordinates | highest_confidence");
  fuse->add_option("--out", o.out, "Output fused.json")->required();

  auto* framing = app.add_subcommand("framing", "Framing shares per photographer");
  framing->add_option("--fused", o.fused)->required();
  framing->add_option("--closeup-min", o.closeup);
  framing->add_option("--overall-max", o.overall);
  framing->add_option("--out", o.out)->required();

  auto* stats = app.add_subcommand("stats", "Content statistics per photographer");
  stats->add_option("--fused", o.fused)->required();
  stats->add_option("--classes", o.classes, "Comma-separated classes of interest");
  stats->add_option("--json", o.stats_json, "Also write a JSON report");
  stats->add_option("--out", o.out)->required();

  auto* split = app.add_subcommand("split", "Grouped train/validation/test split");
  split->add_option("--manifest", o.manifest)->required();
  split->add_option("--fractions", o.fractions, "train,validation,test");
  split->add_option("--order", o.order, "random (default) or date");
  split->add_option("--seed", o.seed);
  split->add_option("--out", o.out)->required();

  auto* weights = app.add_subcommand("weights", "Inverse-frequency class weights");
  weights->add_option("--labels", o.labels, "CSV with a label column")->required();
  weights->add_option("--out", o.out)->required();

  auto* emd_cmd = app.add_subcommand("emd", "Pairwise photographer Earth Mover's Distance");
  emd_cmd->add_option("--features", o.features)->required();
  emd_cmd->add_option("--cap", o.cap, "Max points per photographer signature");
  emd_cmd->add_option("--seed", o.seed);
  emd_cmd->add_option("--out", o.out)->required();

  auto* tsne = app.add_subcommand("tsne", "2-D t-SNE embedding of feature vectors");
  tsne->add_option("--features", o.features)->required();
  tsne->add_option("--perplexity", o.perplexity);
  tsne->add_option("--iterations", o.iterations);
  tsne->add_option("--learning-rate", o.learning_rate);
  tsne->add_option("--seed", o.seed);
  tsne->add_option("--out", o.out)->required();

  auto* pre = app.add_subcommand("preprocess", "Equalize the HSV value channel of every image");
  pre->add_option("--manifest", o.manifest)->required();
  pre->add_option("--out-dir", o.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*fuse) return cmd_fuse(o);
    if (*framing) return cmd_framing(o);
    if (*stats) return cmd_stats(o);
    if (*split) return cmd_split(o);
    if (*weights) return cmd_weights(o);
    if (*emd_cmd) return cmd_emd(o);
    if (*tsne) return cmd_tsne(o);
    if (*pre) return cmd_preprocess(o);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
