#include "myofuzz/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "myofuzz/error.hpp"
#include "myofuzz/seed.hpp"

namespace myofuzz::config {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
  for (const auto& [key, value] : obj.items())
    if (!known.contains(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}.{}: {}", where, key, e.what()));
  }
}

template <class T>
void read_opt(const json& obj, const std::string& key, const std::string& where, T& target) {
  if (obj.contains(key)) target = get<T>(obj, key, where);
}

SyntheticSpec parse_synthetic(const json& j) {
  const std::string where = "dataset.synthetic";
  reject_unknown(j,
                 {"num_classes", "num_channels", "segments_per_class", "segment_length", "sampling_rate_hz",
                  "amplitude_jitter", "partials", "bandwidth", "texture", "class_band_centers_hz", "seed"},
                 where);
  SyntheticSpec s;
  read_opt(j, "num_classes", where, s.num_classes);
  read_opt(j, "num_channels", where, s.num_channels);
  read_opt(j, "segments_per_class", where, s.segments_per_class);
  read_opt(j, "segment_length", where, s.segment_length);
  read_opt(j, "sampling_rate_hz", where, s.sampling_rate_hz);
  read_opt(j, "amplitude_jitter", where, s.amplitude_jitter);
  read_opt(j, "partials", where, s.partials);
  read_opt(j, "bandwidth", where, s.bandwidth);
  read_opt(j, "texture", where, s.texture);
  read_opt(j, "class_band_centers_hz", where, s.class_band_centers_hz);
  read_opt(j, "seed", where, s.seed);
  s.validate();
  return s;
}

eval::ExperimentConfig parse_experiment(const json& j) {
  const std::string where = "experiment";
  reject_unknown(j,
                 {"name", "methods", "membership", "steepness", "snr_grid", "noise_kinds", "folds", "repeats",
                  "tuning_folds", "k_grid", "nu_grid", "components", "wavelet_levels", "extension", "standardize",
                  "pooling", "alpha", "dump_predictions"},
                 where);
  eval::ExperimentConfig e;
  if (j.contains("name")) e.experiment = eval::parse_experiment(get<std::string>(j, "name", where));
  read_opt(j, "methods", where, e.methods);
  if (j.contains("membership")) e.soft.kind = fuzzy::parse_kind(get<std::string>(j, "membership", where));
  read_opt(j, "steepness", where, e.soft.steepness);
  read_opt(j, "snr_grid", where, e.snr_grid);
  if (j.contains("noise_kinds")) {
    e.noise_kinds.clear();
    for (const auto& name : get<std::vector<std::string>>(j, "noise_kinds", where))
      e.noise_kinds.push_back(parse_noise_kind(name));
  }
  read_opt(j, "folds", where, e.folds);
  read_opt(j, "repeats", where, e.repeats);
  read_opt(j, "tuning_folds", where, e.tuning_folds);
  read_opt(j, "k_grid", where, e.k_grid);
  read_opt(j, "nu_grid", where, e.nu_grid);
  read_opt(j, "components", where, e.component_grid);
  read_opt(j, "wavelet_levels", where, e.wavelet.levels);
  if (j.contains("extension")) {
    const auto ext = get<std::string>(j, "extension", where);
    if (ext == "symmetric")
      e.wavelet.extension = wavelet::Extension::symmetric;
    else if (ext == "periodic")
      e.wavelet.extension = wavelet::Extension::periodic;
    else
      throw ConfigError(fmt::format("experiment.extension: unknown value '{}'", ext));
  }
  read_opt(j, "standardize", where, e.standardize);
  if (j.contains("pooling")) e.pooling = eval::parse_pooling(get<std::string>(j, "pooling", where));
  read_opt(j, "alpha", where, e.alpha);
  read_opt(j, "dump_predictions", where, e.dump_predictions);
  e.validate();
  return e;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  reject_unknown(root, {"seed", "out", "jobs", "dataset", "experiment"}, "config");
  RunConfig cfg;
  if (root.contains("seed")) cfg.seed = get<std::uint64_t>(root, "seed", "config");
  if (root.contains("out")) cfg.out = get<std::string>(root, "out", "config");
  if (root.contains("jobs")) cfg.jobs = get<std::size_t>(root, "jobs", "config");
  if (root.contains("dataset")) {
    const json& d = root.at("dataset");
    reject_unknown(d, {"path", "paths", "synthetic"}, "dataset");
    const int sources = static_cast<int>(d.contains("path")) + static_cast<int>(d.contains("paths")) +
                        static_cast<int>(d.contains("synthetic"));
    if (sources != 1) throw ConfigError("dataset: give exactly one of 'path', 'paths' or 'synthetic'");
    if (d.contains("path")) cfg.dataset.paths.emplace_back(get<std::string>(d, "path", "dataset"));
    if (d.contains("paths"))
      for (const auto& p : get<std::vector<std::string>>(d, "paths", "dataset")) cfg.dataset.paths.emplace_back(p);
    if (d.contains("synthetic")) cfg.dataset.synthetic = parse_synthetic(d.at("synthetic"));
  }
  if (root.contains("experiment")) cfg.experiment = parse_experiment(root.at("experiment"));
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", file.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return with_context(file.string(), [&] { return parse_run_config(ss.str()); });
}

std::string to_json(const RunConfig& cfg, int indent) {
  nlohmann::ordered_json j;
  if (cfg.seed) j["seed"] = *cfg.seed;
  if (cfg.out) j["out"] = cfg.out->generic_string();
  nlohmann::ordered_json d = nlohmann::ordered_json::object();
  if (cfg.dataset.synthetic) {
    const auto& s = *cfg.dataset.synthetic;
    d["synthetic"] = {{"num_classes", s.num_classes},
                      {"num_channels", s.num_channels},
                      {"segments_per_class", s.segments_per_class},
                      {"segment_length", s.segment_length},
                      {"sampling_rate_hz", s.sampling_rate_hz},
                      {"amplitude_jitter", s.amplitude_jitter},
                      {"partials", s.partials},
                      {"bandwidth", s.bandwidth},
                      {"texture", s.texture},
                      {"class_band_centers_hz", s.class_band_centers_hz},
                      {"seed", s.seed}};
  } else {
    std::vector<std::string> paths;
    for (const auto& p : cfg.dataset.paths) paths.push_back(p.generic_string());
    d["paths"] = paths;
  }
  j["dataset"] = d;
  const auto& e = cfg.experiment;
  std::vector<std::string> kinds;
  for (auto k : e.noise_kinds) kinds.emplace_back(to_string(k));
  j["experiment"] = {{"name", eval::to_string(e.experiment)},
                     {"methods", e.methods},
                     {"membership", fuzzy::to_string(e.soft.kind)},
                     {"steepness", e.soft.steepness},
                     {"snr_grid", e.snr_grid},
                     {"noise_kinds", kinds},
                     {"folds", e.folds},
                     {"repeats", e.repeats},
                     {"tuning_folds", e.tuning_folds},
                     {"k_grid", e.k_grid},
                     {"nu_grid", e.nu_grid},
                     {"components", e.component_grid},
                     {"wavelet_levels", e.wavelet.levels},
                     {"extension", e.wavelet.extension == wavelet::Extension::symmetric ? "symmetric" : "periodic"},
                     {"standardize", e.standardize},
                     {"pooling", eval::to_string(e.pooling)},
                     {"alpha", e.alpha},
                     {"dump_predictions", e.dump_predictions}};
  return j.dump(indent);
}

std::vector<SegmentDataset> load_subjects(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw ConfigError(fmt::format("dataset directory {} does not exist", root.string()));
  auto load_one = [](const fs::path& dir) {
    SegmentDataset ds = load_dataset(dir);
    if (ds.subject_id.empty()) ds.subject_id = dir.filename().string();
    return ds;
  };
  if (fs::exists(root / kManifestFileName)) return {load_one(root)};
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / kManifestFileName)) dirs.push_back(entry.path());
  std::ranges::sort(dirs);
  if (dirs.empty())
    throw ConfigError(fmt::format("{} holds no {} and no subject directories", root.string(), kManifestFileName));
  std::vector<SegmentDataset> out;
  for (const auto& d : dirs) out.push_back(load_one(d));
  return out;
}

std::vector<SegmentDataset> materialize(const DatasetSource& source, std::uint64_t seed) {
  if (source.synthetic) {
    SyntheticSpec spec = *source.synthetic;
    if (spec.seed == 0) spec.seed = derive_seed(seed, {stream::synthetic});
    return {generate_synthetic(spec)};
  }
  if (source.paths.empty()) throw ConfigError("no dataset configured (set dataset.path or dataset.synthetic)");
  std::vector<SegmentDataset> out;
  for (const auto& p : source.paths) {
    auto subjects = load_subjects(p);
    std::ranges::move(subjects, std::back_inserter(out));
  }
  return out;
}

}  // namespace myofuzz::config
