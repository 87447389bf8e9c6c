// Command-line front end: synth, inject, extract, train, predict, experiment.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
// failure.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "myofuzz/config.hpp"
#include "myofuzz/contam.hpp"
#include "myofuzz/core.hpp"
#include "myofuzz/error.hpp"
#include "myofuzz/experiment.hpp"
#include "myofuzz/features.hpp"
#include "myofuzz/model.hpp"
#include "myofuzz/parallel.hpp"
#include "myofuzz/simd.hpp"

namespace fs = std::filesystem;
using namespace myofuzz;

namespace {

constexpr const char* kVersion = "1.0.0";

// Options shared by every command.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> jobs;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", c.out, "Output path (overrides the config)");
  cmd->add_option("--jobs", c.jobs, "Worker threads (default: all cores)");
  cmd->add_flag("-v,--verbose", c.verbose, "Debug logging");
}

config::RunConfig resolve(const Common& c) {
  config::RunConfig cfg = c.config_path.empty() ? config::RunConfig{} : config::load_run_config(c.config_path);
  if (c.seed) cfg.seed = c.seed;
  if (!c.out.empty()) cfg.out = c.out;
  if (c.jobs) cfg.jobs = c.jobs;
  if (cfg.jobs && *cfg.jobs == 0) throw ConfigError("--jobs must be at least 1");
  if (!cfg.jobs) cfg.jobs = default_jobs();
  return cfg;
}

std::uint64_t require_seed(const config::RunConfig& cfg) {
  if (!cfg.seed) throw ConfigError("a seed is required (--seed or \"seed\" in the config)");
  return *cfg.seed;
}

fs::path require_out(const config::RunConfig& cfg) {
  if (!cfg.out) throw ConfigError("an output path is required (--out or \"out\" in the config)");
  return *cfg.out;
}

std::vector<SegmentDataset> datasets_for(const config::RunConfig& cfg, const std::string& data_dir,
                                         std::uint64_t seed) {
  if (!data_dir.empty()) return config::load_subjects(data_dir);
  return config::materialize(cfg.dataset, seed);
}

const SegmentDataset& single(const std::vector<SegmentDataset>& subjects) {
  if (subjects.size() != 1)
    throw ConfigError(fmt::format("this command takes one subject; {} were found", subjects.size()));
  return subjects.front();
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out || !(out << text)) throw ConfigError(fmt::format("cannot write {}", file.string()));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

// Command-line values and which of them were given explicitly.
struct SyntheticOverrides {
  SyntheticSpec values;
  bool classes = false, channels = false, segments = false, length = false, fs = false;
};

int cmd_synth(const Common& c, const SyntheticOverrides& o) {
  auto cfg = resolve(c);
  const std::uint64_t seed = require_seed(cfg);
  SyntheticSpec spec = cfg.dataset.synthetic.value_or(SyntheticSpec{});
  if (o.classes) spec.num_classes = o.values.num_classes;
  if (o.channels) spec.num_channels = o.values.num_channels;
  if (o.segments) spec.segments_per_class = o.values.segments_per_class;
  if (o.length) spec.segment_length = o.values.segment_length;
  if (o.fs) spec.sampling_rate_hz = o.values.sampling_rate_hz;
  if (c.seed || spec.seed == 0) spec.seed = seed;
  spec.validate();
  const fs::path out = require_out(cfg);
  const SegmentDataset ds = generate_synthetic(spec);
  write_dataset(ds, out);
  spdlog::info("wrote {} segments ({} classes, {} channels) to {}", ds.size(), ds.num_classes, ds.num_channels,
               out.string());
  return 0;
}

int cmd_inject(const Common& c, const std::string& data_dir, double snr, const std::vector<std::string>& kinds) {
  auto cfg = resolve(c);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = require_out(cfg);
  const auto subjects = datasets_for(cfg, data_dir, seed);
  const SegmentDataset& ds = single(subjects);
  contam::ContaminationPlan plan;
  plan.snr_db = snr;
  plan.seed = seed;
  plan.snr_grid = cfg.experiment.snr_grid;
  if (!kinds.empty()) {
    plan.kinds.clear();
    for (const auto& k : kinds) plan.kinds.push_back(parse_noise_kind(k));
  }
  const SegmentDataset noisy = contam::contaminate_dataset(ds, plan);
  write_dataset(noisy, out);
  contam::write_mask_sidecar(noisy, out / "mask.csv");
  std::size_t hit = 0;
  for (const auto& s : noisy.segments) hit += s.contaminated_count();
  spdlog::info("contaminated {} channels over {} segments at {} dB -> {}", hit, noisy.size(), snr, out.string());
  return 0;
}

int cmd_extract(const Common& c, const std::string& data_dir, int levels) {
  auto cfg = resolve(c);
  const fs::path out = require_out(cfg);
  const auto subjects = datasets_for(cfg, data_dir, cfg.seed.value_or(0));
  const SegmentDataset& ds = single(subjects);
  wavelet::WaveletSpec spec = cfg.experiment.wavelet;
  if (levels > 0) spec.levels = levels;
  const FeatureSet fs = extract_dataset_features(ds, spec, *cfg.jobs);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_feature_cache(fs, spec, out);
  spdlog::info("wrote {} x {} feature rows to {}", fs.size(), fs.num_channels(), out.string());
  return 0;
}

int cmd_train(const Common& c, const std::string& data_dir) {
  auto cfg = resolve(c);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = require_out(cfg);
  const auto subjects = datasets_for(cfg, data_dir, seed);
  const SegmentDataset& ds = single(subjects);
  const auto& e = cfg.experiment;
  TrainOptions opts;
  opts.membership = e.soft;
  opts.k_grid = e.k_grid;
  opts.nu_grid = e.nu_grid;
  opts.tuning_folds = e.tuning_folds;
  opts.standardize = e.standardize;
  opts.jobs = *cfg.jobs;
  const FeatureSet clean = extract_dataset_features(ds, e.wavelet, *cfg.jobs);
  const ModelBundle bundle = train_bundle(clean, e.wavelet, ds.sampling_rate_hz, opts, seed);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  save_bundle(bundle, out);
  spdlog::info("trained on {} segments, K = {}, membership {} -> {}", clean.size(), bundle.ensemble.k(),
               fuzzy::to_string(bundle.membership.kind), out.string());
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& segment_path, const std::string& kind) {
  ModelBundle bundle = load_bundle(model_path);
  if (!kind.empty()) bundle.membership.kind = fuzzy::parse_kind(kind);
  const Matrix samples = read_csv_matrix(segment_path);
  Segment seg;
  for (std::size_t ch = 0; ch < samples.cols(); ++ch) {
    std::vector<double> col(samples.rows());
    for (std::size_t i = 0; i < samples.rows(); ++i) col[i] = samples(i, ch);
    seg.channels.push_back(std::move(col));
  }
  const auto p = predict_segment(bundle, seg);
  nlohmann::ordered_json j;
  j["label"] = p.label;
  j["supports"] = p.supports.d;
  j["fallback"] = p.supports.fallback;
  j["memberships"] = p.r;
  j["membership_kind"] = fuzzy::to_string(bundle.membership.kind);
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_experiment(const Common& c, const std::string& name, const std::string& data_dir) {
  auto cfg = resolve(c);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = require_out(cfg);
  if (!name.empty()) cfg.experiment.experiment = eval::parse_experiment(name);
  cfg.experiment.seed = seed;
  cfg.experiment.jobs = *cfg.jobs;
  cfg.experiment.validate();
  if (!data_dir.empty()) cfg.dataset = {{data_dir}, std::nullopt};
  if (!cfg.dataset.synthetic && cfg.dataset.paths.empty()) cfg.dataset.synthetic = SyntheticSpec{};
  const auto subjects = config::materialize(cfg.dataset, seed);

  const auto report = eval::run_experiment(cfg.experiment, subjects);
  eval::write_report(report, out);

  nlohmann::ordered_json manifest;
  manifest["tool"] = "myofuzz";
  manifest["version"] = kVersion;
  manifest["experiment"] = eval::to_string(cfg.experiment.experiment);
  manifest["pooling"] = eval::to_string(cfg.experiment.pooling);
  manifest["seed"] = seed;
  manifest["subjects"] = report.subjects;
  std::vector<std::string> labels;
  for (const auto& m : report.methods) labels.push_back(m.label + " [" + m.kind_name() + "]");
  manifest["methods"] = labels;
  manifest["simd"] = simd::isa_name(simd::active_isa());
  manifest["config"] = nlohmann::ordered_json::parse(config::to_json(cfg));
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  spdlog::info("{}: {} records for {} methods -> {}", eval::to_string(cfg.experiment.experiment),
               report.records.size(), report.methods.size(), out.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-tolerant multichannel EMG classification"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;

  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  add_common(synth, common);
  SyntheticSpec spec;
  synth->add_option("--classes", spec.num_classes, "Number of classes")->capture_default_str();
  synth->add_option("--channels", spec.num_channels, "Number of channels")->capture_default_str();
  synth->add_option("--segments-per-class", spec.segments_per_class, "Segments per class")->capture_default_str();
  synth->add_option("--length", spec.segment_length, "Samples per segment")->capture_default_str();
  synth->add_option("--fs", spec.sampling_rate_hz, "Sampling rate in Hz")->capture_default_str();

  std::string data_dir;
  auto* inject = app.add_subcommand("inject", "Contaminate a dataset at one SNR and write the mask sidecar");
  add_common(inject, common);
  double snr = 0.0;
  std::vector<std::string> kinds;
  inject->add_option("--data", data_dir, "Dataset directory")->required();
  inject->add_option("--snr", snr, "Target SNR in dB")->required();
  inject->add_option("--kinds", kinds, "Noise kinds to draw from (default: all five)");

  auto* extract = app.add_subcommand("extract", "Write the wavelet feature cache of a dataset");
  add_common(extract, common);
  int levels = 0;
  extract->add_option("--data", data_dir, "Dataset directory")->required();
  extract->add_option("--levels", levels, "Decomposition levels (default 3)");

  auto* train = app.add_subcommand("train", "Train detectors and the fuzzy KNN ensemble");
  add_common(train, common);
  train->add_option("--data", data_dir, "Dataset directory (default: the config's dataset)");

  auto* predict = app.add_subcommand("predict", "Classify one segment CSV with a trained model");
  std::string model_path;
  std::string segment_path;
  std::string kind;
  bool predict_verbose = false;
  predict->add_option("--model", model_path, "Model file from `train`")->required();
  predict->add_option("--segment", segment_path, "CSV with one column per channel")->required();
  predict->add_option("--membership", kind, "Override the membership shape");
  predict->add_flag("-v,--verbose", predict_verbose, "Debug logging");

  auto* experiment = app.add_subcommand("experiment", "Run exp1, exp2 or exp3 and write the report bundle");
  add_common(experiment, common);
  std::string name;
  experiment->add_option("name", name, "exp1 | exp2 | exp3 (default: the config's experiment)");
  experiment->add_option("--data", data_dir, "Dataset directory (default: the config's dataset)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(common.verbose || predict_verbose ? spdlog::level::debug : spdlog::level::info);
  try {
    if (*synth) {
      const auto given = [&](const char* opt) { return synth->get_option(opt)->count() > 0; };
      SyntheticOverrides o{spec, given("--classes"), given("--channels"), given("--segments-per-class"),
                           given("--length"), given("--fs")};
      return cmd_synth(common, o);
    }
    if (*inject) return cmd_inject(common, data_dir, snr, kinds);
    if (*extract) return cmd_extract(common, data_dir, levels);
    if (*train) return cmd_train(common, data_dir);
    if (*predict) return cmd_predict(model_path, segment_path, kind);
    if (*experiment) return cmd_experiment(common, name, data_dir);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return 1;
  }
  return 0;
}
