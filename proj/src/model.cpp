#include "myofuzz/model.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "myofuzz/error.hpp"
#include "myofuzz/seed.hpp"

namespace myofuzz {

ModelBundle train_bundle(const FeatureSet& clean, const wavelet::WaveletSpec& wavelet, double sampling_rate_hz,
                         const TrainOptions& opts, std::uint64_t seed) {
  clean.validate();
  ModelBundle b;
  b.wavelet = wavelet;
  b.sampling_rate_hz = sampling_rate_hz;
  b.membership = opts.membership;
  b.scaler = opts.standardize ? Standardizer::fit(clean) : Standardizer::identity(clean.num_channels(), clean.dim());
  const FeatureSet train = b.scaler.apply(clean);
  occ::DetectorOptions dopts;
  dopts.nu_grid = opts.nu_grid;
  dopts.folds = opts.tuning_folds;
  dopts.jobs = opts.jobs;
  b.detectors = occ::fit_channel_detectors(train.channels, derive_seed(seed, {stream::nu_tuning}), dopts);
  const auto k = classify::tune_k(train, classify::KnnFamily::fuzzy_ensemble, opts.k_grid, opts.tuning_folds,
                                  derive_seed(seed, {stream::k_tuning}));
  b.ensemble = classify::FuzzyKnnEnsemble(train, std::min(k.k, train.size()));
  return b;
}

classify::FknnPrediction predict_segment(const ModelBundle& bundle, const Segment& segment) {
  if (segment.num_channels() != bundle.ensemble.num_channels())
    throw DataError(fmt::format("segment has {} channels, model expects {}", segment.num_channels(),
                                bundle.ensemble.num_channels()));
  auto feats = extract_features(segment, bundle.wavelet);
  for (std::size_t l = 0; l < feats.size(); ++l) bundle.scaler.apply_inplace(l, feats[l]);
  classify::ChannelSample x;
  for (const auto& f : feats) x.push_back(f);
  return classify::fknn_predict(bundle.ensemble, bundle.detectors, bundle.membership, x);
}

namespace {

constexpr const char* kMagic = "myofuzz-model";

void write_rows(std::ostream& out, const std::vector<std::vector<double>>& rows) {
  for (const auto& r : rows) fmt::print(out, "{}\n", fmt::join(r, " "));
}

template <class T>
T read_field(std::istream& in, const char* name) {
  std::string key;
  T value{};
  if (!(in >> key) || key != name || !(in >> value))
    throw DataError(fmt::format("model file: expected field '{}'", name));
  return value;
}

double read_number(std::istream& in, const char* what) {
  double v = 0.0;
  if (!(in >> v) || !std::isfinite(v)) throw DataError(fmt::format("model file: bad or truncated {}", what));
  return v;
}

}  // namespace

void save_bundle(const ModelBundle& b, std::ostream& out) {
  const FeatureSet& train = b.ensemble.train();
  const std::size_t channels = train.num_channels();
  const std::size_t dim = train.dim();
  fmt::print(out, "{} 1\n", kMagic);
  fmt::print(out, "levels {}\nextension {}\nsampling_rate_hz {}\n", b.wavelet.levels,
             b.wavelet.extension == wavelet::Extension::symmetric ? "symmetric" : "periodic", b.sampling_rate_hz);
  fmt::print(out, "membership {}\nsteepness {}\nk {}\n", fuzzy::to_string(b.membership.kind), b.membership.steepness,
             b.ensemble.k());
  fmt::print(out, "channels {}\ndim {}\nclasses {}\nsamples {}\n", channels, dim, train.num_classes, train.size());
  fmt::print(out, "scaler\n");
  write_rows(out, b.scaler.mean());
  write_rows(out, b.scaler.scale());
  fmt::print(out, "labels\n{}\n", fmt::join(train.labels, " "));
  for (std::size_t l = 0; l < channels; ++l) {
    fmt::print(out, "channel {}\n", l);
    for (std::size_t n = 0; n < train.size(); ++n) fmt::print(out, "{}\n", fmt::join(train.channels[l].row(n), " "));
  }
  for (const auto& d : b.detectors) occ::save(out, d);
  fmt::print(out, "end\n");
  if (!out) throw ConfigError("model file: write failed");
}

ModelBundle load_bundle(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != kMagic) throw DataError("model file: missing header");
  if (version != 1) throw DataError(fmt::format("model file: unsupported version {}", version));
  ModelBundle b;
  b.wavelet.levels = read_field<int>(in, "levels");
  const auto ext = read_field<std::string>(in, "extension");
  if (ext == "symmetric")
    b.wavelet.extension = wavelet::Extension::symmetric;
  else if (ext == "periodic")
    b.wavelet.extension = wavelet::Extension::periodic;
  else
    throw DataError(fmt::format("model file: unknown extension '{}'", ext));
  b.sampling_rate_hz = read_field<double>(in, "sampling_rate_hz");
  try {
    b.membership.kind = fuzzy::parse_kind(read_field<std::string>(in, "membership"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  b.membership.steepness = read_field<double>(in, "steepness");
  const auto k = read_field<std::size_t>(in, "k");
  const auto channels = read_field<std::size_t>(in, "channels");
  const auto dim = read_field<std::size_t>(in, "dim");
  const auto classes = read_field<int>(in, "classes");
  const auto samples = read_field<std::size_t>(in, "samples");
  if (b.wavelet.levels < 1 || channels == 0 || dim == 0 || classes < 2 || samples == 0 || k == 0 || k > samples)
    throw DataError("model file: header values out of range");
  if (dim != feature_dim(b.wavelet)) throw DataError("model file: feature dimension does not match wavelet levels");

  if (!(in >> tag) || tag != "scaler") throw DataError("model file: missing scaler");
  std::vector<std::vector<double>> mean(channels, std::vector<double>(dim));
  std::vector<std::vector<double>> scale(channels, std::vector<double>(dim));
  for (auto& r : mean)
    for (double& v : r) v = read_number(in, "scaler");
  for (auto& r : scale)
    for (double& v : r) {
      v = read_number(in, "scaler");
      if (!(v > 0.0)) throw DataError("model file: non-positive scale");
    }
  b.scaler = Standardizer(std::move(mean), std::move(scale));

  FeatureSet train;
  train.num_classes = classes;
  if (!(in >> tag) || tag != "labels") throw DataError("model file: missing labels");
  train.labels.resize(samples);
  for (int& y : train.labels)
    if (!(in >> y)) throw DataError("model file: truncated labels");
  for (std::size_t l = 0; l < channels; ++l) {
    std::size_t idx = 0;
    if (!(in >> tag >> idx) || tag != "channel" || idx != l) throw DataError("model file: missing channel block");
    Matrix m(samples, dim);
    for (double& v : m.data()) v = read_number(in, "training features");
    train.channels.push_back(std::move(m));
  }
  try {
    train.validate();
    b.ensemble = classify::FuzzyKnnEnsemble(std::move(train), k);
  } catch (const Error& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  for (std::size_t l = 0; l < channels; ++l) {
    b.detectors.push_back(occ::load_detector(in));
    if (b.detectors.back().model.dim() != dim) throw DataError("model file: detector dimension mismatch");
  }
  if (!(in >> tag) || tag != "end") throw DataError("model file: missing 'end'");
  return b;
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError(fmt::format("cannot write model file {}", file.string()));
  save_bundle(bundle, out);
}

ModelBundle load_bundle(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(fmt::format("cannot open model file {}", file.string()));
  return load_bundle(in);
}

}  // namespace myofuzz
