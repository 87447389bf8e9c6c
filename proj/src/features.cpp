#include "myofuzz/features.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "myofuzz/error.hpp"
#include "myofuzz/parallel.hpp"
#include "myofuzz/simd.hpp"

namespace myofuzz {

double mav(std::span<const double> c) {
  if (c.empty()) throw ContractError("mav: empty input");
  return simd::sum_abs(c) / static_cast<double>(c.size());
}

double ssc(std::span<const double> c) {
  if (c.size() < 3) throw ContractError("ssc: needs at least 3 values");
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < c.size(); ++i)
    if ((c[i] - c[i - 1]) * (c[i + 1] - c[i]) < 0.0) ++count;
  return static_cast<double>(count);
}

std::vector<double> channel_features(std::span<const double> x, const wavelet::WaveletSpec& spec) {
  const auto bands = wavelet::dwt_decompose(x, spec);
  std::vector<double> out;
  out.reserve(2 * bands.size());
  for (const auto& band : bands) {
    out.push_back(mav(band));
    out.push_back(ssc(band));
  }
  return out;
}

std::vector<std::vector<double>> extract_features(const Segment& seg, const wavelet::WaveletSpec& spec) {
  std::vector<std::vector<double>> out;
  out.reserve(seg.num_channels());
  for (const auto& ch : seg.channels) out.push_back(channel_features(ch, spec));
  return out;
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> rows) const {
  FeatureSet out;
  out.num_classes = num_classes;
  out.channels.reserve(channels.size());
  for (const auto& m : channels) out.channels.push_back(take_rows(m, rows));
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels[r]);
  return out;
}

Matrix FeatureSet::concatenated() const {
  const std::size_t d = dim();
  Matrix out(size(), d * num_channels());
  for (std::size_t n = 0; n < size(); ++n)
    for (std::size_t l = 0; l < num_channels(); ++l)
      for (std::size_t a = 0; a < d; ++a) out(n, l * d + a) = channels[l](n, a);
  return out;
}

std::vector<double> FeatureSet::sample(std::size_t row) const {
  std::vector<double> out;
  out.reserve(dim() * num_channels());
  for (const auto& m : channels) out.insert(out.end(), m.row(row).begin(), m.row(row).end());
  return out;
}

void FeatureSet::validate() const {
  if (channels.empty()) throw DataError("feature set has no channels");
  for (const auto& m : channels) {
    if (m.rows() != labels.size()) throw DataError("feature set channel/label row mismatch");
    if (m.cols() != dim()) throw DataError("feature set channels differ in dimension");
    for (double v : m.data())
      if (!std::isfinite(v)) throw DataError("feature set contains non-finite values");
  }
  for (int y : labels)
    if (y < 1 || y > num_classes) throw DataError(fmt::format("feature label {} outside 1..{}", y, num_classes));
}

FeatureSet extract_dataset_features(const SegmentDataset& ds, const wavelet::WaveletSpec& spec,
                                    std::size_t jobs) {
  const std::size_t d = feature_dim(spec);
  FeatureSet out;
  out.num_classes = ds.num_classes;
  out.labels = ds.labels();
  out.channels.assign(ds.num_channels, Matrix(ds.size(), d));
  parallel_for(ds.size(), jobs, [&](std::size_t n) {
    const auto feats = extract_features(ds.segments[n], spec);
    for (std::size_t l = 0; l < feats.size(); ++l)
      std::ranges::copy(feats[l], out.channels[l].row(n).begin());
  });
  return out;
}

Standardizer::Standardizer(std::vector<std::vector<double>> mean, std::vector<std::vector<double>> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
  if (mean_.size() != scale_.size()) throw ContractError("Standardizer: mean/scale channel mismatch");
  for (std::size_t l = 0; l < mean_.size(); ++l) {
    if (mean_[l].size() != scale_[l].size()) throw ContractError("Standardizer: mean/scale size mismatch");
    for (double s : scale_[l])
      if (!(s > 0.0) || !std::isfinite(s)) throw DataError("Standardizer: scale must be positive");
  }
}

Standardizer Standardizer::identity(std::size_t num_channels, std::size_t dim) {
  return Standardizer(std::vector(num_channels, std::vector<double>(dim, 0.0)),
                      std::vector(num_channels, std::vector<double>(dim, 1.0)));
}

Standardizer Standardizer::fit(const FeatureSet& train) {
  if (train.size() == 0) throw DataError("cannot fit a standardizer on an empty set");
  const std::size_t d = train.dim();
  const auto n = static_cast<double>(train.size());
  std::vector<std::vector<double>> mean(train.num_channels(), std::vector<double>(d, 0.0));
  std::vector<std::vector<double>> scale(train.num_channels(), std::vector<double>(d, 1.0));
  for (std::size_t l = 0; l < train.num_channels(); ++l) {
    const Matrix& m = train.channels[l];
    for (std::size_t a = 0; a < d; ++a) {
      double s = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, a);
      const double mu = s / n;
      double v = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) v += (m(r, a) - mu) * (m(r, a) - mu);
      const double sd = std::sqrt(v / n);
      mean[l][a] = mu;
      scale[l][a] = sd > 1e-12 ? sd : 1.0;
    }
  }
  return Standardizer(std::move(mean), std::move(scale));
}

void Standardizer::apply_inplace(std::size_t channel, std::span<double> x) const {
  if (channel >= mean_.size() || x.size() != mean_[channel].size())
    throw DataError("standardizer shape does not match features");
  for (std::size_t a = 0; a < x.size(); ++a) x[a] = (x[a] - mean_[channel][a]) / scale_[channel][a];
}

FeatureSet Standardizer::apply(const FeatureSet& fs) const {
  if (fs.num_channels() != mean_.size()) throw DataError("standardizer channel count does not match features");
  FeatureSet out = fs;
  for (std::size_t l = 0; l < out.num_channels(); ++l)
    for (std::size_t r = 0; r < out.size(); ++r) apply_inplace(l, out.channels[l].row(r));
  return out;
}

void write_feature_cache(const FeatureSet& fs, const wavelet::WaveletSpec& spec,
                         const std::filesystem::path& file) {
  auto out = fmt::output_file(file.string());
  out.print("# wavelet=db6 levels={} extension={} functionals=mav,ssc granularity=per-band num_classes={}\n",
            spec.levels, spec.extension == wavelet::Extension::symmetric ? "symmetric" : "periodic",
            fs.num_classes);
  out.print("segment_id,channel");
  for (std::size_t a = 0; a < fs.dim(); ++a) out.print(",f{}", a + 1);
  out.print(",label\n");
  for (std::size_t n = 0; n < fs.size(); ++n)
    for (std::size_t l = 0; l < fs.num_channels(); ++l)
      out.print("{},{},{},{}\n", n, l, fmt::join(fs.channels[l].row(n), ","), fs.labels[n]);
}

FeatureSet read_feature_cache(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open feature cache " + file.string());
  std::string line;
  int num_classes = 0;
  std::size_t lineno = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> cells;
  std::map<std::size_t, int> labels;
  std::size_t dim = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("num_classes=");
      if (pos != std::string::npos) num_classes = std::stoi(line.substr(pos + 12));
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw DataError(fmt::format("{}:{}: bad value '{}'", file.string(), lineno, cell));
      }
    }
    if (values.size() < 4) throw DataError(fmt::format("{}:{}: too few columns", file.string(), lineno));
    const std::size_t d = values.size() - 3;
    if (dim == 0) dim = d;
    if (d != dim) throw DataError(fmt::format("{}:{}: ragged row", file.string(), lineno));
    const auto seg = static_cast<std::size_t>(values[0]);
    const auto ch = static_cast<std::size_t>(values[1]);
    const int label = static_cast<int>(values.back());
    cells[{seg, ch}] = std::vector<double>(values.begin() + 2, values.end() - 1);
    labels[seg] = label;
  }
  if (cells.empty()) throw DataError(file.string() + ": empty feature cache");
  std::size_t num_channels = 0;
  for (const auto& [key, v] : cells) num_channels = std::max(num_channels, key.second + 1);
  FeatureSet fs;
  fs.channels.assign(num_channels, Matrix(labels.size(), dim));
  std::size_t expected = 0;
  for (const auto& [seg, label] : labels) {
    if (seg != expected++) throw DataError(file.string() + ": segment ids are not contiguous");
    fs.labels.push_back(label);
    for (std::size_t l = 0; l < num_channels; ++l) {
      const auto it = cells.find({seg, l});
      if (it == cells.end()) throw DataError(fmt::format("{}: segment {} lacks channel {}", file.string(), seg, l));
      std::ranges::copy(it->second, fs.channels[l].row(seg).begin());
    }
  }
  fs.num_classes = num_classes > 0 ? num_classes : *std::ranges::max_element(fs.labels);
  fs.validate();
  return fs;
}

}  // namespace myofuzz
