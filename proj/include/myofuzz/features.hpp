#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "myofuzz/core.hpp"
#include "myofuzz/matrix.hpp"
#include "myofuzz/wavelet.hpp"

namespace myofuzz {

// Mean absolute value.
double mav(std::span<const double> c);
// Slope sign changes: interior i with (c[i]-c[i-1]) * (c[i+1]-c[i]) < 0.
double ssc(std::span<const double> c);

// Per-channel feature dimension: MAV and SSC for each detail band and the
// final approximation.
constexpr std::size_t feature_dim(const wavelet::WaveletSpec& spec) {
  return 2 * (static_cast<std::size_t>(spec.levels) + 1);
}

// [mav(D1), ssc(D1), ..., mav(Dk), ssc(Dk), mav(Ak), ssc(Ak)]
std::vector<double> channel_features(std::span<const double> x, const wavelet::WaveletSpec& spec);
std::vector<std::vector<double>> extract_features(const Segment& seg, const wavelet::WaveletSpec& spec);

// Per-channel feature matrices for a set of segments. Row n of every channel
// matrix belongs to the same segment.
struct FeatureSet {
  std::vector<Matrix> channels;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t num_channels() const noexcept { return channels.size(); }
  std::size_t dim() const noexcept { return channels.empty() ? 0 : channels.front().cols(); }

  FeatureSet subset(std::span<const std::size_t> rows) const;
  // N x (L * d), channel blocks in order.
  Matrix concatenated() const;
  std::vector<double> sample(std::size_t row) const;  // concatenated row
  void validate() const;
};

FeatureSet extract_dataset_features(const SegmentDataset& ds, const wavelet::WaveletSpec& spec,
                                    std::size_t jobs = 1);

// z-scoring per channel attribute, fitted on training features only.
// Zero-variance attributes keep unit scale.
class Standardizer {
 public:
  static Standardizer fit(const FeatureSet& train);
  static Standardizer identity(std::size_t num_channels, std::size_t dim);
  Standardizer() = default;
  Standardizer(std::vector<std::vector<double>> mean, std::vector<std::vector<double>> scale);

  FeatureSet apply(const FeatureSet& fs) const;
  void apply_inplace(std::size_t channel, std::span<double> x) const;

  const std::vector<std::vector<double>>& mean() const noexcept { return mean_; }
  const std::vector<std::vector<double>>& scale() const noexcept { return scale_; }

 private:
  std::vector<std::vector<double>> mean_;
  std::vector<std::vector<double>> scale_;
};

// Feature cache CSV: a `# ...` header line describing the wavelet settings,
// then `segment_id,channel,f1..fd,label`, one row per segment and channel.
void write_feature_cache(const FeatureSet& fs, const wavelet::WaveletSpec& spec,
                         const std::filesystem::path& file);
FeatureSet read_feature_cache(const std::filesystem::path& file);

}  // namespace myofuzz
