#pragma once

// Reference classifiers with per-channel attribute weights.
//
// A channel weight w_l is broadcast to every attribute of channel l:
//   B    w_l = 1
//   AW   w_l = soft membership r_l
//   AWc  w_l = 1 if the channel is on the clean side of its detector, else 0
// KNN folds the weights into the squared Euclidean distance; the naive Bayes
// models raise each attribute likelihood to the power w_l.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "myofuzz/classify.hpp"
#include "myofuzz/features.hpp"
#include "myofuzz/fuzzy.hpp"

namespace myofuzz::classify {

enum class WeightMode { B, AW, AWc };
enum class BaseModel { knn, gnb, nbm };

std::string_view to_string(WeightMode mode) noexcept;
std::string_view to_string(BaseModel model) noexcept;
WeightMode parse_weight_mode(std::string_view name);  // throws ConfigError
BaseModel parse_base_model(std::string_view name);    // throws ConfigError

struct ChannelWeights {
  std::vector<double> w;
  bool fallback = false;  // every weight was zero; reverted to B
};
// `t` are the band coordinates of the query's channels.
ChannelWeights channel_weights(WeightMode mode, std::span<const double> t, const fuzzy::MembershipSpec& soft);

class WeightedClassifier {
 public:
  virtual ~WeightedClassifier() = default;
  // `w` has one weight per channel.
  virtual ClassSupports predict(const ChannelSample& x, std::span<const double> w) const = 0;
  virtual int num_classes() const noexcept = 0;
  virtual std::size_t num_channels() const noexcept = 0;
};

// KNN on the concatenated channel features with similarity-weighted votes
// over the global top-K. The kernel width is fitted on unweighted distances.
class WeightedKnn final : public WeightedClassifier {
 public:
  WeightedKnn(const FeatureSet& train, std::size_t k);
  ClassSupports predict(const ChannelSample& x, std::span<const double> w) const override;
  int num_classes() const noexcept override { return num_classes_; }
  std::size_t num_channels() const noexcept override { return num_channels_; }
  std::size_t k() const noexcept { return k_; }
  double sigma() const noexcept { return sigma_.sigma; }

 private:
  Matrix train_;
  std::vector<int> labels_;
  int num_classes_ = 0;
  std::size_t num_channels_ = 0;
  std::size_t dim_ = 0;
  std::size_t k_ = 1;
  SigmaEstimate sigma_;
};

// Per class and attribute: a Gaussian mixture with `components` terms.
// One component is the plain Gaussian naive Bayes model.
class MixtureNb final : public WeightedClassifier {
 public:
  MixtureNb(const FeatureSet& train, int components, std::uint64_t seed);
  ClassSupports predict(const ChannelSample& x, std::span<const double> w) const override;
  int num_classes() const noexcept override { return num_classes_; }
  std::size_t num_channels() const noexcept override { return num_channels_; }
  int components() const noexcept { return components_; }
  double variance_floor() const noexcept { return floor_; }

  // Per-attribute log density of class j (1-based) at value v.
  double log_density(int cls, std::size_t channel, std::size_t attr, double v) const;

  static constexpr int kRestarts = 3;

 private:
  struct Mixture {
    std::vector<double> log_weight, mean, var;
  };
  const Mixture& mixture(int cls, std::size_t channel, std::size_t attr) const;

  std::vector<Mixture> mixtures_;  // [class][channel][attr]
  std::vector<double> log_prior_;
  int num_classes_ = 0;
  std::size_t num_channels_ = 0;
  std::size_t dim_ = 0;
  int components_ = 1;
  double floor_ = 0.0;
};

// Gaussian naive Bayes: the single-component mixture.
class GaussianNb final : public WeightedClassifier {
 public:
  explicit GaussianNb(const FeatureSet& train) : model_(train, 1, 0) {}
  ClassSupports predict(const ChannelSample& x, std::span<const double> w) const override {
    return model_.predict(x, w);
  }
  int num_classes() const noexcept override { return model_.num_classes(); }
  std::size_t num_channels() const noexcept override { return model_.num_channels(); }
  double log_density(int cls, std::size_t channel, std::size_t attr, double v) const {
    return model_.log_density(cls, channel, attr, v);
  }

 private:
  MixtureNb model_;
};

struct ComponentTuning {
  int components = 1;
  std::vector<int> grid;
  std::vector<double> mean_bac;
};
// Stratified CV over a single component count shared by every attribute;
// ties go to the fewer components.
ComponentTuning tune_components(const FeatureSet& train, std::span<const int> grid, std::size_t folds,
                                std::uint64_t seed);

struct BaselinePrediction {
  ClassSupports supports;
  int label = 0;
  ChannelWeights weights;
};
BaselinePrediction baseline_predict(const WeightedClassifier& model, WeightMode mode, const ChannelSample& x,
                                    std::span<const double> t, const fuzzy::MembershipSpec& soft);

}  // namespace myofuzz::classify
