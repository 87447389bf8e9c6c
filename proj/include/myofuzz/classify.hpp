#pragma once

// Ensemble of per-channel fuzzy KNN classifiers.
//
// For a query x = (x_1..x_L) with channel memberships r_l, every training row
// n of channel l gets the corrected similarity
//     u_l(n) = r_l * exp(-|x_l - x_{l,n}|^2 / (2 sigma_l^2)),
// the K rows with the largest u_l form that channel's neighbourhood, and the
// class support is the sigma-count (sum of u) of class-j neighbours summed
// over channels and normalised over classes. Neighbourhoods are chosen per
// channel, never from a pooled list.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "myofuzz/features.hpp"
#include "myofuzz/fuzzy.hpp"
#include "myofuzz/matrix.hpp"
#include "myofuzz/occ.hpp"

namespace myofuzz::classify {

// One query: L per-channel feature vectors.
using ChannelSample = std::vector<std::span<const double>>;
ChannelSample channel_sample(const FeatureSet& fs, std::size_t row);

struct ClassSupports {
  std::vector<double> d;  // d[j-1] is the support of class j
  bool fallback = false;  // true when every sigma-count was zero

  // Arg-max class (1-based); ties go to the smaller class.
  int label() const;
};

struct SigmaEstimate {
  double sigma = 1.0;
  bool fallback = false;  // spread was zero; sigma forced to 1
};
// Population standard deviation of the N(N-1)/2 pairwise Euclidean distances.
SigmaEstimate sigma_from_train(const Matrix& x);

double gaussian_similarity(std::span<const double> x, std::span<const double> y, double sigma);

// Algebraic t-norm of membership and similarity.
constexpr double corrected_similarity(double r, double sim) noexcept { return r * sim; }

struct FuzzyNeighbor {
  std::size_t index = 0;
  int label = 0;
  double sim = 0.0;
  double u = 0.0;
  // log(u) kept separately so far-away queries do not underflow; -inf when r = 0.
  double log_u = -std::numeric_limits<double>::infinity();
};
FuzzyNeighbor make_neighbor(std::size_t index, int label, double r, double log_sim);

// Indices of the K largest values; ties broken by smaller index. Result is
// ordered by decreasing value.
std::vector<std::size_t> alpha_cut_top_k(std::span<const double> u, std::size_t k);

// sigma-count supports over channels. The shared 1/L factors cancel.
ClassSupports class_supports(std::span<const std::vector<FuzzyNeighbor>> per_channel, int num_classes);

class FuzzyKnnEnsemble {
 public:
  FuzzyKnnEnsemble() = default;
  // Throws ConfigError when k is 0 or exceeds the training size.
  FuzzyKnnEnsemble(FeatureSet train, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  std::size_t num_channels() const noexcept { return train_.num_channels(); }
  int num_classes() const noexcept { return train_.num_classes; }
  const FeatureSet& train() const noexcept { return train_; }
  const std::vector<SigmaEstimate>& sigmas() const noexcept { return sigmas_; }

  // Neighbourhood of channel l for query x_l under membership r.
  std::vector<FuzzyNeighbor> neighbors(std::size_t channel, std::span<const double> x, double r) const;

  // Supports for a query given its per-channel memberships.
  ClassSupports predict(const ChannelSample& x, std::span<const double> r) const;

 private:
  FeatureSet train_;
  std::vector<SigmaEstimate> sigmas_;
  std::size_t k_ = 1;
};

// Band coordinates t_l of a query under per-channel detectors.
std::vector<double> band_coordinates(std::span<const occ::ChannelDetector> detectors, const ChannelSample& x);
std::vector<double> memberships(const fuzzy::MembershipSpec& spec, std::span<const double> t);

struct FknnPrediction {
  ClassSupports supports;
  int label = 0;
  std::vector<double> r;
};
// Detector scores -> memberships -> corrected-similarity ensemble.
FknnPrediction fknn_predict(const FuzzyKnnEnsemble& model, std::span<const occ::ChannelDetector> detectors,
                            const fuzzy::MembershipSpec& spec, const ChannelSample& x);

std::vector<std::size_t> default_k_grid();  // 1, 3, ..., 23

// Which neighbour model K is tuned for.
enum class KnnFamily {
  fuzzy_ensemble,  // per-channel ensemble with r = 1
  weighted_knn,    // single KNN on concatenated features, unit weights
};

struct KTuning {
  std::size_t k = 1;
  std::vector<std::size_t> grid;
  std::vector<double> mean_bac;  // aligned with grid; empty if no search ran
};

// Stratified cross-validation on clean training data; maximises mean BAC,
// ties go to the smaller K. Grid values above a fold's training size are
// evaluated at that size.
KTuning tune_k(const FeatureSet& train, KnnFamily family, std::span<const std::size_t> grid, std::size_t folds,
               std::uint64_t seed);

}  // namespace myofuzz::classify
