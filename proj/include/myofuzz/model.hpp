#pragma once

// Self-contained trained pipeline for single-segment prediction: feature
// scaling, per-channel contamination detectors and the fuzzy KNN ensemble.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "myofuzz/classify.hpp"
#include "myofuzz/core.hpp"
#include "myofuzz/features.hpp"
#include "myofuzz/fuzzy.hpp"
#include "myofuzz/occ.hpp"
#include "myofuzz/wavelet.hpp"

namespace myofuzz {

struct TrainOptions {
  fuzzy::MembershipSpec membership{};
  std::vector<std::size_t> k_grid = classify::default_k_grid();
  std::vector<double> nu_grid = occ::default_nu_grid();
  std::size_t tuning_folds = 4;
  bool standardize = true;
  std::size_t jobs = 1;
};

struct ModelBundle {
  wavelet::WaveletSpec wavelet{};
  double sampling_rate_hz = 0.0;
  fuzzy::MembershipSpec membership{};
  Standardizer scaler;
  std::vector<occ::ChannelDetector> detectors;
  classify::FuzzyKnnEnsemble ensemble;
};

// `clean` are raw (unscaled) features of clean training segments.
ModelBundle train_bundle(const FeatureSet& clean, const wavelet::WaveletSpec& wavelet, double sampling_rate_hz,
                         const TrainOptions& opts, std::uint64_t seed);

// Prediction for one segment given as raw samples per channel.
classify::FknnPrediction predict_segment(const ModelBundle& bundle, const Segment& segment);

// Versioned text format ("myofuzz-model 1"). load throws DataError on any
// malformed or truncated content.
void save_bundle(const ModelBundle& bundle, std::ostream& out);
ModelBundle load_bundle(std::istream& in);
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& file);
ModelBundle load_bundle(const std::filesystem::path& file);

}  // namespace myofuzz
