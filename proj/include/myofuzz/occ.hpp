#pragma once

// nu-one-class SVM with a Gaussian RBF kernel, trained on clean features only.
//
// Dual: minimise 1/2 a'Qa  s.t.  sum(a) = 1,  0 <= a_i <= 1/(nu N),
// Q_ij = exp(-gamma |x_i - x_j|^2). Solved by pairwise coordinate descent on
// the maximal-violating pair. decision(x) = sum_i a_i K(x, s_i) - rho, positive
// on the inlier side.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "myofuzz/matrix.hpp"

namespace myofuzz::occ {

struct SolverOptions {
  // Stopping tolerance on the KKT gap, in the usual libsvm scaling where the
  // box is [0, 1] and the equality is sum(a) = nu N.
  double tolerance = 1e-3;
  std::size_t max_iterations = 100000;
};

class OneClassModel {
 public:
  OneClassModel() = default;
  OneClassModel(Matrix support_vectors, std::vector<double> alpha, double rho, double gamma, double nu);

  double decision(std::span<const double> x) const;
  std::vector<double> decision(const Matrix& xs) const;

  const Matrix& support_vectors() const noexcept { return sv_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  double rho() const noexcept { return rho_; }
  double gamma() const noexcept { return gamma_; }
  double nu() const noexcept { return nu_; }
  std::size_t dim() const noexcept { return sv_.cols(); }

 private:
  Matrix sv_;
  std::vector<double> alpha_;
  double rho_ = 0.0;
  double gamma_ = 1.0;
  double nu_ = 0.5;
};

struct TrainResult {
  OneClassModel model;
  std::vector<double> alpha;  // full dual vector, one entry per training row
  std::size_t iterations = 0;
  bool converged = true;
};

// 1 / (d * mean per-coordinate variance). Throws DataError for zero variance.
double default_gamma(const Matrix& x);

// Throws ConfigError on bad nu/gamma/N and DataError when all rows coincide.
TrainResult train_ocsvm_full(const Matrix& x, double nu, double gamma, const SolverOptions& opts = {});
OneClassModel train_ocsvm(const Matrix& x, double nu, double gamma);
OneClassModel train_ocsvm(const Matrix& x, double nu);  // default_gamma

// Uniform samples in the bounding box of x, widened by 10% of its range per side.
Matrix sample_uniform_outliers(const Matrix& x, std::size_t n, std::uint64_t seed);

std::vector<double> default_nu_grid();  // 0.1, 0.2, ..., 1.0

struct NuTuning {
  double nu = 0.0;
  std::vector<double> grid;
  std::vector<double> mean_bac;  // aligned with grid; empty if no search ran
};

// Cross-validated choice of nu against artificial uniform outliers (one per
// validation point); ties go to the smaller nu.
NuTuning tune_nu(const Matrix& x, std::span<const double> grid, std::size_t folds, std::uint64_t seed);

// Scale s of the fuzzy band [-s, +s] around the crisp boundary: median of
// |decision| over the training rows.
struct ScoreBand {
  double scale = 1.0;
};
ScoreBand fit_score_band(const OneClassModel& model, const Matrix& train);

struct ChannelDetector {
  OneClassModel model;
  ScoreBand band;
  NuTuning tuning;
};

struct DetectorOptions {
  std::vector<double> nu_grid = default_nu_grid();
  std::size_t folds = 4;
  std::size_t jobs = 1;
};

// One detector per channel matrix, trained independently. Labels are never
// consulted. Errors carry the failing channel index.
std::vector<ChannelDetector> fit_channel_detectors(std::span<const Matrix> channels, std::uint64_t seed,
                                                   const DetectorOptions& opts = {});

// Versioned text format ("ocsvm 1"). Throws DataError on malformed input.
void save(std::ostream& out, const ChannelDetector& det);
ChannelDetector load_detector(std::istream& in);

}  // namespace myofuzz::occ
