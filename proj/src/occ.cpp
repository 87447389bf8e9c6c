#include "myofuzz/occ.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "myofuzz/error.hpp"
#include "myofuzz/parallel.hpp"
#include "myofuzz/seed.hpp"
#include "myofuzz/simd.hpp"

namespace myofuzz::occ {

OneClassModel::OneClassModel(Matrix support_vectors, std::vector<double> alpha, double rho, double gamma,
                             double nu)
    : sv_(std::move(support_vectors)), alpha_(std::move(alpha)), rho_(rho), gamma_(gamma), nu_(nu) {
  if (sv_.rows() != alpha_.size()) throw DataError("one-class model: support vector / alpha count mismatch");
  if (!(gamma_ > 0.0)) throw DataError("one-class model: gamma must be positive");
}

double OneClassModel::decision(std::span<const double> x) const {
  if (x.size() != sv_.cols())
    throw DataError(fmt::format("one-class model expects {} features, got {}", sv_.cols(), x.size()));
  std::vector<double> d2(sv_.rows());
  simd::squared_distances(x, sv_.data(), sv_.cols(), d2);
  for (double& v : d2) v = std::exp(-gamma_ * v);
  return simd::dot(alpha_, d2) - rho_;
}

std::vector<double> OneClassModel::decision(const Matrix& xs) const {
  std::vector<double> out(xs.rows());
  for (std::size_t r = 0; r < xs.rows(); ++r) out[r] = decision(xs.row(r));
  return out;
}

double default_gamma(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) throw DataError("default_gamma: empty data");
  const auto n = static_cast<double>(x.rows());
  double total = 0.0;
  for (std::size_t a = 0; a < x.cols(); ++a) {
    double s = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) s += x(r, a);
    const double mu = s / n;
    double v = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) v += (x(r, a) - mu) * (x(r, a) - mu);
    total += v / n;
  }
  const double var = total / static_cast<double>(x.cols());
  if (!(var > 0.0)) throw DataError("training data has zero variance; cannot set kernel width");
  return 1.0 / (static_cast<double>(x.cols()) * var);
}

namespace {

bool all_rows_identical(const Matrix& x) {
  for (std::size_t r = 1; r < x.rows(); ++r)
    if (!std::ranges::equal(x.row(r), x.row(0))) return false;
  return true;
}

Matrix kernel_matrix(const Matrix& x, double gamma) {
  const std::size_t n = x.rows();
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    simd::squared_distances(x.row(i), x.data(), x.cols(), q.row(i));
    for (double& v : q.row(i)) v = std::exp(-gamma * v);
  }
  return q;
}

}  // namespace

TrainResult train_ocsvm_full(const Matrix& x, double nu, double gamma, const SolverOptions& opts) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError(fmt::format("nu must be in (0, 1], got {}", nu));
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError(fmt::format("gamma must be positive, got {}", gamma));
  if (x.rows() < 8) throw DataError(fmt::format("one-class SVM needs at least 8 samples, got {}", x.rows()));
  if (all_rows_identical(x)) throw DataError("one-class SVM training data are all identical");

  const std::size_t n = x.rows();
  const double nu_n = nu * static_cast<double>(n);
  const double upper = 1.0 / nu_n;
  const Matrix q = kernel_matrix(x, gamma);

  // Feasible start: as many variables as possible at the upper bound.
  std::vector<double> alpha(n, 0.0);
  const auto n_full = std::min(n, static_cast<std::size_t>(std::floor(nu_n)));
  for (std::size_t i = 0; i < n_full; ++i) alpha[i] = upper;
  if (n_full < n) alpha[n_full] = 1.0 - static_cast<double>(n_full) * upper;

  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (alpha[i] != 0.0)
      for (std::size_t k = 0; k < n; ++k) grad[k] += alpha[i] * q(k, i);

  TrainResult result;
  result.converged = false;
  const double tol = opts.tolerance / nu_n;
  std::size_t iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    // i may grow (below the upper bound), j may shrink (above zero).
    std::ptrdiff_t i = -1;
    std::ptrdiff_t j = -1;
    double g_min = 0.0;
    double g_max = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (alpha[k] < upper && (i < 0 || grad[k] < g_min)) {
        i = static_cast<std::ptrdiff_t>(k);
        g_min = grad[k];
      }
      if (alpha[k] > 0.0 && (j < 0 || grad[k] > g_max)) {
        j = static_cast<std::ptrdiff_t>(k);
        g_max = grad[k];
      }
    }
    if (i < 0 || j < 0 || g_max - g_min < tol) {
      result.converged = true;
      break;
    }
    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    const double curvature = std::max(q(ui, ui) + q(uj, uj) - 2.0 * q(ui, uj), 1e-12);
    const double room_i = upper - alpha[ui];
    const double room_j = alpha[uj];
    const double step = std::min({(g_max - g_min) / curvature, room_i, room_j});
    alpha[ui] = step == room_i ? upper : alpha[ui] + step;
    alpha[uj] = step == room_j ? 0.0 : alpha[uj] - step;
    for (std::size_t k = 0; k < n; ++k) grad[k] += step * (q(k, ui) - q(k, uj));
  }
  result.iterations = iter;
  if (!result.converged)
    spdlog::warn("one-class SVM stopped at the iteration cap ({}) before reaching tolerance", opts.max_iterations);

  // rho: average gradient over free variables, else midpoint of the bound gap.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double lower_side = -std::numeric_limits<double>::infinity();
  double upper_side = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] > 0.0 && alpha[k] < upper) {
      free_sum += grad[k];
      ++free_count;
    } else if (alpha[k] >= upper) {
      lower_side = std::max(lower_side, grad[k]);
    } else {
      upper_side = std::min(upper_side, grad[k]);
    }
  }
  double rho = 0.0;
  if (free_count > 0)
    rho = free_sum / static_cast<double>(free_count);
  else if (std::isfinite(lower_side) && std::isfinite(upper_side))
    rho = 0.5 * (lower_side + upper_side);
  else
    rho = std::isfinite(lower_side) ? lower_side : upper_side;

  Matrix sv;
  std::vector<double> sv_alpha;
  for (std::size_t k = 0; k < n; ++k)
    if (alpha[k] > 0.0) {
      sv.append_row(x.row(k));
      sv_alpha.push_back(alpha[k]);
    }
  result.model = OneClassModel(std::move(sv), std::move(sv_alpha), rho, gamma, nu);
  result.alpha = std::move(alpha);
  return result;
}

OneClassModel train_ocsvm(const Matrix& x, double nu, double gamma) {
  return train_ocsvm_full(x, nu, gamma).model;
}

OneClassModel train_ocsvm(const Matrix& x, double nu) { return train_ocsvm(x, nu, default_gamma(x)); }

Matrix sample_uniform_outliers(const Matrix& x, std::size_t n, std::uint64_t seed) {
  if (x.rows() == 0) throw DataError("sample_uniform_outliers: empty reference set");
  const std::size_t d = x.cols();
  std::vector<double> lo(d), hi(d);
  for (std::size_t a = 0; a < d; ++a) {
    double mn = x(0, a), mx = x(0, a);
    for (std::size_t r = 1; r < x.rows(); ++r) {
      mn = std::min(mn, x(r, a));
      mx = std::max(mx, x(r, a));
    }
    const double pad = 0.1 * (mx - mn);
    lo[a] = mn - pad;
    hi[a] = mx + pad;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix out(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < d; ++a) out(r, a) = lo[a] + (hi[a] - lo[a]) * unit(rng);
  return out;
}

std::vector<double> default_nu_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

NuTuning tune_nu(const Matrix& x, std::span<const double> grid, std::size_t folds, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("nu grid is empty");
  NuTuning out;
  out.grid.assign(grid.begin(), grid.end());
  if (grid.size() == 1) {
    out.nu = grid.front();
    return out;
  }
  if (folds < 2) throw ConfigError("nu tuning needs at least 2 folds");
  const std::size_t n = x.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  out.mean_bac.assign(grid.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t p = 0; p < n; ++p) (p % folds == f ? val_idx : train_idx).push_back(order[p]);
    if (train_idx.size() < 8 || val_idx.empty())
      throw DataError(fmt::format("nu tuning: {} samples are too few for {} folds", n, folds));
    const Matrix train = take_rows(x, train_idx);
    const Matrix val = take_rows(x, val_idx);
    const Matrix outliers = sample_uniform_outliers(train, val.rows(), derive_seed(seed, {f}));
    const double gamma = default_gamma(train);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const OneClassModel model = train_ocsvm(train, grid[g], gamma);
      std::size_t inliers_kept = 0;
      for (double s : model.decision(val)) inliers_kept += s >= 0.0;
      std::size_t outliers_caught = 0;
      for (double s : model.decision(outliers)) outliers_caught += s < 0.0;
      const double bac = 0.5 * (static_cast<double>(inliers_kept) / static_cast<double>(val.rows()) +
                                static_cast<double>(outliers_caught) / static_cast<double>(outliers.rows()));
      out.mean_bac[g] += bac / static_cast<double>(folds);
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const bool better = out.mean_bac[g] > out.mean_bac[best];
    const bool tie_smaller = out.mean_bac[g] == out.mean_bac[best] && grid[g] < grid[best];
    if (better || tie_smaller) best = g;
  }
  out.nu = grid[best];
  return out;
}

ScoreBand fit_score_band(const OneClassModel& model, const Matrix& train) {
  std::vector<double> mags = model.decision(train);
  if (mags.empty()) throw DataError("score band needs training rows");
  for (double& v : mags) v = std::fabs(v);
  std::ranges::sort(mags);
  const std::size_t m = mags.size();
  double s = m % 2 == 1 ? mags[m / 2] : 0.5 * (mags[m / 2 - 1] + mags[m / 2]);
  if (!(s > 0.0)) s = std::accumulate(mags.begin(), mags.end(), 0.0) / static_cast<double>(m);
  if (!(s > 0.0)) throw NumericalError("all training decision scores are zero; score band undefined");
  return {s};
}

std::vector<ChannelDetector> fit_channel_detectors(std::span<const Matrix> channels, std::uint64_t seed,
                                                   const DetectorOptions& opts) {
  std::vector<ChannelDetector> out(channels.size());
  parallel_for(channels.size(), opts.jobs, [&](std::size_t l) {
    try {
      const Matrix& x = channels[l];
      ChannelDetector det;
      det.tuning = tune_nu(x, opts.nu_grid, opts.folds, derive_seed(seed, {stream::nu_tuning, l}));
      det.model = train_ocsvm(x, det.tuning.nu);
      det.band = fit_score_band(det.model, x);
      out[l] = std::move(det);
    } catch (const DataError& e) {
      throw DataError(fmt::format("channel {}: {}", l, e.what()));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("channel {}: {}", l, e.what()));
    } catch (const NumericalError& e) {
      throw NumericalError(fmt::format("channel {}: {}", l, e.what()));
    }
  });
  return out;
}

void save(std::ostream& out, const ChannelDetector& det) {
  const auto& m = det.model;
  fmt::print(out, "ocsvm 1\nnu {}\ngamma {}\nrho {}\nscale {}\ndim {}\nsupport_vectors {}\n", m.nu(), m.gamma(),
             m.rho(), det.band.scale, m.dim(), m.support_vectors().rows());
  for (std::size_t r = 0; r < m.support_vectors().rows(); ++r)
    fmt::print(out, "{} {}\n", m.alpha()[r], fmt::join(m.support_vectors().row(r), " "));
  fmt::print(out, "end\n");
}

namespace {

template <class T>
T expect_field(std::istream& in, const char* name) {
  std::string key;
  T value{};
  if (!(in >> key) || key != name || !(in >> value))
    throw DataError(fmt::format("detector file: expected field '{}'", name));
  return value;
}

}  // namespace

ChannelDetector load_detector(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "ocsvm") throw DataError("detector file: missing 'ocsvm' header");
  if (version != 1) throw DataError(fmt::format("detector file: unsupported version {}", version));
  const auto nu = expect_field<double>(in, "nu");
  const auto gamma = expect_field<double>(in, "gamma");
  const auto rho = expect_field<double>(in, "rho");
  const auto scale = expect_field<double>(in, "scale");
  const auto dim = expect_field<std::size_t>(in, "dim");
  const auto count = expect_field<std::size_t>(in, "support_vectors");
  if (!(nu > 0.0 && nu <= 1.0) || !(gamma > 0.0) || !(scale > 0.0) || !std::isfinite(rho) || dim == 0)
    throw DataError("detector file: parameter out of range");
  Matrix sv(count, dim);
  std::vector<double> alpha(count);
  for (std::size_t r = 0; r < count; ++r) {
    if (!(in >> alpha[r])) throw DataError("detector file: truncated support vectors");
    for (std::size_t a = 0; a < dim; ++a)
      if (!(in >> sv(r, a))) throw DataError("detector file: truncated support vectors");
  }
  if (!(in >> tag) || tag != "end") throw DataError("detector file: missing 'end'");
  ChannelDetector det;
  det.model = OneClassModel(std::move(sv), std::move(alpha), rho, gamma, nu);
  det.band.scale = scale;
  det.tuning.nu = nu;
  return det;
}

}  // namespace myofuzz::occ
