#include "myofuzz/classify.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "myofuzz/error.hpp"
#include "myofuzz/folds.hpp"
#include "myofuzz/metrics.hpp"
#include "myofuzz/simd.hpp"

namespace myofuzz::classify {

ChannelSample channel_sample(const FeatureSet& fs, std::size_t row) {
  ChannelSample x;
  x.reserve(fs.num_channels());
  for (const auto& m : fs.channels) x.push_back(m.row(row));
  return x;
}

int ClassSupports::label() const {
  if (d.empty()) throw ContractError("ClassSupports::label: no classes");
  return static_cast<int>(std::ranges::max_element(d) - d.begin()) + 1;
}

SigmaEstimate sigma_from_train(const Matrix& x) {
  const std::size_t n = x.rows();
  SigmaEstimate out;
  if (n >= 2) {
    std::vector<double> dists;
    dists.reserve(n * (n - 1) / 2);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t rest = n - i - 1;
      simd::squared_distances(x.row(i), x.data().subspan((i + 1) * x.cols(), rest * x.cols()), x.cols(),
                              std::span<double>(d2.data(), rest));
      for (std::size_t k = 0; k < rest; ++k) dists.push_back(std::sqrt(d2[k]));
    }
    const double mean = std::accumulate(dists.begin(), dists.end(), 0.0) / static_cast<double>(dists.size());
    double var = 0.0;
    for (double d : dists) var += (d - mean) * (d - mean);
    out.sigma = std::sqrt(var / static_cast<double>(dists.size()));
  } else {
    out.sigma = 0.0;
  }
  if (!(out.sigma > 0.0) || !std::isfinite(out.sigma)) {
    spdlog::warn("pairwise distances have zero spread over {} training points; using sigma = 1", n);
    out.sigma = 1.0;
    out.fallback = true;
  }
  return out;
}

double gaussian_similarity(std::span<const double> x, std::span<const double> y, double sigma) {
  if (x.size() != y.size()) throw DataError("gaussian_similarity: dimension mismatch");
  std::vector<double> d2(1);
  simd::squared_distances(x, y, x.size(), d2);
  return std::exp(-d2[0] / (2.0 * sigma * sigma));
}

FuzzyNeighbor make_neighbor(std::size_t index, int label, double r, double log_sim) {
  FuzzyNeighbor nb;
  nb.index = index;
  nb.label = label;
  nb.sim = std::exp(log_sim);
  nb.u = corrected_similarity(r, nb.sim);
  nb.log_u = r > 0.0 ? std::log(r) + log_sim : -std::numeric_limits<double>::infinity();
  return nb;
}

std::vector<std::size_t> alpha_cut_top_k(std::span<const double> u, std::size_t k) {
  if (k > u.size()) throw ContractError(fmt::format("alpha cut: K = {} exceeds {} candidates", k, u.size()));
  std::vector<std::size_t> idx(u.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return u[a] > u[b] || (u[a] == u[b] && a < b); });
  idx.resize(k);
  return idx;
}

ClassSupports class_supports(std::span<const std::vector<FuzzyNeighbor>> per_channel, int num_classes) {
  if (num_classes < 1) throw ContractError("class_supports: need at least one class");
  ClassSupports out;
  out.d.assign(static_cast<std::size_t>(num_classes), 0.0);
  // Counts are accumulated relative to the largest log-membership; the common
  // factor cancels in the normalisation.
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& list : per_channel)
    for (const auto& nb : list) shift = std::max(shift, nb.log_u);
  if (std::isfinite(shift)) {
    for (const auto& list : per_channel)
      for (const auto& nb : list) {
        if (nb.label < 1 || nb.label > num_classes) throw DataError("class_supports: neighbour label out of range");
        out.d[static_cast<std::size_t>(nb.label - 1)] += std::exp(nb.log_u - shift);
      }
  }
  const double total = std::accumulate(out.d.begin(), out.d.end(), 0.0);
  if (!(total > 0.0)) {
    std::ranges::fill(out.d, 1.0 / num_classes);
    out.fallback = true;
    return out;
  }
  for (double& v : out.d) v /= total;
  return out;
}

FuzzyKnnEnsemble::FuzzyKnnEnsemble(FeatureSet train, std::size_t k) : train_(std::move(train)), k_(k) {
  train_.validate();
  if (k_ == 0) throw ConfigError("K must be at least 1");
  if (k_ > train_.size())
    throw ConfigError(fmt::format("K = {} exceeds the {} training samples", k_, train_.size()));
  sigmas_.reserve(train_.num_channels());
  for (const auto& m : train_.channels) sigmas_.push_back(sigma_from_train(m));
}

std::vector<FuzzyNeighbor> FuzzyKnnEnsemble::neighbors(std::size_t channel, std::span<const double> x,
                                                       double r) const {
  const Matrix& m = train_.channels.at(channel);
  if (x.size() != m.cols())
    throw DataError(fmt::format("channel {}: expected {} features, got {}", channel, m.cols(), x.size()));
  if (!(r >= 0.0 && r <= 1.0)) throw ContractError(fmt::format("membership {} outside [0, 1]", r));
  const double sigma = sigmas_[channel].sigma;
  std::vector<double> log_sim(m.rows());
  simd::squared_distances(x, m.data(), m.cols(), log_sim);
  for (double& v : log_sim) v = -v / (2.0 * sigma * sigma);
  // Ranking by log u equals ranking by u for r > 0; for r = 0 every u ties.
  std::vector<double> key(log_sim);
  if (r == 0.0) std::ranges::fill(key, 0.0);
  std::vector<FuzzyNeighbor> out;
  out.reserve(k_);
  for (std::size_t idx : alpha_cut_top_k(key, k_)) out.push_back(make_neighbor(idx, train_.labels[idx], r, log_sim[idx]));
  return out;
}

ClassSupports FuzzyKnnEnsemble::predict(const ChannelSample& x, std::span<const double> r) const {
  if (x.size() != num_channels() || r.size() != num_channels())
    throw DataError(fmt::format("query has {} channels / {} memberships, model has {} channels", x.size(), r.size(),
                                num_channels()));
  std::vector<std::vector<FuzzyNeighbor>> lists;
  lists.reserve(num_channels());
  for (std::size_t l = 0; l < num_channels(); ++l) lists.push_back(neighbors(l, x[l], r[l]));
  return class_supports(lists, num_classes());
}

std::vector<double> band_coordinates(std::span<const occ::ChannelDetector> detectors, const ChannelSample& x) {
  if (detectors.size() != x.size())
    throw DataError(fmt::format("{} detectors for a {}-channel query", detectors.size(), x.size()));
  std::vector<double> t(x.size());
  for (std::size_t l = 0; l < x.size(); ++l)
    t[l] = fuzzy::normalize_score(detectors[l].model.decision(x[l]), detectors[l].band);
  return t;
}

std::vector<double> memberships(const fuzzy::MembershipSpec& spec, std::span<const double> t) {
  std::vector<double> r(t.size());
  std::ranges::transform(t, r.begin(), [&](double v) { return fuzzy::membership(spec, v); });
  return r;
}

FknnPrediction fknn_predict(const FuzzyKnnEnsemble& model, std::span<const occ::ChannelDetector> detectors,
                            const fuzzy::MembershipSpec& spec, const ChannelSample& x) {
  FknnPrediction p;
  p.r = memberships(spec, band_coordinates(detectors, x));
  p.supports = model.predict(x, p.r);
  p.label = p.supports.label();
  return p;
}

std::vector<std::size_t> default_k_grid() {
  std::vector<std::size_t> g;
  for (std::size_t k = 1; k <= 23; k += 2) g.push_back(k);
  return g;
}

namespace {

// Supports for every K of a grid from per-channel neighbour lists sorted by
// decreasing similarity.
struct SortedChannel {
  std::vector<double> log_sim;
  std::vector<int> label;
};

SortedChannel sorted_neighbours(const Matrix& train, std::span<const int> labels, double sigma,
                                std::span<const double> x) {
  std::vector<double> log_sim(train.rows());
  simd::squared_distances(x, train.data(), train.cols(), log_sim);
  for (double& v : log_sim) v = -v / (2.0 * sigma * sigma);
  const auto order = alpha_cut_top_k(log_sim, log_sim.size());
  SortedChannel s;
  for (std::size_t idx : order) {
    s.log_sim.push_back(log_sim[idx]);
    s.label.push_back(labels[idx]);
  }
  return s;
}

}  // namespace

KTuning tune_k(const FeatureSet& train, KnnFamily family, std::span<const std::size_t> grid, std::size_t folds,
               std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("K grid is empty");
  for (std::size_t k : grid)
    if (k == 0) throw ConfigError("K grid contains 0");
  KTuning out;
  out.grid.assign(grid.begin(), grid.end());
  if (grid.size() == 1) {
    out.k = grid.front();
    return out;
  }
  const int m = train.num_classes;
  const auto assignment = stratified_fold_assignment(train.labels, m, folds, seed);
  out.mean_bac.assign(grid.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    const FoldSplit split = split_fold(assignment, f);
    if (split.train.empty() || split.test.empty())
      throw DataError(fmt::format("K tuning: fold {} is empty; too few samples for {} folds", f, folds));
    const FeatureSet sub = train.subset(split.train);
    const FeatureSet val = train.subset(split.test);
    std::vector<Matrix> sub_channels;
    std::vector<Matrix> val_channels;
    if (family == KnnFamily::fuzzy_ensemble) {
      sub_channels = sub.channels;
      val_channels = val.channels;
    } else {
      sub_channels = {sub.concatenated()};
      val_channels = {val.concatenated()};
    }
    std::vector<double> sigmas;
    for (const auto& c : sub_channels) sigmas.push_back(sigma_from_train(c).sigma);

    std::vector<std::vector<int>> predicted(grid.size(), std::vector<int>(val.size()));
    for (std::size_t q = 0; q < val.size(); ++q) {
      std::vector<SortedChannel> lists;
      double shift = -std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < sub_channels.size(); ++l) {
        lists.push_back(sorted_neighbours(sub_channels[l], sub.labels, sigmas[l], val_channels[l].row(q)));
        shift = std::max(shift, lists.back().log_sim.front());
      }
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const std::size_t k = std::min(grid[g], sub.size());
        std::vector<double> d(static_cast<std::size_t>(m), 0.0);
        for (const auto& list : lists)
          for (std::size_t i = 0; i < k; ++i)
            d[static_cast<std::size_t>(list.label[i] - 1)] += std::exp(list.log_sim[i] - shift);
        predicted[g][q] = static_cast<int>(std::ranges::max_element(d) - d.begin()) + 1;
      }
    }
    for (std::size_t g = 0; g < grid.size(); ++g)
      out.mean_bac[g] += metrics::bac(val.labels, predicted[g], m) / static_cast<double>(folds);
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const bool better = out.mean_bac[g] > out.mean_bac[best];
    const bool tie_smaller = out.mean_bac[g] == out.mean_bac[best] && grid[g] < grid[best];
    if (better || tie_smaller) best = g;
  }
  out.k = grid[best];
  return out;
}

}  // namespace myofuzz::classify
