#include "myofuzz/baselines.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "myofuzz/error.hpp"
#include "myofuzz/folds.hpp"
#include "myofuzz/metrics.hpp"
#include "myofuzz/seed.hpp"
#include "myofuzz/simd.hpp"

namespace myofuzz::classify {

std::string_view to_string(WeightMode mode) noexcept {
  switch (mode) {
    case WeightMode::B: return "B";
    case WeightMode::AW: return "AW";
    case WeightMode::AWc: return "AWc";
  }
  return "?";
}

std::string_view to_string(BaseModel model) noexcept {
  switch (model) {
    case BaseModel::knn: return "KNN";
    case BaseModel::gnb: return "GNB";
    case BaseModel::nbm: return "NBM";
  }
  return "?";
}

WeightMode parse_weight_mode(std::string_view name) {
  for (auto m : {WeightMode::B, WeightMode::AW, WeightMode::AWc})
    if (name == to_string(m)) return m;
  throw ConfigError(fmt::format("unknown weighting mode '{}' (expected B, AW or AWc)", name));
}

BaseModel parse_base_model(std::string_view name) {
  for (auto m : {BaseModel::knn, BaseModel::gnb, BaseModel::nbm})
    if (name == to_string(m)) return m;
  throw ConfigError(fmt::format("unknown base classifier '{}' (expected KNN, GNB or NBM)", name));
}

ChannelWeights channel_weights(WeightMode mode, std::span<const double> t, const fuzzy::MembershipSpec& soft) {
  ChannelWeights out;
  out.w.resize(t.size());
  for (std::size_t l = 0; l < t.size(); ++l) {
    switch (mode) {
      case WeightMode::B: out.w[l] = 1.0; break;
      case WeightMode::AW: out.w[l] = fuzzy::membership(soft, t[l]); break;
      case WeightMode::AWc: out.w[l] = fuzzy::membership({fuzzy::MembershipKind::cr}, t[l]); break;
    }
  }
  if (std::ranges::all_of(out.w, [](double v) { return v == 0.0; })) {
    std::ranges::fill(out.w, 1.0);
    out.fallback = true;
  }
  return out;
}

namespace {

void check_query(const ChannelSample& x, std::span<const double> w, std::size_t channels, std::size_t dim) {
  if (x.size() != channels || w.size() != channels)
    throw DataError(fmt::format("query has {} channels / {} weights, model has {} channels", x.size(), w.size(),
                                channels));
  for (std::size_t l = 0; l < channels; ++l)
    if (x[l].size() != dim)
      throw DataError(fmt::format("channel {}: expected {} features, got {}", l, dim, x[l].size()));
}

ClassSupports softmax_supports(std::vector<double> log_post) {
  ClassSupports out;
  const double top = *std::ranges::max_element(log_post);
  if (!std::isfinite(top)) {
    out.d.assign(log_post.size(), 1.0 / static_cast<double>(log_post.size()));
    out.fallback = true;
    return out;
  }
  double total = 0.0;
  for (double& v : log_post) total += (v = std::exp(v - top));
  for (double& v : log_post) v /= total;
  out.d = std::move(log_post);
  return out;
}

}  // namespace

WeightedKnn::WeightedKnn(const FeatureSet& train, std::size_t k)
    : train_(train.concatenated()),
      labels_(train.labels),
      num_classes_(train.num_classes),
      num_channels_(train.num_channels()),
      dim_(train.dim()),
      k_(k) {
  train.validate();
  if (k_ == 0) throw ConfigError("K must be at least 1");
  if (k_ > train.size()) throw ConfigError(fmt::format("K = {} exceeds the {} training samples", k_, train.size()));
  sigma_ = sigma_from_train(train_);
}

ClassSupports WeightedKnn::predict(const ChannelSample& x, std::span<const double> w) const {
  check_query(x, w, num_channels_, dim_);
  std::vector<double> q;
  std::vector<double> attr_w;
  q.reserve(num_channels_ * dim_);
  attr_w.reserve(num_channels_ * dim_);
  for (std::size_t l = 0; l < num_channels_; ++l) {
    q.insert(q.end(), x[l].begin(), x[l].end());
    attr_w.insert(attr_w.end(), dim_, w[l]);
  }
  std::vector<double> log_sim(train_.rows());
  simd::weighted_squared_distances(q, train_.data(), attr_w, train_.cols(), log_sim);
  const double s2 = 2.0 * sigma_.sigma * sigma_.sigma;
  for (double& v : log_sim) v = -v / s2;
  std::vector<FuzzyNeighbor> list;
  list.reserve(k_);
  for (std::size_t idx : alpha_cut_top_k(log_sim, k_)) list.push_back(make_neighbor(idx, labels_[idx], 1.0, log_sim[idx]));
  return class_supports(std::span<const std::vector<FuzzyNeighbor>>(&list, 1), num_classes_);
}

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

double log_normal(double v, double mean, double var) {
  const double z = v - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + z * z / var);
}

double log_sum_exp(std::span<const double> a) {
  const double top = *std::ranges::max_element(a);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double v : a) s += std::exp(v - top);
  return top + std::log(s);
}

struct EmFit {
  std::vector<double> log_weight, mean, var;
  double log_likelihood = -std::numeric_limits<double>::infinity();
};

// One-dimensional Gaussian mixture by expectation-maximisation.
EmFit fit_em(std::span<const double> x, int k, double floor, std::uint64_t seed) {
  const std::size_t n = x.size();
  const auto kk = static_cast<std::size_t>(k);
  const double mean_all = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double var_all = 0.0;
  for (double v : x) var_all += (v - mean_all) * (v - mean_all);
  var_all = var_all / static_cast<double>(n) + floor;

  EmFit fit;
  fit.log_weight.assign(kk, -std::log(static_cast<double>(k)));
  fit.var.assign(kk, var_all);
  fit.mean.resize(kk);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t c = 0; c < kk; ++c) {
    std::uniform_int_distribution<std::size_t> pick(c, n - 1);
    std::swap(idx[c], idx[pick(rng)]);
    fit.mean[c] = x[idx[c]];
  }

  constexpr int kMaxIterations = 100;
  constexpr double kTolerance = 1e-8;
  std::vector<double> resp(n * kk);
  std::vector<double> terms(kk);
  double previous = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxIterations; ++it) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < kk; ++c) terms[c] = fit.log_weight[c] + log_normal(x[i], fit.mean[c], fit.var[c]);
      const double norm = log_sum_exp(terms);
      ll += norm;
      for (std::size_t c = 0; c < kk; ++c) resp[i * kk + c] = std::exp(terms[c] - norm);
    }
    fit.log_likelihood = ll;
    if (std::abs(ll - previous) <= kTolerance * std::max(1.0, std::abs(ll))) break;
    previous = ll;
    for (std::size_t c = 0; c < kk; ++c) {
      double nc = 0.0;
      double sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nc += resp[i * kk + c];
        sx += resp[i * kk + c] * x[i];
      }
      if (nc <= 1e-12) {
        // Empty component: keep it out of the mixture.
        fit.log_weight[c] = -std::numeric_limits<double>::infinity();
        continue;
      }
      const double mu = sx / nc;
      double sv = 0.0;
      for (std::size_t i = 0; i < n; ++i) sv += resp[i * kk + c] * (x[i] - mu) * (x[i] - mu);
      fit.log_weight[c] = std::log(nc / static_cast<double>(n));
      fit.mean[c] = mu;
      fit.var[c] = sv / nc + floor;
    }
  }
  return fit;
}

}  // namespace

MixtureNb::MixtureNb(const FeatureSet& train, int components, std::uint64_t seed)
    : num_classes_(train.num_classes),
      num_channels_(train.num_channels()),
      dim_(train.dim()),
      components_(components) {
  train.validate();
  if (components < 1) throw ConfigError("mixture needs at least one component");
  const std::size_t n = train.size();

  // Variance floor relative to the widest attribute, as common naive Bayes
  // implementations do.
  double max_var = 0.0;
  for (const auto& m : train.channels)
    for (std::size_t a = 0; a < m.cols(); ++a) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += m(i, a);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) var += (m(i, a) - mean) * (m(i, a) - mean);
      max_var = std::max(max_var, var / static_cast<double>(n));
    }
  floor_ = 1e-9 * (max_var > 0.0 ? max_var : 1.0);

  log_prior_.resize(static_cast<std::size_t>(num_classes_));
  mixtures_.resize(static_cast<std::size_t>(num_classes_) * num_channels_ * dim_);
  for (int j = 1; j <= num_classes_; ++j) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (train.labels[i] == j) members.push_back(i);
    log_prior_[static_cast<std::size_t>(j - 1)] = std::log(static_cast<double>(members.size()) / static_cast<double>(n));
    const int k = std::min<int>(components, static_cast<int>(members.size()));
    std::vector<double> values(members.size());
    for (std::size_t l = 0; l < num_channels_; ++l)
      for (std::size_t a = 0; a < dim_; ++a) {
        for (std::size_t i = 0; i < members.size(); ++i) values[i] = train.channels[l](members[i], a);
        EmFit best;
        if (k == 1) {
          const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
          double var = 0.0;
          for (double v : values) var += (v - mean) * (v - mean);
          best.log_weight = {0.0};
          best.mean = {mean};
          best.var = {var / static_cast<double>(values.size()) + floor_};
        } else {
          for (int restart = 0; restart < kRestarts; ++restart) {
            const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(j), l, a,
                                                       static_cast<std::uint64_t>(restart)});
            EmFit fit = fit_em(values, k, floor_, s);
            if (fit.log_likelihood > best.log_likelihood) best = std::move(fit);
          }
        }
        Mixture& mix = mixtures_[(static_cast<std::size_t>(j - 1) * num_channels_ + l) * dim_ + a];
        mix.log_weight = std::move(best.log_weight);
        mix.mean = std::move(best.mean);
        mix.var = std::move(best.var);
      }
  }
}

const MixtureNb::Mixture& MixtureNb::mixture(int cls, std::size_t channel, std::size_t attr) const {
  return mixtures_[(static_cast<std::size_t>(cls - 1) * num_channels_ + channel) * dim_ + attr];
}

double MixtureNb::log_density(int cls, std::size_t channel, std::size_t attr, double v) const {
  const Mixture& mix = mixture(cls, channel, attr);
  std::vector<double> terms(mix.mean.size());
  for (std::size_t c = 0; c < terms.size(); ++c) terms[c] = mix.log_weight[c] + log_normal(v, mix.mean[c], mix.var[c]);
  return log_sum_exp(terms);
}

ClassSupports MixtureNb::predict(const ChannelSample& x, std::span<const double> w) const {
  check_query(x, w, num_channels_, dim_);
  std::vector<double> log_post(log_prior_);
  for (int j = 1; j <= num_classes_; ++j) {
    double s = 0.0;
    for (std::size_t l = 0; l < num_channels_; ++l) {
      if (w[l] == 0.0) continue;
      double ch = 0.0;
      for (std::size_t a = 0; a < dim_; ++a) ch += log_density(j, l, a, x[l][a]);
      s += w[l] * ch;
    }
    log_post[static_cast<std::size_t>(j - 1)] += s;
  }
  return softmax_supports(std::move(log_post));
}

ComponentTuning tune_components(const FeatureSet& train, std::span<const int> grid, std::size_t folds,
                                std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("component grid is empty");
  ComponentTuning out;
  out.grid.assign(grid.begin(), grid.end());
  if (grid.size() == 1) {
    out.components = grid.front();
    return out;
  }
  const auto assignment = stratified_fold_assignment(train.labels, train.num_classes, folds, seed);
  out.mean_bac.assign(grid.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    const FoldSplit split = split_fold(assignment, f);
    if (split.train.empty() || split.test.empty())
      throw DataError(fmt::format("component tuning: fold {} is empty; too few samples for {} folds", f, folds));
    const FeatureSet sub = train.subset(split.train);
    const FeatureSet val = train.subset(split.test);
    const std::vector<double> ones(train.num_channels(), 1.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const MixtureNb model(sub, grid[g], derive_seed(seed, {f, static_cast<std::uint64_t>(grid[g])}));
      std::vector<int> predicted(val.size());
      for (std::size_t q = 0; q < val.size(); ++q) predicted[q] = model.predict(channel_sample(val, q), ones).label();
      out.mean_bac[g] += metrics::bac(val.labels, predicted, train.num_classes) / static_cast<double>(folds);
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const bool better = out.mean_bac[g] > out.mean_bac[best];
    const bool tie_fewer = out.mean_bac[g] == out.mean_bac[best] && grid[g] < grid[best];
    if (better || tie_fewer) best = g;
  }
  out.components = grid[best];
  return out;
}

BaselinePrediction baseline_predict(const WeightedClassifier& model, WeightMode mode, const ChannelSample& x,
                                    std::span<const double> t, const fuzzy::MembershipSpec& soft) {
  BaselinePrediction p;
  p.weights = channel_weights(mode, t, soft);
  p.supports = model.predict(x, p.weights.w);
  p.label = p.supports.label();
  return p;
}

}  // namespace myofuzz::classify
