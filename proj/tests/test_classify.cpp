#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "myofuzz/classify.hpp"
#include "myofuzz/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace myofuzz;
using namespace myofuzz::classify;
using testing_support::to_feature_set;

namespace {

std::vector<double> library_sigmas(const FuzzyKnnEnsemble& model) {
  std::vector<double> s;
  for (const auto& e : model.sigmas()) s.push_back(e.sigma);
  return s;
}

ChannelSample as_sample(const std::vector<oracle::Vec>& x) {
  ChannelSample s;
  for (const auto& v : x) s.emplace_back(v);
  return s;
}

}  // namespace

TEST(ClassSupports, HandExampleFromSigmaCounts) {
  std::vector<std::vector<FuzzyNeighbor>> lists(1);
  lists[0] = {make_neighbor(0, 1, 1.0, std::log(0.9)), make_neighbor(1, 1, 1.0, std::log(0.8)),
              make_neighbor(2, 2, 1.0, std::log(0.5))};
  const ClassSupports s = class_supports(lists, 2);
  EXPECT_NEAR(s.d[0], 1.7 / 2.2, 1e-15);
  EXPECT_NEAR(s.d[1], 0.5 / 2.2, 1e-15);
  EXPECT_FALSE(s.fallback);
  EXPECT_EQ(s.label(), 1);

  // Duplicating the channel leaves the ratios unchanged.
  lists.push_back(lists[0]);
  const ClassSupports twice = class_supports(lists, 2);
  EXPECT_NEAR(twice.d[0], s.d[0], 1e-15);
}

TEST(ClassSupports, AllZeroIsUniformWithFallback) {
  std::vector<std::vector<FuzzyNeighbor>> lists(1);
  lists[0] = {make_neighbor(0, 1, 0.0, std::log(0.9)), make_neighbor(1, 2, 0.0, std::log(0.4))};
  const ClassSupports s = class_supports(lists, 2);
  EXPECT_TRUE(s.fallback);
  EXPECT_DOUBLE_EQ(s.d[0], 0.5);
  EXPECT_DOUBLE_EQ(s.d[1], 0.5);
  EXPECT_EQ(s.label(), 1);
}

TEST(CorrectedSimilarity, IsAlgebraicProduct) {
  EXPECT_EQ(corrected_similarity(1.0, 0.37), 0.37);
  EXPECT_EQ(corrected_similarity(0.0, 0.37), 0.0);
  EXPECT_DOUBLE_EQ(corrected_similarity(0.5, 0.8), 0.4);
}

TEST(AlphaCut, TiesBrokenByIndex) {
  const std::vector<double> u{0.9, 0.5, 0.5, 0.1};
  EXPECT_EQ(alpha_cut_top_k(u, 2), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(alpha_cut_top_k(u, 4), (std::vector<std::size_t>{0, 1, 2, 3}));
  const std::vector<double> flat(5, 0.3);
  EXPECT_EQ(alpha_cut_top_k(flat, 3), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(alpha_cut_top_k(u, 5), ContractError);
}

TEST(GaussianSimilarity, PointValues) {
  const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
  EXPECT_EQ(gaussian_similarity(a, a, 2.0), 1.0);
  EXPECT_NEAR(gaussian_similarity(a, b, 5.0), std::exp(-0.5), 1e-15);
  EXPECT_EQ(gaussian_similarity(a, b, 1.3), gaussian_similarity(b, a, 1.3));
}

TEST(Sigma, MatchesPairwiseOracleAndScales) {
  std::mt19937_64 rng(1);
  const auto pts = testing_support::random_points(rng, 17, 3);
  const Matrix m = testing_support::to_matrix(pts);
  EXPECT_NEAR(sigma_from_train(m).sigma, oracle::pairwise_distance_std(pts), 1e-12);

  Matrix scaled = m;
  for (double& v : scaled.data()) v *= 2.5;
  EXPECT_NEAR(sigma_from_train(scaled).sigma, 2.5 * sigma_from_train(m).sigma, 1e-12);

  const oracle::Points line{{0.0}, {1.0}, {2.0}};
  EXPECT_NEAR(sigma_from_train(testing_support::to_matrix(line)).sigma, oracle::pairwise_distance_std(line), 1e-15);
  EXPECT_NEAR(oracle::pairwise_distance_std(line), std::sqrt(2.0) / 3.0, 1e-15);
}

TEST(Sigma, ZeroSpreadFallsBackToOne) {
  const SigmaEstimate two = sigma_from_train(Matrix(2, 2, 0.0));
  EXPECT_TRUE(two.fallback);
  EXPECT_EQ(two.sigma, 1.0);
}

TEST(Ensemble, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = oracle::random_instance(rng);
    const FuzzyKnnEnsemble model(to_feature_set(in), in.k);
    const auto got = model.predict(as_sample(in.x), in.r);
    const auto want = oracle::fuzzy_knn(in.train, in.labels, in.m, library_sigmas(model), in.x, in.r, in.k);
    for (std::size_t l = 0; l < in.train.size(); ++l)
      ASSERT_NEAR(model.sigmas()[l].sigma, oracle::pairwise_distance_std(in.train[l]), 1e-12);
    ASSERT_EQ(got.fallback, want.fallback);
    for (int j = 0; j < in.m; ++j) ASSERT_NEAR(got.d[j], want.d[j], 1e-12) << "trial " << trial;
  }
}

TEST(Ensemble, UnitMembershipEqualsSimilarityWeightedKnn) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 30; ++trial) {
    const auto in = oracle::random_instance(rng);
    const FuzzyKnnEnsemble model(to_feature_set(in), in.k);
    const std::vector<double> ones(in.train.size(), 1.0);
    const auto got = model.predict(as_sample(in.x), ones);
    const auto want = oracle::similarity_weighted_knn(in.train, in.labels, in.m, library_sigmas(model), in.x, in.k);
    EXPECT_EQ(got.label(), want.label());
    for (int j = 0; j < in.m; ++j) EXPECT_NEAR(got.d[j], want.d[j], 1e-12);
  }
}

TEST(Ensemble, ZeroMembershipEqualsChannelDeletion) {
  std::mt19937_64 rng(79);
  int checked = 0;
  while (checked < 30) {
    auto in = oracle::random_instance(rng);
    if (in.train.size() < 2) continue;
    ++checked;
    const FuzzyKnnEnsemble full(to_feature_set(in), in.k);
    auto r = in.r;
    r[0] = 0.0;
    const auto silenced = full.predict(as_sample(in.x), r);

    oracle::Instance dropped = in;
    dropped.train.erase(dropped.train.begin());
    dropped.x.erase(dropped.x.begin());
    dropped.r.erase(dropped.r.begin());
    const FuzzyKnnEnsemble reduced(to_feature_set(dropped), in.k);
    const auto deleted = reduced.predict(as_sample(dropped.x), dropped.r);
    for (int j = 0; j < in.m; ++j) EXPECT_NEAR(silenced.d[j], deleted.d[j], 1e-12);
  }
}

TEST(Ensemble, CommonMembershipScaleLeavesSupportsUnchanged) {
  std::mt19937_64 rng(80);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = oracle::random_instance(rng);
    const FuzzyKnnEnsemble model(to_feature_set(in), in.k);
    auto scaled = in.r;
    for (double& v : scaled) v *= 0.37;
    const auto a = model.predict(as_sample(in.x), in.r);
    const auto b = model.predict(as_sample(in.x), scaled);
    for (int j = 0; j < in.m; ++j) EXPECT_NEAR(a.d[j], b.d[j], 1e-12);
  }
}

TEST(Ensemble, FarQueryDoesNotUnderflowToFallback) {
  oracle::Instance in;
  in.m = 2;
  in.k = 2;
  in.labels = {1, 1, 2, 2};
  in.train = {{{0.0}, {0.1}, {1.0}, {1.1}}};
  in.x = {{60.0}};
  in.r = {1.0};
  const FuzzyKnnEnsemble model(to_feature_set(in), in.k);
  const auto s = model.predict(as_sample(in.x), in.r);
  EXPECT_FALSE(s.fallback);
  EXPECT_EQ(s.label(), 2);
}

TEST(Ensemble, InvalidConfigurations) {
  std::mt19937_64 rng(81);
  const auto in = oracle::random_instance(rng);
  EXPECT_THROW(FuzzyKnnEnsemble(to_feature_set(in), 0), ConfigError);
  EXPECT_THROW(FuzzyKnnEnsemble(to_feature_set(in), in.labels.size() + 1), ConfigError);
  const FuzzyKnnEnsemble model(to_feature_set(in), 1);
  auto x = in.x;
  x[0].push_back(0.0);
  EXPECT_THROW(model.predict(as_sample(x), in.r), DataError);
}

TEST(TuneK, SingletonGridAndDeterminism) {
  std::mt19937_64 rng(82);
  oracle::Instance in = oracle::random_instance(rng, 2, 3, 20, 1);
  while (in.labels.size() < 16) in = oracle::random_instance(rng, 2, 3, 20, 1);
  const FeatureSet fs = to_feature_set(in);
  const std::vector<std::size_t> one{1};
  EXPECT_EQ(tune_k(fs, KnnFamily::fuzzy_ensemble, one, 4, 3).k, 1U);
  const std::vector<std::size_t> grid{1, 3, 5};
  for (KnnFamily family : {KnnFamily::fuzzy_ensemble, KnnFamily::weighted_knn}) {
    const KTuning a = tune_k(fs, family, grid, 4, 3);
    const KTuning b = tune_k(fs, family, grid, 4, 3);
    EXPECT_EQ(a.k, b.k);
    EXPECT_EQ(a.mean_bac, b.mean_bac);
    ASSERT_EQ(a.mean_bac.size(), 3U);
    const auto best = std::max_element(a.mean_bac.begin(), a.mean_bac.end());
    EXPECT_EQ(a.k, grid[static_cast<std::size_t>(best - a.mean_bac.begin())]);
  }
  EXPECT_EQ(default_k_grid(), (std::vector<std::size_t>{1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23}));
}
