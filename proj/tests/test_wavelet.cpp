#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "myofuzz/error.hpp"
#include "myofuzz/wavelet.hpp"

using namespace myofuzz;
using namespace myofuzz::wavelet;

namespace {

std::vector<double> probe_signal(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    x[i] = std::sin(0.37 * t) + 0.2 * t / 64.0 - 0.5 * std::cos(1.3 * t);
  }
  return x;
}

double energy(std::span<const double> v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); }

// Coefficients at indices 0, 1, len/2 and len-1 from an independent
// reference implementation (PyWavelets 1.x, wavedec with db6).
struct Probe {
  std::size_t length;
  double at[4];
};

void expect_probe(const std::vector<double>& c, const Probe& p) {
  ASSERT_EQ(c.size(), p.length);
  const std::size_t idx[4] = {0, 1, p.length / 2, p.length - 1};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(c[idx[i]], p.at[i], 1e-10) << "index " << idx[i];
}

}  // namespace

TEST(Db6, FilterSumsAndOrthonormality) {
  const auto& bank = db6();
  const double lo = std::accumulate(bank.dec_lo.begin(), bank.dec_lo.end(), 0.0);
  const double hi = std::accumulate(bank.dec_hi.begin(), bank.dec_hi.end(), 0.0);
  EXPECT_NEAR(lo, std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(hi, 0.0, 1e-10);
  EXPECT_NEAR(energy(bank.dec_lo), 1.0, 1e-10);
  EXPECT_NEAR(energy(bank.dec_hi), 1.0, 1e-10);
  EXPECT_NEAR(std::inner_product(bank.dec_lo.begin(), bank.dec_lo.end(), bank.dec_hi.begin(), 0.0), 0.0, 1e-12);
}

TEST(Dwt, SymmetricModeMatchesReferenceValues) {
  const auto c = dwt_decompose(probe_signal(100), WaveletSpec{3, Extension::symmetric});
  ASSERT_EQ(c.size(), 4U);
  expect_probe(c[0], {55, {0.22331398316452306, -0.12051984985115809, 0.29400992306373147, 0.29380311416513}});
  expect_probe(c[1], {33, {0.26795725669283266, 0.542506483803852, 0.7536832719838293, -0.6050178910097981}});
  expect_probe(c[2],
               {22, {-0.3372374046644718, 0.17879440570625402, -0.5125197561916326, -1.2473908655572756}});
  expect_probe(c[3], {22, {1.2653722419589137, 1.7989750158699203, -1.9775738666425542, -2.0128108185875804}});
}

TEST(Dwt, PeriodicModeMatchesReferenceValues) {
  const auto c = dwt_decompose(probe_signal(128), WaveletSpec{3, Extension::periodic});
  ASSERT_EQ(c.size(), 4U);
  expect_probe(c[0], {64, {0.2627302345297794, -0.09745967438786429, 0.20425263921516074, -0.3851481223952912}});
  expect_probe(c[1], {32, {0.569388642859973, 0.27414353688884824, 0.31316860340671776, 0.9252377961513503}});
  expect_probe(c[2],
               {16, {-1.1278920032435613, 1.3734063399747518, -1.0249727814118679, 0.31111826328036774}});
  expect_probe(c[3], {16, {2.9216849299864998, -0.5567423505013822, 1.4726196872388686, -1.3424813459225169}});
}

TEST(Dwt, SymmetricLengthsFollowRecursion) {
  const auto c = dwt_decompose(std::vector<double>(500, 1.0), WaveletSpec{});
  ASSERT_EQ(c.size(), 4U);
  EXPECT_EQ(c[0].size(), 255U);
  EXPECT_EQ(c[1].size(), 133U);
  EXPECT_EQ(c[2].size(), 72U);
  EXPECT_EQ(c[3].size(), 72U);
}

TEST(Dwt, ZeroSignalGivesZeroCoefficients) {
  for (const auto& band : dwt_decompose(std::vector<double>(512, 0.0), WaveletSpec{}))
    for (double v : band) EXPECT_EQ(v, 0.0);
}

TEST(Dwt, TooShortSignalIsDataError) {
  EXPECT_EQ(min_signal_length(WaveletSpec{}), 96U);
  EXPECT_THROW(dwt_decompose(std::vector<double>(95, 1.0), WaveletSpec{}), DataError);
  EXPECT_NO_THROW(dwt_decompose(std::vector<double>(96, 1.0), WaveletSpec{}));
  EXPECT_THROW(dwt_decompose(std::vector<double>(100, 1.0), WaveletSpec{3, Extension::periodic}), DataError);
}

TEST(Dwt, ReconstructionAndParsevalOnRandomSignals) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(1024);
    for (double& v : x) v = normal(rng);
    const double norm = std::sqrt(energy(x));
    for (Extension ext : {Extension::symmetric, Extension::periodic}) {
      const WaveletSpec spec{3, ext};
      const auto c = dwt_decompose(x, spec);
      const auto y = dwt_reconstruct(c, x.size(), spec);
      ASSERT_EQ(y.size(), x.size());
      double err = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) err += (y[i] - x[i]) * (y[i] - x[i]);
      EXPECT_LT(std::sqrt(err) / norm, 1e-8);
      if (ext == Extension::periodic) {
        double total = 0.0;
        for (const auto& band : c) total += energy(band);
        EXPECT_NEAR(total / (norm * norm), 1.0, 1e-6);
      }
    }
  }
}
