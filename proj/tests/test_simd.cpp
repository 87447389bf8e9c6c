#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "myofuzz/error.hpp"
#include "myofuzz/simd.hpp"

using namespace myofuzz;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

double tolerance(double reference, std::size_t n) {
  return 1e-13 * (1.0 + std::abs(reference)) * static_cast<double>(n + 1);
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (simd::avx2_kernels() == nullptr || !simd::isa_supported(simd::Isa::avx2))
      GTEST_SKIP() << "AVX2 variant not available on this build or CPU";
  }
  const simd::KernelTable& ref = simd::scalar_kernels();
  const simd::KernelTable& vec = *simd::avx2_kernels();
};

}  // namespace

TEST_F(SimdEquivalence, ReductionsMatchScalarForAllTailLengths) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto a = random_vector(rng, n);
    const auto b = random_vector(rng, n);
    const double dot = ref.dot(a.data(), b.data(), n);
    EXPECT_NEAR(vec.dot(a.data(), b.data(), n), dot, tolerance(dot, n)) << "n=" << n;
    const double sq = ref.sum_squares(a.data(), n);
    EXPECT_NEAR(vec.sum_squares(a.data(), n), sq, tolerance(sq, n)) << "n=" << n;
    const double ab = ref.sum_abs(a.data(), n);
    EXPECT_NEAR(vec.sum_abs(a.data(), n), ab, tolerance(ab, n)) << "n=" << n;
  }
}

TEST_F(SimdEquivalence, DistanceRowsMatchScalar) {
  std::mt19937_64 rng(12);
  for (std::size_t dim : {1U, 3U, 4U, 7U, 8U, 9U, 16U, 64U, 65U}) {
    const std::size_t rows = 13;
    const auto q = random_vector(rng, dim);
    const auto m = random_vector(rng, rows * dim);
    auto w = random_vector(rng, dim);
    for (double& x : w) x = std::abs(x);
    std::vector<double> out_ref(rows), out_vec(rows), wref(rows), wvec(rows);
    ref.squared_distances(q.data(), m.data(), rows, dim, out_ref.data());
    vec.squared_distances(q.data(), m.data(), rows, dim, out_vec.data());
    ref.weighted_squared_distances(q.data(), m.data(), w.data(), rows, dim, wref.data());
    vec.weighted_squared_distances(q.data(), m.data(), w.data(), rows, dim, wvec.data());
    for (std::size_t i = 0; i < rows; ++i) {
      EXPECT_NEAR(out_vec[i], out_ref[i], tolerance(out_ref[i], dim)) << "dim=" << dim;
      EXPECT_NEAR(wvec[i], wref[i], tolerance(wref[i], dim)) << "dim=" << dim;
    }
  }
}

TEST(Simd, ScalarKernelsAgreeWithDefinitions) {
  const std::vector<double> a{1.0, -2.0, 3.0};
  const std::vector<double> b{4.0, 5.0, -6.0};
  const auto& k = simd::scalar_kernels();
  EXPECT_DOUBLE_EQ(k.dot(a.data(), b.data(), 3), 4.0 - 10.0 - 18.0);
  EXPECT_DOUBLE_EQ(k.sum_squares(a.data(), 3), 14.0);
  EXPECT_DOUBLE_EQ(k.sum_abs(a.data(), 3), 6.0);
  double d = 0.0;
  k.squared_distances(a.data(), b.data(), 1, 3, &d);
  EXPECT_DOUBLE_EQ(d, 9.0 + 49.0 + 81.0);
  const std::vector<double> w{1.0, 0.0, 2.0};
  k.weighted_squared_distances(a.data(), b.data(), w.data(), 1, 3, &d);
  EXPECT_DOUBLE_EQ(d, 9.0 + 162.0);
}

TEST(Simd, SwitchingIsaIsObservableAndReversible) {
  const simd::Isa before = simd::active_isa();
  simd::set_isa(simd::Isa::scalar);
  EXPECT_EQ(simd::active_isa(), simd::Isa::scalar);
  EXPECT_EQ(&simd::kernels(), &simd::scalar_kernels());
  if (simd::isa_supported(simd::Isa::avx2)) {
    simd::set_isa(simd::Isa::avx2);
    EXPECT_EQ(simd::active_isa(), simd::Isa::avx2);
  } else {
    EXPECT_THROW(simd::set_isa(simd::Isa::avx2), ConfigError);
  }
  simd::set_isa(before);
}

TEST(Simd, SpanWrappersRejectShapeMismatch) {
  const std::vector<double> a(3), b(4);
  EXPECT_THROW(simd::dot(a, b), ContractError);
  std::vector<double> out(2);
  EXPECT_THROW(simd::squared_distances(a, b, 3, out), ContractError);
}
