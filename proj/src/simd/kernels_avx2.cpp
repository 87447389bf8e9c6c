// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "myofuzz/simd.hpp"

#include <immintrin.h>

#include <cmath>

namespace myofuzz::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

double sum_abs_avx2(const double* x, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

inline double squared_distance_row(const double* q, const double* y, std::size_t dim) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t a = 0;
  for (; a + 4 <= dim; a += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(y + a), _mm256_loadu_pd(q + a));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; a < dim; ++a) {
    const double d = y[a] - q[a];
    s += d * d;
  }
  return s;
}

void squared_distances_avx2(const double* q, const double* rows, std::size_t n_rows,
                            std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = squared_distance_row(q, rows + r * dim, dim);
}

void weighted_squared_distances_avx2(const double* q, const double* rows, const double* w,
                                     std::size_t n_rows, std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* y = rows + r * dim;
    __m256d acc = _mm256_setzero_pd();
    std::size_t a = 0;
    for (; a + 4 <= dim; a += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(y + a), _mm256_loadu_pd(q + a));
      acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + a), d), d, acc);
    }
    double s = hsum(acc);
    for (; a < dim; ++a) {
      const double d = y[a] - q[a];
      s += w[a] * d * d;
    }
    out[r] = s;
  }
}

}  // namespace

const KernelTable* avx2_kernels() noexcept {
  static constexpr KernelTable table{dot_avx2, sum_squares_avx2, sum_abs_avx2,
                                     squared_distances_avx2, weighted_squared_distances_avx2};
  return &table;
}

}  // namespace myofuzz::simd
