#include "myofuzz/simd.hpp"

#include <cmath>

namespace myofuzz::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

double sum_abs_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

void squared_distances_scalar(const double* q, const double* rows, std::size_t n_rows,
                              std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* y = rows + r * dim;
    double s = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      const double diff = y[a] - q[a];
      s += diff * diff;
    }
    out[r] = s;
  }
}

void weighted_squared_distances_scalar(const double* q, const double* rows, const double* w,
                                       std::size_t n_rows, std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* y = rows + r * dim;
    double s = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      const double diff = y[a] - q[a];
      s += w[a] * diff * diff;
    }
    out[r] = s;
  }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static constexpr KernelTable table{dot_scalar, sum_squares_scalar, sum_abs_scalar,
                                     squared_distances_scalar,
                                     weighted_squared_distances_scalar};
  return table;
}

}  // namespace myofuzz::simd
