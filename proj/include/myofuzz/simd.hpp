#pragma once

// Data-parallel inner loops shared by the feature, detector and neighbour code.
//
// Every kernel has a scalar reference implementation and, where the CPU
// supports it, an AVX2+FMA variant. The variant is chosen once at first use
// (override with MYOFUZZ_SIMD=scalar|avx2 or set_isa()). Variants agree to a
// few ulps, not bit-for-bit: lane-parallel accumulation reassociates sums.

#include <cstddef>
#include <span>
#include <string_view>

namespace myofuzz::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;
Isa active_isa() noexcept;
// Throws ConfigError if the ISA is not available on this CPU/build.
void set_isa(Isa isa);

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  double (*sum_abs)(const double* x, std::size_t n);
  // out[i] = ||rows[i] - q||^2, rows is n_rows x dim row-major.
  void (*squared_distances)(const double* q, const double* rows, std::size_t n_rows,
                            std::size_t dim, double* out);
  // out[i] = sum_a w[a] (rows[i][a] - q[a])^2
  void (*weighted_squared_distances)(const double* q, const double* rows, const double* w,
                                     std::size_t n_rows, std::size_t dim, double* out);
};

const KernelTable& scalar_kernels() noexcept;
// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels() noexcept;
const KernelTable& kernels() noexcept;

// Span conveniences over the active table.
double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> x);
double sum_abs(std::span<const double> x);
void squared_distances(std::span<const double> query, std::span<const double> rows,
                       std::size_t dim, std::span<double> out);
void weighted_squared_distances(std::span<const double> query, std::span<const double> rows,
                                std::span<const double> weights, std::size_t dim,
                                std::span<double> out);

}  // namespace myofuzz::simd
