#pragma once

// Daubechies-6 Mallat filter bank.
//
// Analysis convention (matches the common reference implementation):
//   a[i] = sum_j lo[j] * x~(2i + 1 - j),   d[i] = sum_j hi[j] * x~(2i + 1 - j)
// where x~ is x extended by half-sample symmetric reflection, giving
// floor((n + 11) / 2) coefficients per band. Periodic mode wraps instead and
// halves the length exactly; it is orthonormal, which makes energy checks exact.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace myofuzz::wavelet {

inline constexpr std::size_t kDb6Taps = 12;

// Scaling (reconstruction low-pass) filter h of db6; sums to sqrt(2).
extern const std::array<double, kDb6Taps> kDb6Scaling;

struct FilterBank {
  std::array<double, kDb6Taps> dec_lo;
  std::array<double, kDb6Taps> dec_hi;
};
const FilterBank& db6();

enum class Extension { symmetric, periodic };

struct WaveletSpec {
  int levels = 3;
  Extension extension = Extension::symmetric;
};

// filter length * 2^levels
std::size_t min_signal_length(const WaveletSpec& spec);

// Returns [D1, D2, ..., D_levels, A_levels]. Throws DataError when the
// signal is shorter than min_signal_length(), or, in periodic mode, when its
// length is not divisible by 2^levels.
std::vector<std::vector<double>> dwt_decompose(std::span<const double> x, const WaveletSpec& spec);

// Single analysis step.
void dwt_step(std::span<const double> x, Extension ext, std::vector<double>& approx,
              std::vector<double>& detail);

// Inverse cascade; `length` is the original signal length. Used to verify
// perfect reconstruction.
std::vector<double> dwt_reconstruct(const std::vector<std::vector<double>>& coeffs, std::size_t length,
                                    const WaveletSpec& spec);

}  // namespace myofuzz::wavelet
