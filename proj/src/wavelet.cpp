#include "myofuzz/wavelet.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "myofuzz/error.hpp"
#include "myofuzz/simd.hpp"

namespace myofuzz::wavelet {

const std::array<double, kDb6Taps> kDb6Scaling = {
    0.11154074335010947,   0.49462389039845306,   0.7511339080210954,    0.31525035170919763,
    -0.22626469396543983,  -0.12976686756726194,  0.09750160558732304,   0.027522865530305727,
    -0.03158203931748603,  0.0005538422011614961, 0.004777257510945511,  -0.0010773010853084796,
};

const FilterBank& db6() {
  static const FilterBank bank = [] {
    FilterBank b{};
    constexpr std::size_t F = kDb6Taps;
    for (std::size_t j = 0; j < F; ++j) b.dec_lo[j] = kDb6Scaling[F - 1 - j];
    // Quadrature mirror of the analysis low-pass.
    for (std::size_t j = 0; j < F; ++j) b.dec_hi[j] = (j % 2 == 0 ? -1.0 : 1.0) * b.dec_lo[F - 1 - j];
    return b;
  }();
  return bank;
}

namespace {

constexpr std::ptrdiff_t kTaps = static_cast<std::ptrdiff_t>(kDb6Taps);

// Half-sample symmetric reflection into [0, n).
std::size_t reflect(std::ptrdiff_t k, std::ptrdiff_t n) {
  while (k < 0 || k >= n) {
    if (k < 0) k = -k - 1;
    if (k >= n) k = 2 * n - 1 - k;
  }
  return static_cast<std::size_t>(k);
}

std::size_t wrap(std::ptrdiff_t k, std::ptrdiff_t n) {
  const std::ptrdiff_t r = k % n;
  return static_cast<std::size_t>(r < 0 ? r + n : r);
}

std::size_t band_length(std::size_t n, Extension ext) {
  return ext == Extension::symmetric ? (n + kDb6Taps - 1) / 2 : n / 2;
}

// Offset o in a[i] = sum_j rev[j] * x~(2i + o + j).
std::ptrdiff_t analysis_offset(Extension ext) {
  return ext == Extension::symmetric ? 2 - kTaps : 1 - kTaps / 2;
}

}  // namespace

std::size_t min_signal_length(const WaveletSpec& spec) {
  return kDb6Taps * (std::size_t{1} << spec.levels);
}

void dwt_step(std::span<const double> x, Extension ext, std::vector<double>& approx,
              std::vector<double>& detail) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (n < 2) throw DataError("dwt_step: signal too short");
  const FilterBank& bank = db6();
  std::array<double, kDb6Taps> rev_lo{};
  std::array<double, kDb6Taps> rev_hi{};
  std::reverse_copy(bank.dec_lo.begin(), bank.dec_lo.end(), rev_lo.begin());
  std::reverse_copy(bank.dec_hi.begin(), bank.dec_hi.end(), rev_hi.begin());

  const std::size_t out_len = band_length(x.size(), ext);
  const std::ptrdiff_t offset = analysis_offset(ext);
  std::vector<double> buf(2 * (out_len - 1) + kDb6Taps);
  for (std::size_t m = 0; m < buf.size(); ++m) {
    const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(m) + offset;
    buf[m] = x[ext == Extension::symmetric ? reflect(k, n) : wrap(k, n)];
  }
  approx.resize(out_len);
  detail.resize(out_len);
  const std::span<const double> window(buf);
  for (std::size_t i = 0; i < out_len; ++i) {
    const auto w = window.subspan(2 * i, kDb6Taps);
    approx[i] = simd::dot(rev_lo, w);
    detail[i] = simd::dot(rev_hi, w);
  }
}

std::vector<std::vector<double>> dwt_decompose(std::span<const double> x, const WaveletSpec& spec) {
  if (spec.levels < 1) throw ConfigError("wavelet decomposition needs at least one level");
  if (x.size() < min_signal_length(spec))
    throw DataError(fmt::format("signal of {} samples is too short for a {}-level db6 decomposition (needs {})",
                                x.size(), spec.levels, min_signal_length(spec)));
  if (spec.extension == Extension::periodic && x.size() % (std::size_t{1} << spec.levels) != 0)
    throw DataError("periodic decomposition needs a length divisible by 2^levels");
  std::vector<std::vector<double>> out;
  std::vector<double> current(x.begin(), x.end());
  for (int level = 0; level < spec.levels; ++level) {
    std::vector<double> approx;
    std::vector<double> detail;
    dwt_step(current, spec.extension, approx, detail);
    out.push_back(std::move(detail));
    current = std::move(approx);
  }
  out.push_back(std::move(current));
  return out;
}

namespace {

std::vector<double> idwt_step(std::span<const double> approx, std::span<const double> detail,
                              std::size_t length, Extension ext) {
  const FilterBank& bank = db6();
  const auto n = static_cast<std::ptrdiff_t>(length);
  std::vector<double> x(length, 0.0);
  if (ext == Extension::symmetric) {
    // Transpose of the analysis rows restricted to the original support.
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < approx.size(); ++i) {
        const std::ptrdiff_t j = 2 * static_cast<std::ptrdiff_t>(i) + 1 - k;
        if (j < 0 || j >= kTaps) continue;
        s += approx[i] * bank.dec_lo[static_cast<std::size_t>(j)] +
             detail[i] * bank.dec_hi[static_cast<std::size_t>(j)];
      }
      x[static_cast<std::size_t>(k)] = s;
    }
  } else {
    const std::ptrdiff_t shift = analysis_offset(ext) + kTaps - 1;
    for (std::size_t i = 0; i < approx.size(); ++i)
      for (std::ptrdiff_t j = 0; j < kTaps; ++j) {
        const std::size_t m = wrap(2 * static_cast<std::ptrdiff_t>(i) + shift - j, n);
        x[m] += approx[i] * bank.dec_lo[static_cast<std::size_t>(j)] +
                detail[i] * bank.dec_hi[static_cast<std::size_t>(j)];
      }
  }
  return x;
}

}  // namespace

std::vector<double> dwt_reconstruct(const std::vector<std::vector<double>>& coeffs, std::size_t length,
                                    const WaveletSpec& spec) {
  if (coeffs.size() != static_cast<std::size_t>(spec.levels) + 1)
    throw ContractError("dwt_reconstruct: expected levels + 1 coefficient bands");
  // Lengths of the intermediate approximations, finest first.
  std::vector<std::size_t> lengths{length};
  for (int level = 1; level < spec.levels; ++level)
    lengths.push_back(band_length(lengths.back(), spec.extension));
  std::vector<double> approx = coeffs.back();
  for (int level = spec.levels - 1; level >= 0; --level)
    approx = idwt_step(approx, coeffs[static_cast<std::size_t>(level)], lengths[static_cast<std::size_t>(level)],
                       spec.extension);
  return approx;
}

}  // namespace myofuzz::wavelet
