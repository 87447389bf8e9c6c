#include "myofuzz/contam.hpp"

#include <fmt/format.h>
#include <fmt/os.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "myofuzz/error.hpp"
#include "myofuzz/seed.hpp"
#include "myofuzz/simd.hpp"

namespace myofuzz::contam {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(std::span<const double> x, const char* who) {
  if (x.empty()) throw DataError(fmt::format("{}: empty signal", who));
  for (double v : x)
    if (!std::isfinite(v)) throw DataError(fmt::format("{}: non-finite sample", who));
}

// x + a * w with a chosen so that mean(a*w)^2 == target power.
std::vector<double> add_scaled(std::span<const double> x, const std::vector<double>& w,
                               double target_power, const char* who) {
  std::vector<double> out(x.begin(), x.end());
  if (target_power == 0.0) return out;
  const double pw = mean_power(w);
  if (!(pw > 0.0)) throw NumericalError(fmt::format("{}: noise waveform has zero power", who));
  const double a = std::sqrt(target_power / pw);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * w[i];
  return out;
}

std::vector<double> sinusoid(std::size_t n, double lo_hz, double hi_hz, double fs_hz, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double f = std::uniform_real_distribution<double>(lo_hz, hi_hz)(rng);
  const double phi = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
  std::vector<double> w(n);
  for (std::size_t t = 0; t < n; ++t) w[t] = std::sin(kTwoPi * f * static_cast<double>(t) / fs_hz + phi);
  return w;
}

double clip_distortion(std::span<const double> x, double c) {
  double s = 0.0;
  for (double v : x) {
    const double excess = std::fabs(v) - c;
    if (excess > 0.0) s += excess * excess;
  }
  return s / static_cast<double>(x.size());
}

}  // namespace

std::vector<double> default_snr_grid() { return {0, 1, 2, 3, 4, 5, 6, 10, 12}; }

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return simd::sum_squares(x) / static_cast<double>(x.size());
}

double noise_power_for_snr(std::span<const double> signal, double snr_db) {
  require_finite(signal, "noise_power_for_snr");
  if (std::isnan(snr_db)) throw ConfigError("SNR must not be NaN");
  const double ps = mean_power(signal);
  if (!(ps > 0.0)) throw DataError("signal has zero power; SNR is undefined");
  return ps / std::pow(10.0, snr_db / 10.0);
}

double achieved_snr_db(std::span<const double> clean, std::span<const double> distorted) {
  if (clean.size() != distorted.size()) throw ContractError("achieved_snr_db: length mismatch");
  std::vector<double> diff(clean.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = distorted[i] - clean[i];
  const double pn = mean_power(diff);
  if (pn == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(mean_power(clean) / pn);
}

std::vector<double> inject_powerline(std::span<const double> x, double snr_db, double fs_hz,
                                     std::uint64_t seed) {
  if (!(fs_hz > 2.0 * kPowerlineMaxHz))
    throw ConfigError(fmt::format("sampling rate {} Hz aliases powerline noise (needs > {} Hz)", fs_hz,
                                  2.0 * kPowerlineMaxHz));
  const double pn = noise_power_for_snr(x, snr_db);
  return add_scaled(x, sinusoid(x.size(), kPowerlineMinHz, kPowerlineMaxHz, fs_hz, seed), pn,
                    "inject_powerline");
}

std::vector<double> inject_baseline(std::span<const double> x, double snr_db, double fs_hz,
                                    std::uint64_t seed) {
  if (!(fs_hz > 2.0 * kBaselineMaxHz))
    throw ConfigError(fmt::format("sampling rate {} Hz aliases baseline wander (needs > {} Hz)", fs_hz,
                                  2.0 * kBaselineMaxHz));
  const double pn = noise_power_for_snr(x, snr_db);
  return add_scaled(x, sinusoid(x.size(), kBaselineMinHz, kBaselineMaxHz, fs_hz, seed), pn,
                    "inject_baseline");
}

std::vector<double> inject_gaussian(std::span<const double> x, double snr_db, std::uint64_t seed) {
  const double pn = noise_power_for_snr(x, snr_db);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(x.size());
  for (double& v : w) v = normal(rng);
  return add_scaled(x, w, pn, "inject_gaussian");
}

std::vector<double> inject_attenuation(std::span<const double> x, double snr_db) {
  require_finite(x, "inject_attenuation");
  if (std::isnan(snr_db)) throw ConfigError("SNR must not be NaN");
  const double gain = 1.0 - std::pow(10.0, -snr_db / 20.0);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = gain * x[i];
  return out;
}

ClipResult inject_clipping(std::span<const double> x, double snr_db) {
  require_finite(x, "inject_clipping");
  const auto [lo_it, hi_it] = std::ranges::minmax_element(x);
  if (*lo_it == *hi_it) throw DataError("inject_clipping: constant signal cannot be clipped meaningfully");
  const double target = noise_power_for_snr(x, snr_db);
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::fabs(v));

  ClipResult r;
  if (target == 0.0) {
    r.threshold = peak;
  } else if (target >= mean_power(x)) {
    // Clamping at zero removes the whole signal; more distortion is impossible.
    r.threshold = 0.0;
    r.reachable = target == mean_power(x);
  } else {
    // distortion(c) decreases monotonically from P(x) at c = 0 to 0 at c = peak.
    double lo = 0.0;
    double hi = peak;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * peak; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (clip_distortion(x, mid) > target)
        lo = mid;
      else
        hi = mid;
    }
    r.threshold = 0.5 * (lo + hi);
  }
  r.signal.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r.signal[i] = std::clamp(x[i], -r.threshold, r.threshold);
  if (r.reachable && target > 0.0) {
    const double got = 10.0 * std::log10(mean_power(x) / clip_distortion(x, r.threshold));
    if (std::fabs(got - snr_db) > 0.1) r.reachable = false;
  }
  return r;
}

InjectionResult inject(NoiseKind kind, std::span<const double> x, double snr_db, double fs_hz,
                       std::uint64_t seed) {
  InjectionResult out;
  switch (kind) {
    case NoiseKind::powerline: out.signal = inject_powerline(x, snr_db, fs_hz, seed); break;
    case NoiseKind::gaussian: out.signal = inject_gaussian(x, snr_db, seed); break;
    case NoiseKind::baseline: out.signal = inject_baseline(x, snr_db, fs_hz, seed); break;
    case NoiseKind::attenuation: out.signal = inject_attenuation(x, snr_db); break;
    case NoiseKind::clipping: {
      auto clipped = inject_clipping(x, snr_db);
      out.signal = std::move(clipped.signal);
      out.reachable = clipped.reachable;
      break;
    }
  }
  out.achieved_snr_db = achieved_snr_db(x, out.signal);
  return out;
}

std::uint64_t segment_seed(std::uint64_t plan_seed, std::uint64_t segment_id) {
  return derive_seed(plan_seed, {stream::contamination, segment_id});
}

SegmentDraw draw_segment(std::uint64_t seed, std::size_t num_channels, std::span<const NoiseKind> kinds) {
  if (num_channels < 2) throw ConfigError("contamination needs at least 2 channels");
  if (kinds.empty()) throw ConfigError("contamination needs at least one noise kind");
  std::mt19937_64 rng(seed);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, num_channels - 1)(rng);
  std::vector<std::size_t> order(num_channels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, num_channels - 1)(rng);
    std::swap(order[i], order[j]);
  }
  SegmentDraw draw;
  draw.channels.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::ranges::sort(draw.channels);
  std::uniform_int_distribution<std::size_t> pick(0, kinds.size() - 1);
  for (std::size_t i = 0; i < k; ++i) draw.kinds.push_back(kinds[pick(rng)]);
  return draw;
}

Segment contaminate_segment(const Segment& seg, std::uint64_t segment_id, const ContaminationPlan& plan,
                            double fs_hz) {
  const std::uint64_t seed = segment_seed(plan.seed, segment_id);
  const SegmentDraw draw = draw_segment(seed, seg.num_channels(), plan.kinds);
  Segment out = seg;
  std::vector<ChannelContamination> mask(seg.num_channels());
  for (std::size_t i = 0; i < draw.channels.size(); ++i) {
    const std::size_t ch = draw.channels[i];
    const auto res = inject(draw.kinds[i], seg.channels[ch], plan.snr_db, fs_hz, derive_seed(seed, {ch}));
    out.channels[ch] = res.signal;
    mask[ch] = {true, draw.kinds[i], plan.snr_db, res.achieved_snr_db, res.reachable};
  }
  out.contamination = std::move(mask);
  return out;
}

SegmentDataset contaminate_dataset(const SegmentDataset& ds, const ContaminationPlan& plan) {
  if (ds.num_channels < 2)
    throw ConfigError("contaminate_dataset needs at least 2 channels so one stays clean");
  if (std::ranges::find(plan.snr_grid, plan.snr_db) == plan.snr_grid.end())
    spdlog::warn("SNR {} dB is not on the configured grid", plan.snr_db);
  SegmentDataset out;
  out.num_classes = ds.num_classes;
  out.num_channels = ds.num_channels;
  out.sampling_rate_hz = ds.sampling_rate_hz;
  out.subject_id = ds.subject_id;
  out.segments.reserve(ds.segments.size());
  for (std::size_t i = 0; i < ds.segments.size(); ++i)
    out.segments.push_back(contaminate_segment(ds.segments[i], i, plan, ds.sampling_rate_hz));
  return out;
}

void write_mask_sidecar(const SegmentDataset& ds, const std::filesystem::path& file) {
  auto out = fmt::output_file(file.string());
  out.print("segment_id,channel,noise_kind,target_snr_db,achieved_snr_db\n");
  for (std::size_t i = 0; i < ds.segments.size(); ++i) {
    const auto& mask = ds.segments[i].contamination;
    if (!mask) continue;
    for (std::size_t c = 0; c < mask->size(); ++c) {
      const auto& m = (*mask)[c];
      if (!m.contaminated) continue;
      out.print("{},{},{},{},{:.6f}\n", i, c, to_string(m.kind), m.target_snr_db, m.achieved_snr_db);
    }
  }
}

}  // namespace myofuzz::contam
