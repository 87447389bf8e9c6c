#pragma once

// Controlled-SNR contamination of clean signals.
//
// SNR is defined per channel on the mean squared amplitude of the clean
// segment: P_noise = P_signal / 10^(snr_db / 10). Additive injectors scale
// their realised waveform to hit that power exactly; attenuation and clipping
// are placed on the same axis through their distortion power |y - x|^2.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "myofuzz/core.hpp"

namespace myofuzz::contam {

inline constexpr double kPowerlineMinHz = 48.0;
inline constexpr double kPowerlineMaxHz = 52.0;
inline constexpr double kBaselineMinHz = 0.5;
inline constexpr double kBaselineMaxHz = 1.5;

std::vector<double> default_snr_grid();  // {0,1,2,3,4,5,6,10,12}

double mean_power(std::span<const double> x);

// Throws DataError for an all-zero signal.
double noise_power_for_snr(std::span<const double> signal, double snr_db);

// 10 log10(P(clean) / P(distorted - clean)); +inf when nothing changed.
double achieved_snr_db(std::span<const double> clean, std::span<const double> distorted);

std::vector<double> inject_powerline(std::span<const double> x, double snr_db, double fs_hz,
                                     std::uint64_t seed);
std::vector<double> inject_gaussian(std::span<const double> x, double snr_db, std::uint64_t seed);
std::vector<double> inject_baseline(std::span<const double> x, double snr_db, double fs_hz,
                                    std::uint64_t seed);
// g * x with g = 1 - 10^(-snr_db / 20).
std::vector<double> inject_attenuation(std::span<const double> x, double snr_db);

struct ClipResult {
  std::vector<double> signal;
  double threshold = 0.0;
  // False when even a zero threshold cannot reach the target distortion.
  bool reachable = true;
};
// Symmetric clamp at +-c with c bisected to match the target distortion power.
ClipResult inject_clipping(std::span<const double> x, double snr_db);

struct InjectionResult {
  std::vector<double> signal;
  double achieved_snr_db = 0.0;
  bool reachable = true;
};
// Dispatches on kind; fs_hz is only used by the sinusoidal kinds.
InjectionResult inject(NoiseKind kind, std::span<const double> x, double snr_db, double fs_hz,
                       std::uint64_t seed);

struct ContaminationPlan {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  // Grid the SNR is expected to come from; off-grid values only warn.
  std::vector<double> snr_grid = default_snr_grid();
  std::vector<NoiseKind> kinds{std::begin(kAllNoiseKinds), std::end(kAllNoiseKinds)};
};

// Per-segment draw that does not depend on the SNR: channel subset and kinds.
struct SegmentDraw {
  std::vector<std::size_t> channels;  // ascending
  std::vector<NoiseKind> kinds;       // aligned with channels
};
SegmentDraw draw_segment(std::uint64_t segment_seed, std::size_t num_channels,
                         std::span<const NoiseKind> kinds);

// Seed for segment `segment_id` under master `plan_seed`.
std::uint64_t segment_seed(std::uint64_t plan_seed, std::uint64_t segment_id);

// Contaminates one segment. `segment_id` keys the random stream so that the
// result is independent of processing order.
Segment contaminate_segment(const Segment& seg, std::uint64_t segment_id, const ContaminationPlan& plan,
                            double fs_hz);

// Every segment gets 1..L-1 contaminated channels. Returns a new dataset whose
// segments carry their ground-truth masks; the input is untouched.
SegmentDataset contaminate_dataset(const SegmentDataset& ds, const ContaminationPlan& plan);

// Sidecar CSV: segment_id,channel,noise_kind,target_snr_db,achieved_snr_db,
// one row per contaminated channel.
void write_mask_sidecar(const SegmentDataset& ds, const std::filesystem::path& file);

}  // namespace myofuzz::contam
