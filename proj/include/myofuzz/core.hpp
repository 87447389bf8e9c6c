#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "myofuzz/matrix.hpp"

namespace myofuzz {

// One continuous multichannel recording: rows are time samples, columns are
// channels. Labels are 1-based class numbers.
struct Recording {
  Matrix samples;
  double sampling_rate_hz = 0.0;
  std::string subject_id;
  std::optional<int> class_label;

  std::size_t num_samples() const noexcept { return samples.rows(); }
  std::size_t num_channels() const noexcept { return samples.cols(); }
  std::vector<double> channel(std::size_t c) const;

  // Throws DataError when the invariants (>=1 sample and channel, positive
  // rate, finite values) do not hold.
  void validate() const;
};

enum class NoiseKind { powerline, attenuation, gaussian, clipping, baseline };

inline constexpr NoiseKind kAllNoiseKinds[] = {NoiseKind::powerline, NoiseKind::attenuation,
                                               NoiseKind::gaussian, NoiseKind::clipping,
                                               NoiseKind::baseline};

std::string_view to_string(NoiseKind kind) noexcept;
NoiseKind parse_noise_kind(std::string_view name);

// Ground truth for one channel of a segment after injection.
struct ChannelContamination {
  bool contaminated = false;
  NoiseKind kind = NoiseKind::gaussian;
  double target_snr_db = 0.0;
  double achieved_snr_db = 0.0;
  // False when clipping could not reach the target distortion power.
  bool reachable = true;
};

struct Segment {
  std::vector<std::vector<double>> channels;
  int label = 0;
  std::optional<std::vector<ChannelContamination>> contamination;

  std::size_t num_channels() const noexcept { return channels.size(); }
  std::size_t length() const noexcept { return channels.empty() ? 0 : channels.front().size(); }
  std::size_t contaminated_count() const noexcept;
};

struct SegmentDataset {
  std::vector<Segment> segments;
  int num_classes = 0;
  std::size_t num_channels = 0;
  double sampling_rate_hz = 0.0;
  std::string subject_id;

  std::size_t size() const noexcept { return segments.size(); }
  std::vector<int> labels() const;
  // Throws DataError on label range, channel count, or empty-class violations.
  void validate() const;
};

// Key-value file `manifest.txt` sitting next to the class/trial CSV files.
struct DatasetManifest {
  double sampling_rate_hz = 0.0;
  std::size_t num_channels = 8;
  double window_ms = 500.0;

  static DatasetManifest read(const std::filesystem::path& file);
  void write(const std::filesystem::path& file) const;
};

inline constexpr std::string_view kManifestFileName = "manifest.txt";

// round(window_ms * fs / 1000)
std::size_t window_samples(double window_ms, double sampling_rate_hz);

// Non-overlapping windows; the trailing remainder is dropped.
std::vector<Segment> segment(const Recording& recording, double window_ms);

// Reads `<class>_<trial>.csv` files under `root` using `root/manifest.txt`.
SegmentDataset load_dataset(const std::filesystem::path& root);
SegmentDataset load_dataset(const std::filesystem::path& root, const DatasetManifest& manifest);

// Writes one `<class>_<trial>.csv` per segment plus manifest.txt and
// index.csv, in the layout load_dataset reads back unchanged.
void write_dataset(const SegmentDataset& ds, const std::filesystem::path& dir);

// Parses a numeric CSV matrix (rows = samples). Errors name file and line.
Matrix read_csv_matrix(const std::filesystem::path& file);
void write_csv_matrix(const Matrix& m, const std::filesystem::path& file);

struct SyntheticSpec {
  int num_classes = 4;
  std::size_t num_channels = 8;
  std::size_t segments_per_class = 40;
  std::size_t segment_length = 500;
  double sampling_rate_hz = 1000.0;
  // num_classes rows x num_channels columns; empty means default_band_centers().
  std::vector<std::vector<double>> class_band_centers_hz;
  double amplitude_jitter = 0.4;
  // Each channel is a sum of `partials` sinusoids with random phases whose
  // frequencies are drawn uniformly within +-bandwidth (relative) of the
  // band centre, plus white texture of the given relative level.
  std::size_t partials = 8;
  double bandwidth = 0.8;
  double texture = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Class j / channel l gets the centre of wavelet band (j + l) mod 4 of a
// three-level decomposition. With the default bandwidth and texture the
// classes overlap on every single channel, so channels must be combined.
std::vector<std::vector<double>> default_band_centers(int num_classes, std::size_t num_channels,
                                                      double sampling_rate_hz);

SegmentDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace myofuzz
