#include "myofuzz/core.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "myofuzz/error.hpp"
#include "myofuzz/seed.hpp"

namespace myofuzz {

namespace fs = std::filesystem;

std::vector<double> Recording::channel(std::size_t c) const {
  std::vector<double> out(samples.rows());
  for (std::size_t r = 0; r < samples.rows(); ++r) out[r] = samples(r, c);
  return out;
}

void Recording::validate() const {
  if (samples.rows() == 0 || samples.cols() == 0)
    throw DataError("recording '" + subject_id + "' has no samples or no channels");
  if (!(sampling_rate_hz > 0.0) || !std::isfinite(sampling_rate_hz))
    throw DataError("recording '" + subject_id + "' has non-positive sampling rate");
  for (double v : samples.data())
    if (!std::isfinite(v)) throw DataError("recording '" + subject_id + "' has non-finite values");
}

std::string_view to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::powerline: return "powerline";
    case NoiseKind::attenuation: return "attenuation";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::clipping: return "clipping";
    case NoiseKind::baseline: return "baseline";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(std::string_view name) {
  for (NoiseKind k : kAllNoiseKinds)
    if (to_string(k) == name) return k;
  throw ConfigError(fmt::format("unknown noise kind '{}'", name));
}

std::size_t Segment::contaminated_count() const noexcept {
  if (!contamination) return 0;
  return static_cast<std::size_t>(
      std::ranges::count_if(*contamination, [](const auto& c) { return c.contaminated; }));
}

std::vector<int> SegmentDataset::labels() const {
  std::vector<int> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back(s.label);
  return out;
}

void SegmentDataset::validate() const {
  if (num_classes < 1) throw DataError("dataset needs at least one class");
  if (num_channels < 1) throw DataError("dataset needs at least one channel");
  std::vector<std::size_t> per_class(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.label < 1 || s.label > num_classes)
      throw DataError(fmt::format("segment {} has label {} outside 1..{}", i, s.label, num_classes));
    if (s.num_channels() != num_channels)
      throw DataError(fmt::format("segment {} has {} channels, expected {}", i, s.num_channels(),
                                  num_channels));
    for (const auto& ch : s.channels)
      if (ch.size() != s.length()) throw DataError(fmt::format("segment {} is ragged", i));
    if (s.contamination && s.contamination->size() != num_channels)
      throw DataError(fmt::format("segment {} has a mask of the wrong length", i));
    ++per_class[static_cast<std::size_t>(s.label - 1)];
  }
  for (std::size_t j = 0; j < per_class.size(); ++j)
    if (per_class[j] == 0) throw DataError(fmt::format("class {} has no segments", j + 1));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

DatasetManifest DatasetManifest::read(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open manifest " + file.string());
  DatasetManifest m;
  bool have_rate = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("{}:{}: expected key = value", file.string(), lineno));
    const auto key = trim(view.substr(0, eq));
    const auto value = parse_double(view.substr(eq + 1));
    if (!value)
      throw ConfigError(fmt::format("{}:{}: value for '{}' is not a number", file.string(), lineno, key));
    if (key == "sampling_rate_hz") {
      m.sampling_rate_hz = *value;
      have_rate = true;
    } else if (key == "num_channels") {
      if (*value < 1 || std::floor(*value) != *value)
        throw ConfigError(fmt::format("{}:{}: num_channels must be a positive integer", file.string(), lineno));
      m.num_channels = static_cast<std::size_t>(*value);
    } else if (key == "window_ms") {
      m.window_ms = *value;
    } else {
      throw ConfigError(fmt::format("{}:{}: unknown manifest key '{}'", file.string(), lineno, key));
    }
  }
  if (!have_rate) throw ConfigError("manifest " + file.string() + " lacks sampling_rate_hz");
  if (!(m.sampling_rate_hz > 0.0)) throw ConfigError("sampling_rate_hz must be positive");
  if (!(m.window_ms > 0.0)) throw ConfigError("window_ms must be positive");
  return m;
}

void DatasetManifest::write(const fs::path& file) const {
  auto out = fmt::output_file(file.string());
  out.print("sampling_rate_hz = {}\nnum_channels = {}\nwindow_ms = {}\n", sampling_rate_hz,
            num_channels, window_ms);
}

std::size_t window_samples(double window_ms, double sampling_rate_hz) {
  if (!(window_ms > 0.0) || !(sampling_rate_hz > 0.0))
    throw ConfigError("window length and sampling rate must be positive");
  return static_cast<std::size_t>(std::llround(window_ms * sampling_rate_hz / 1000.0));
}

std::vector<Segment> segment(const Recording& recording, double window_ms) {
  recording.validate();
  const std::size_t win = window_samples(window_ms, recording.sampling_rate_hz);
  if (win < 8) throw ConfigError(fmt::format("window of {} samples is shorter than 8", win));
  const std::size_t n = recording.num_samples();
  if (n < win)
    throw DataError(fmt::format("recording '{}' has {} samples, shorter than one {}-sample window",
                                recording.subject_id, n, win));
  const std::size_t count = n / win;
  const std::size_t channels = recording.num_channels();
  std::vector<Segment> out(count);
  for (std::size_t w = 0; w < count; ++w) {
    auto& seg = out[w];
    seg.label = recording.class_label.value_or(0);
    seg.channels.assign(channels, std::vector<double>(win));
    for (std::size_t t = 0; t < win; ++t)
      for (std::size_t c = 0; c < channels; ++c) seg.channels[c][t] = recording.samples(w * win + t, c);
  }
  return out;
}

Matrix read_csv_matrix(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  Matrix m;
  std::vector<double> row;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    row.clear();
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      const auto cell = rest.substr(0, comma);
      const auto v = parse_double(cell);
      if (!v || !std::isfinite(*v))
        throw DataError(fmt::format("{}:{}: invalid or non-finite value '{}'", file.string(), lineno,
                                    trim(cell)));
      row.push_back(*v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (m.rows() > 0 && row.size() != m.cols())
      throw DataError(fmt::format("{}:{}: row has {} columns, expected {}", file.string(), lineno,
                                  row.size(), m.cols()));
    m.append_row(row);
  }
  if (m.rows() == 0) throw DataError(file.string() + ": no data rows");
  return m;
}

void write_csv_matrix(const Matrix& m, const fs::path& file) {
  auto out = fmt::output_file(file.string());
  for (std::size_t r = 0; r < m.rows(); ++r) out.print("{}\n", fmt::join(m.row(r), ","));
}

SegmentDataset load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw ConfigError("dataset directory " + root.string() + " does not exist");
  const auto manifest_path = root / kManifestFileName;
  if (!fs::exists(manifest_path)) throw ConfigError("missing " + manifest_path.string());
  return load_dataset(root, DatasetManifest::read(manifest_path));
}

SegmentDataset load_dataset(const fs::path& root, const DatasetManifest& manifest) {
  if (!fs::is_directory(root)) throw ConfigError("dataset directory " + root.string() + " does not exist");
  static const std::regex pattern(R"((\d+)_(\d+)\.csv)");
  std::map<std::pair<int, long long>, fs::path> files;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::smatch match;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, match, pattern)) continue;
    files[{std::stoi(match[1]), std::stoll(match[2])}] = entry.path();
  }
  if (files.empty()) throw ConfigError("no <class>_<trial>.csv files in " + root.string());

  SegmentDataset ds;
  ds.num_channels = manifest.num_channels;
  ds.sampling_rate_hz = manifest.sampling_rate_hz;
  ds.subject_id = root.filename().string();
  std::set<int> classes;
  for (const auto& [key, path] : files) {
    const Matrix raw = read_csv_matrix(path);
    if (raw.cols() < manifest.num_channels)
      throw DataError(fmt::format("{}: has {} columns, manifest requires {}", path.string(), raw.cols(),
                                  manifest.num_channels));
    Recording rec;
    rec.samples = Matrix(raw.rows(), manifest.num_channels);
    for (std::size_t r = 0; r < raw.rows(); ++r)
      for (std::size_t c = 0; c < manifest.num_channels; ++c) rec.samples(r, c) = raw(r, c);
    rec.sampling_rate_hz = manifest.sampling_rate_hz;
    rec.subject_id = path.filename().string();
    rec.class_label = key.first;
    auto segs = segment(rec, manifest.window_ms);
    std::ranges::move(segs, std::back_inserter(ds.segments));
    classes.insert(key.first);
  }
  if (classes.size() < 2)
    throw DataError(fmt::format("{} contains {} class(es); at least 2 are required", root.string(),
                                classes.size()));
  if (*classes.begin() != 1 || *classes.rbegin() != static_cast<int>(classes.size()))
    throw DataError("class numbers in " + root.string() + " must be 1..M without gaps");
  ds.num_classes = static_cast<int>(classes.size());
  ds.validate();
  return ds;
}

void write_dataset(const SegmentDataset& ds, const fs::path& dir) {
  ds.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create directory " + dir.string());
  const std::size_t length = ds.segments.empty() ? 0 : ds.segments.front().length();
  for (const auto& s : ds.segments)
    if (s.length() != length) throw DataError("write_dataset needs equal-length segments");

  DatasetManifest manifest;
  manifest.sampling_rate_hz = ds.sampling_rate_hz;
  manifest.num_channels = ds.num_channels;
  manifest.window_ms = static_cast<double>(length) * 1000.0 / ds.sampling_rate_hz;
  manifest.write(dir / kManifestFileName);

  auto index = fmt::output_file((dir / "index.csv").string());
  index.print("segment_id,class,trial,file\n");
  std::vector<long long> trial(static_cast<std::size_t>(ds.num_classes) + 1, 0);
  for (std::size_t i = 0; i < ds.segments.size(); ++i) {
    const auto& s = ds.segments[i];
    const long long t = ++trial[static_cast<std::size_t>(s.label)];
    const std::string name = fmt::format("{}_{}.csv", s.label, t);
    Matrix m(s.length(), s.num_channels());
    for (std::size_t r = 0; r < s.length(); ++r)
      for (std::size_t c = 0; c < s.num_channels(); ++c) m(r, c) = s.channels[c][r];
    write_csv_matrix(m, dir / name);
    index.print("{},{},{},{}\n", i, s.label, t, name);
  }
}

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic spec needs at least 2 classes");
  if (num_channels < 1) throw ConfigError("synthetic spec needs at least 1 channel");
  if (segments_per_class < 10) throw ConfigError("synthetic spec needs at least 10 segments per class");
  if (segment_length < 8) throw ConfigError("synthetic segment length must be at least 8 samples");
  if (!(sampling_rate_hz > 0.0)) throw ConfigError("synthetic sampling rate must be positive");
  if (!(amplitude_jitter >= 0.0)) throw ConfigError("amplitude jitter must be non-negative");
  if (partials < 1) throw ConfigError("synthetic signals need at least one partial");
  if (!(bandwidth >= 0.0 && bandwidth < 1.0)) throw ConfigError("relative bandwidth must lie in [0, 1)");
  if (!(texture >= 0.0)) throw ConfigError("texture level must be non-negative");
  if (!class_band_centers_hz.empty()) {
    if (class_band_centers_hz.size() != static_cast<std::size_t>(num_classes))
      throw ConfigError("band centre table needs one row per class");
    const double nyquist = sampling_rate_hz / 2.0;
    for (const auto& row : class_band_centers_hz) {
      if (row.size() != num_channels) throw ConfigError("band centre table needs one column per channel");
      for (double f : row)
        if (!(f > 0.0) || !(f < nyquist))
          throw ConfigError(fmt::format("band centre {} Hz is outside (0, {}) Hz", f, nyquist));
    }
  }
}

std::vector<std::vector<double>> default_band_centers(int num_classes, std::size_t num_channels,
                                                      double sampling_rate_hz) {
  // Mid-points of A3, D3, D2, D1 as fractions of the sampling rate.
  constexpr double band_mid[4] = {1.0 / 32.0, 3.0 / 32.0, 3.0 / 16.0, 3.0 / 8.0};
  std::vector<std::vector<double>> centers(static_cast<std::size_t>(num_classes),
                                           std::vector<double>(num_channels));
  for (int j = 0; j < num_classes; ++j) {
    const double stretch = 1.0 + 0.15 * static_cast<double>((j / 4) % 3);
    for (std::size_t l = 0; l < num_channels; ++l)
      centers[static_cast<std::size_t>(j)][l] =
          band_mid[(static_cast<std::size_t>(j) + l) % 4] * stretch * sampling_rate_hz;
  }
  return centers;
}

SegmentDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const auto centers = spec.class_band_centers_hz.empty()
                           ? default_band_centers(spec.num_classes, spec.num_channels, spec.sampling_rate_hz)
                           : spec.class_band_centers_hz;
  const double nyquist = spec.sampling_rate_hz / 2.0;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  SegmentDataset ds;
  ds.num_classes = spec.num_classes;
  ds.num_channels = spec.num_channels;
  ds.sampling_rate_hz = spec.sampling_rate_hz;
  ds.subject_id = fmt::format("synthetic-{}", spec.seed);
  ds.segments.reserve(static_cast<std::size_t>(spec.num_classes) * spec.segments_per_class);

  const double partial_gain = 1.0 / std::sqrt(static_cast<double>(spec.partials));
  for (int j = 0; j < spec.num_classes; ++j) {
    for (std::size_t i = 0; i < spec.segments_per_class; ++i) {
      std::mt19937_64 rng(derive_seed(spec.seed, {stream::synthetic, static_cast<std::uint64_t>(j),
                                                  static_cast<std::uint64_t>(i)}));
      std::normal_distribution<double> normal(0.0, 1.0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Segment seg;
      seg.label = j + 1;
      seg.channels.assign(spec.num_channels, std::vector<double>(spec.segment_length));
      std::vector<double> freqs(spec.partials);
      std::vector<double> phases(spec.partials);
      for (std::size_t l = 0; l < spec.num_channels; ++l) {
        const double amp = std::max(0.1, 1.0 + spec.amplitude_jitter * normal(rng));
        const double center = centers[static_cast<std::size_t>(j)][l];
        for (std::size_t p = 0; p < spec.partials; ++p) {
          const double spread = 1.0 + spec.bandwidth * (2.0 * unit(rng) - 1.0);
          freqs[p] = std::min(center * spread, 0.98 * nyquist);
          phases[p] = two_pi * unit(rng);
        }
        auto& x = seg.channels[l];
        for (std::size_t t = 0; t < spec.segment_length; ++t) {
          const double time = static_cast<double>(t) / spec.sampling_rate_hz;
          double v = 0.0;
          for (std::size_t p = 0; p < spec.partials; ++p) v += std::sin(two_pi * freqs[p] * time + phases[p]);
          x[t] = amp * (partial_gain * v + spec.texture * normal(rng));
        }
      }
      ds.segments.push_back(std::move(seg));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace myofuzz
