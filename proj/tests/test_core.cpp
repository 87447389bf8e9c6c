#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "myofuzz/core.hpp"
#include "myofuzz/error.hpp"
#include "test_support.hpp"

using namespace myofuzz;
using testing_support::TempDir;

namespace {

Recording ramp_recording(std::size_t samples, std::size_t channels, double fs, int label) {
  Recording rec;
  rec.samples = Matrix(samples, channels);
  for (std::size_t i = 0; i < samples; ++i)
    for (std::size_t c = 0; c < channels; ++c) rec.samples(i, c) = static_cast<double>(i) + 0.001 * c;
  rec.sampling_rate_hz = fs;
  rec.class_label = label;
  return rec;
}

void write_trial(const std::filesystem::path& file, std::size_t samples, std::size_t channels, double offset) {
  std::ofstream out(file);
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      if (c) out << ',';
      out << std::sin(0.01 * static_cast<double>(i) * (c + 1)) + offset;
    }
    out << '\n';
  }
}

SyntheticSpec small_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.num_channels = 2;
  spec.segments_per_class = 20;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST(Segmentation, DropsTrailingRemainder) {
  const auto segs = segment(ramp_recording(1100, 2, 1000.0, 3), 500.0);
  ASSERT_EQ(segs.size(), 2U);
  EXPECT_EQ(segs[0].length(), 500U);
  EXPECT_EQ(segs[0].label, 3);
  EXPECT_DOUBLE_EQ(segs[1].channels[0].front(), 500.0);
  EXPECT_DOUBLE_EQ(segs[1].channels[1].back(), 999.001);
}

TEST(Segmentation, ExactFitGivesOneSegment) {
  EXPECT_EQ(segment(ramp_recording(500, 1, 1000.0, 1), 500.0).size(), 1U);
}

TEST(Segmentation, ShortRecordingIsDataError) {
  EXPECT_THROW(segment(ramp_recording(499, 1, 1000.0, 1), 500.0), DataError);
}

TEST(Segmentation, WindowSamplesRoundsToSamples) {
  EXPECT_EQ(window_samples(500.0, 2000.0), 1000U);
  EXPECT_EQ(window_samples(500.0, 1000.0), 500U);
}

TEST(LoadDataset, CountsWindowsPerClass) {
  TempDir dir("load");
  DatasetManifest manifest;
  manifest.sampling_rate_hz = 2000.0;
  manifest.num_channels = 8;
  manifest.window_ms = 500.0;
  manifest.write(dir.path() / kManifestFileName);
  write_trial(dir.path() / "1_1.csv", 4000, 10, 0.0);
  write_trial(dir.path() / "2_1.csv", 4000, 10, 1.0);
  const SegmentDataset ds = load_dataset(dir.path());
  EXPECT_EQ(ds.size(), 8U);
  EXPECT_EQ(ds.num_classes, 2);
  EXPECT_EQ(ds.num_channels, 8U);
  EXPECT_EQ(ds.segments.front().label, 1);
  EXPECT_EQ(ds.segments.back().label, 2);
  EXPECT_EQ(ds.segments.front().length(), 1000U);
}

TEST(LoadDataset, EmptyDirectoryIsConfigError) {
  TempDir dir("empty");
  EXPECT_THROW(load_dataset(dir.path()), ConfigError);
}

TEST(LoadDataset, NanCellIsDataErrorNamingFileAndLine) {
  TempDir dir("nan");
  DatasetManifest manifest;
  manifest.sampling_rate_hz = 1000.0;
  manifest.num_channels = 2;
  manifest.window_ms = 100.0;
  manifest.write(dir.path() / kManifestFileName);
  write_trial(dir.path() / "1_1.csv", 200, 2, 0.0);
  {
    std::ofstream out(dir.path() / "2_1.csv");
    for (int i = 0; i < 200; ++i) out << (i == 41 ? "nan" : "0.5") << ",1.0\n";
  }
  try {
    load_dataset(dir.path());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("2_1.csv"), std::string::npos) << what;
    EXPECT_NE(what.find("42"), std::string::npos) << what;
  }
}

TEST(LoadDataset, SingleClassIsDataError) {
  TempDir dir("oneclass");
  DatasetManifest manifest;
  manifest.sampling_rate_hz = 1000.0;
  manifest.num_channels = 2;
  manifest.window_ms = 100.0;
  manifest.write(dir.path() / kManifestFileName);
  write_trial(dir.path() / "1_1.csv", 200, 2, 0.0);
  EXPECT_THROW(load_dataset(dir.path()), DataError);
}

TEST(LoadDataset, WriteThenLoadRoundTrips) {
  const SegmentDataset ds = generate_synthetic(small_spec(3));
  TempDir dir("roundtrip");
  write_dataset(ds, dir.path());
  const SegmentDataset back = load_dataset(dir.path());
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(back.labels(), ds.labels());
  EXPECT_EQ(back.num_channels, ds.num_channels);
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t c = 0; c < ds.num_channels; ++c)
      for (std::size_t t = 0; t < ds.segments[i].length(); ++t)
        ASSERT_EQ(back.segments[i].channels[c][t], ds.segments[i].channels[c][t]);
}

TEST(Synthetic, SameSeedIsBitIdenticalAndDifferentSeedDiffers) {
  const auto a = generate_synthetic(small_spec(7));
  const auto b = generate_synthetic(small_spec(7));
  const auto c = generate_synthetic(small_spec(8));
  ASSERT_EQ(a.size(), 40U);
  bool all_equal = true;
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    all_equal = all_equal && a.segments[i].channels == b.segments[i].channels;
    any_diff = any_diff || a.segments[i].channels != c.segments[i].channels;
  }
  EXPECT_TRUE(all_equal);
  EXPECT_TRUE(any_diff);
}

TEST(Synthetic, BandCenterAboveNyquistIsRejected) {
  SyntheticSpec spec = small_spec(1);
  spec.class_band_centers_hz = {{100.0, 600.0}, {200.0, 300.0}};
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
}

TEST(Synthetic, DefaultsProduceBalancedFiniteSegments) {
  SyntheticSpec spec;
  spec.segments_per_class = 10;
  spec.seed = 1;
  const auto ds = generate_synthetic(spec);
  EXPECT_EQ(ds.size(), 40U);
  EXPECT_EQ(ds.num_channels, 8U);
  for (const auto& seg : ds.segments)
    for (const auto& ch : seg.channels)
      for (double v : ch) ASSERT_TRUE(std::isfinite(v));
}

TEST(Recording, NonFiniteValueFailsValidation) {
  Recording rec = ramp_recording(10, 1, 100.0, 1);
  rec.samples(3, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(rec.validate(), DataError);
}
