#pragma once

// Repeated stratified cross-validation of the classifier rosters under
// test-time contamination, with rank and signed-rank summaries per SNR.
//
// Every (subject, repeat, fold) cell trains all methods on the clean training
// part, then scores them on the test part contaminated at each SNR of the
// grid. Contamination of a segment depends only on (seed, subject, repeat,
// segment), so the same channels and noise kinds are hit at every SNR.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "myofuzz/baselines.hpp"
#include "myofuzz/core.hpp"
#include "myofuzz/fuzzy.hpp"
#include "myofuzz/wavelet.hpp"

namespace myofuzz::eval {

struct FoldPlan {
  std::size_t folds = 10;
  std::size_t repeats = 4;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> assignment;  // [repeat][segment] -> fold
};
FoldPlan make_folds(std::span<const int> labels, int num_classes, std::size_t folds, std::size_t repeats,
                    std::uint64_t seed);

enum class ExperimentId { exp1, exp2, exp3 };
std::string_view to_string(ExperimentId id) noexcept;
ExperimentId parse_experiment(std::string_view name);

enum class Pooling { pool, per_subject };
std::string_view to_string(Pooling p) noexcept;
Pooling parse_pooling(std::string_view name);

struct Method {
  enum class Family { weighted, fknn };
  std::string id;     // method column of the records
  std::string label;  // column in rank tables; unique within a roster
  Family family = Family::weighted;
  classify::BaseModel base = classify::BaseModel::knn;
  classify::WeightMode mode = classify::WeightMode::B;
  // Membership used by AW weights and FKNN; B ignores it, AWc is crisp.
  fuzzy::MembershipKind kind = fuzzy::kDefaultSoftKind;

  bool uses_detectors() const noexcept;
  // Membership column of the records: "-" when no membership is involved.
  std::string kind_name() const;
};

// Full roster of an experiment. `soft` is the membership of AW and FKNN.
std::vector<Method> roster(ExperimentId id, fuzzy::MembershipKind soft);
// Subset of the roster selected by label. Throws ConfigError for unknown or
// reserved labels.
std::vector<Method> select_methods(ExperimentId id, fuzzy::MembershipKind soft,
                                   std::span<const std::string> labels);

struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::exp3;
  std::vector<std::string> methods;  // empty = full roster
  fuzzy::MembershipSpec soft{};
  std::vector<double> snr_grid;
  std::vector<NoiseKind> noise_kinds{std::begin(kAllNoiseKinds), std::end(kAllNoiseKinds)};
  std::size_t folds = 10;
  std::size_t repeats = 4;
  std::size_t tuning_folds = 4;
  std::vector<std::size_t> k_grid;
  std::vector<double> nu_grid;
  std::vector<int> component_grid{1, 2, 3};
  wavelet::WaveletSpec wavelet{};
  bool standardize = true;
  Pooling pooling = Pooling::pool;
  double alpha = 0.05;
  bool dump_predictions = false;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  ExperimentConfig();
  void validate() const;
};

struct MetricRecord {
  std::string subject;
  std::string method;
  std::string kind;
  std::string label;
  double snr_db = 0.0;
  std::size_t repeat = 0;
  std::size_t fold = 0;
  double bac = 0.0;
  double kappa = 0.0;
  double f1 = 0.0;
};

struct PredictionRow {
  std::string subject;
  double snr_db = 0.0;
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::size_t segment_id = 0;
  int true_label = 0;
  std::string method;
  std::string kind;
  int predicted_label = 0;
  std::vector<double> supports;
  bool fallback = false;
};

// Hyper-parameters chosen inside one cell.
struct CellTuning {
  std::string subject;
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::optional<std::size_t> k_fuzzy;
  std::optional<std::size_t> k_knn;
  std::optional<int> components;
  std::vector<double> nu;  // per channel; empty when no detectors were needed
};

struct PairwiseTest {
  std::string a;
  std::string b;
  double w_plus = 0.0;
  double p = 1.0;
  double p_holm = 1.0;
  bool significant = false;
  // Label with the better mean rank, or empty on a tie.
  std::string better;
};

struct SnrSummary {
  double snr_db = 0.0;
  std::vector<double> mean;   // per method label, metric mean over cases
  std::vector<double> ranks;  // per method label, average rank over cases
  std::vector<PairwiseTest> pairs;
};

struct CriterionSummary {
  std::string criterion;  // bac, kappa, f1
  std::vector<SnrSummary> per_snr;
};

struct EvaluationReport {
  ExperimentConfig config;
  std::vector<Method> methods;
  std::vector<std::string> subjects;
  std::vector<MetricRecord> records;
  std::vector<CellTuning> tuning;
  std::vector<PredictionRow> predictions;
  std::vector<CriterionSummary> summaries;
};

// Each dataset is one subject. Pooling::pool concatenates them first.
EvaluationReport run_experiment(const ExperimentConfig& config, std::span<const SegmentDataset> subjects);

// Rank and test tables from records alone; independent of record order.
std::vector<CriterionSummary> summarize(std::span<const MetricRecord> records, std::span<const Method> methods,
                                        std::span<const double> snr_grid, double alpha);

// records.csv, tuning.csv, ranks_<criterion>.csv, stats_<criterion>.json,
// predictions.csv (if requested). manifest.json is written by the caller.
void write_report(const EvaluationReport& report, const std::filesystem::path& dir);

}  // namespace myofuzz::eval
