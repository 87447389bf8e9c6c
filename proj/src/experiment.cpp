#include "myofuzz/experiment.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <tuple>

#include "myofuzz/classify.hpp"
#include "myofuzz/contam.hpp"
#include "myofuzz/error.hpp"
#include "myofuzz/features.hpp"
#include "myofuzz/folds.hpp"
#include "myofuzz/metrics.hpp"
#include "myofuzz/occ.hpp"
#include "myofuzz/parallel.hpp"
#include "myofuzz/seed.hpp"
#include "myofuzz/stats.hpp"

namespace myofuzz::eval {

using classify::BaseModel;
using classify::WeightMode;
using fuzzy::MembershipKind;

FoldPlan make_folds(std::span<const int> labels, int num_classes, std::size_t folds, std::size_t repeats,
                    std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (repeats < 1) throw ConfigError("cross-validation needs at least 1 repeat");
  FoldPlan plan;
  plan.folds = folds;
  plan.repeats = repeats;
  plan.seed = seed;
  for (std::size_t r = 0; r < repeats; ++r)
    plan.assignment.push_back(
        stratified_fold_assignment(labels, num_classes, folds, derive_seed(seed, {stream::folds, r})));
  return plan;
}

std::string_view to_string(ExperimentId id) noexcept {
  switch (id) {
    case ExperimentId::exp1: return "exp1";
    case ExperimentId::exp2: return "exp2";
    case ExperimentId::exp3: return "exp3";
  }
  return "?";
}

ExperimentId parse_experiment(std::string_view name) {
  for (auto id : {ExperimentId::exp1, ExperimentId::exp2, ExperimentId::exp3})
    if (name == to_string(id)) return id;
  throw ConfigError(fmt::format("unknown experiment '{}' (expected exp1, exp2 or exp3)", name));
}

std::string_view to_string(Pooling p) noexcept { return p == Pooling::pool ? "pool" : "per-subject"; }

Pooling parse_pooling(std::string_view name) {
  if (name == "pool") return Pooling::pool;
  if (name == "per-subject") return Pooling::per_subject;
  throw ConfigError(fmt::format("unknown pooling mode '{}' (expected pool or per-subject)", name));
}

bool Method::uses_detectors() const noexcept {
  if (family == Family::fknn) return kind != MembershipKind::cr0;
  return mode != WeightMode::B;
}

std::string Method::kind_name() const {
  if (family == Family::weighted && mode == WeightMode::B) return "-";
  return std::string(fuzzy::to_string(kind));
}

namespace {

Method weighted_method(BaseModel base, WeightMode mode, MembershipKind soft, bool qualify) {
  Method m;
  m.id = qualify ? fmt::format("{}-{}", to_string(mode), to_string(base)) : std::string(to_string(mode));
  m.label = m.id;
  m.family = Method::Family::weighted;
  m.base = base;
  m.mode = mode;
  m.kind = mode == WeightMode::AWc ? MembershipKind::cr : soft;
  return m;
}

Method fknn_method(std::string id, std::string label, MembershipKind kind) {
  Method m;
  m.id = std::move(id);
  m.label = std::move(label);
  m.family = Method::Family::fknn;
  m.kind = kind;
  return m;
}

}  // namespace

std::vector<Method> roster(ExperimentId id, MembershipKind soft) {
  std::vector<Method> out;
  switch (id) {
    case ExperimentId::exp1:
      for (auto base : {BaseModel::knn, BaseModel::gnb, BaseModel::nbm})
        for (auto mode : {WeightMode::B, WeightMode::AW, WeightMode::AWc})
          out.push_back(weighted_method(base, mode, soft, true));
      break;
    case ExperimentId::exp2:
      for (auto kind : fuzzy::kAllKinds) out.push_back(fknn_method("FKNN", std::string(fuzzy::to_string(kind)), kind));
      break;
    case ExperimentId::exp3:
      for (auto mode : {WeightMode::B, WeightMode::AW, WeightMode::AWc})
        out.push_back(weighted_method(BaseModel::knn, mode, soft, false));
      out.push_back(fknn_method("FKNN", "FKNN", soft));
      out.push_back(fknn_method("FKNNc", "FKNNc", MembershipKind::cr));
      break;
  }
  return out;
}

std::vector<Method> select_methods(ExperimentId id, MembershipKind soft, std::span<const std::string> labels) {
  auto full = roster(id, soft);
  if (labels.empty()) return full;
  std::vector<Method> out;
  std::set<std::string> seen;
  for (const auto& name : labels) {
    std::string lower(name);
    std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "do" || lower == "doa")
      throw ConfigError(fmt::format("method '{}' is a reserved identifier for a reference ensemble that is not "
                                    "implemented in this project",
                                    name));
    const auto it = std::ranges::find(full, name, &Method::label);
    if (it == full.end()) {
      std::vector<std::string> known;
      for (const auto& m : full) known.push_back(m.label);
      throw ConfigError(fmt::format("unknown method '{}' for {} (known: {})", name, to_string(id),
                                    fmt::join(known, ", ")));
    }
    if (!seen.insert(name).second) throw ConfigError(fmt::format("method '{}' listed twice", name));
    out.push_back(*it);
  }
  return out;
}

ExperimentConfig::ExperimentConfig()
    : snr_grid(contam::default_snr_grid()), k_grid(classify::default_k_grid()), nu_grid(occ::default_nu_grid()) {}

void ExperimentConfig::validate() const {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (tuning_folds < 2) throw ConfigError("tuning folds must be at least 2");
  if (snr_grid.empty()) throw ConfigError("SNR grid is empty");
  for (double s : snr_grid)
    if (!std::isfinite(s)) throw ConfigError("SNR grid contains a non-finite value");
  if (std::set<double>(snr_grid.begin(), snr_grid.end()).size() != snr_grid.size())
    throw ConfigError("SNR grid contains duplicates");
  if (noise_kinds.empty()) throw ConfigError("no noise kinds configured");
  if (k_grid.empty() || std::ranges::find(k_grid, std::size_t{0}) != k_grid.end())
    throw ConfigError("K grid must be non-empty and positive");
  if (nu_grid.empty()) throw ConfigError("nu grid is empty");
  for (double nu : nu_grid)
    if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError(fmt::format("nu = {} outside (0, 1]", nu));
  if (component_grid.empty() || std::ranges::any_of(component_grid, [](int c) { return c < 1; }))
    throw ConfigError("component grid must be non-empty and positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(soft.steepness > 0.0)) throw ConfigError("membership steepness must be positive");
  if (wavelet.levels < 1) throw ConfigError("wavelet levels must be at least 1");
  (void)select_methods(experiment, soft.kind, methods);
}

namespace {

struct WorkSubject {
  std::string name;
  const SegmentDataset* ds = nullptr;
};

SegmentDataset merge_subjects(std::span<const SegmentDataset> subjects) {
  SegmentDataset out;
  out.num_classes = subjects.front().num_classes;
  out.num_channels = subjects.front().num_channels;
  out.sampling_rate_hz = subjects.front().sampling_rate_hz;
  out.subject_id = "pooled";
  for (const auto& s : subjects) {
    if (s.num_classes != out.num_classes || s.num_channels != out.num_channels ||
        s.sampling_rate_hz != out.sampling_rate_hz)
      throw DataError(fmt::format("subject '{}' differs from '{}' in classes, channels or sampling rate; "
                                  "cannot pool",
                                  s.subject_id, subjects.front().subject_id));
    out.segments.insert(out.segments.end(), s.segments.begin(), s.segments.end());
  }
  return out;
}

struct Models {
  std::vector<occ::ChannelDetector> detectors;
  std::optional<classify::FuzzyKnnEnsemble> fknn;
  std::optional<classify::WeightedKnn> knn;
  std::optional<classify::GaussianNb> gnb;
  std::optional<classify::MixtureNb> nbm;

  const classify::WeightedClassifier& weighted(BaseModel base) const {
    switch (base) {
      case BaseModel::knn: return *knn;
      case BaseModel::gnb: return *gnb;
      case BaseModel::nbm: return *nbm;
    }
    throw ContractError("unknown base model");
  }
};

struct CellOutput {
  std::vector<MetricRecord> records;
  std::vector<PredictionRow> predictions;
  CellTuning tuning;
};

struct CellInput {
  const ExperimentConfig* config = nullptr;
  const std::vector<Method>* methods = nullptr;
  std::string subject;
  std::uint64_t seed = 0;
  const FeatureSet* clean = nullptr;
  // [snr index] -> contaminated features of every segment for this repeat
  const std::vector<FeatureSet>* contaminated = nullptr;
  std::size_t repeat = 0;
  std::size_t fold = 0;
  FoldSplit split;
};

Models train_models(const CellInput& in, const FeatureSet& train, CellTuning& tuning) {
  const auto& cfg = *in.config;
  const auto& methods = *in.methods;
  const auto any = [&](auto pred) { return std::ranges::any_of(methods, pred); };
  const std::uint64_t r = in.repeat;
  const std::uint64_t f = in.fold;
  Models m;
  if (any([](const Method& x) { return x.uses_detectors(); })) {
    occ::DetectorOptions opts;
    opts.nu_grid = cfg.nu_grid;
    opts.folds = cfg.tuning_folds;
    opts.jobs = 1;
    m.detectors = with_context("contamination detectors", [&] {
      return occ::fit_channel_detectors(train.channels, derive_seed(in.seed, {stream::nu_tuning, r, f}), opts);
    });
    for (const auto& d : m.detectors) tuning.nu.push_back(d.tuning.nu);
  }
  if (any([](const Method& x) { return x.family == Method::Family::fknn; })) {
    const auto t = classify::tune_k(train, classify::KnnFamily::fuzzy_ensemble, cfg.k_grid, cfg.tuning_folds,
                                    derive_seed(in.seed, {stream::k_tuning, r, f, 0}));
    tuning.k_fuzzy = std::min(t.k, train.size());
    m.fknn.emplace(train, *tuning.k_fuzzy);
  }
  const auto uses_base = [&](BaseModel b) {
    return any([b](const Method& x) { return x.family == Method::Family::weighted && x.base == b; });
  };
  if (uses_base(BaseModel::knn)) {
    const auto t = classify::tune_k(train, classify::KnnFamily::weighted_knn, cfg.k_grid, cfg.tuning_folds,
                                    derive_seed(in.seed, {stream::k_tuning, r, f, 1}));
    tuning.k_knn = std::min(t.k, train.size());
    m.knn.emplace(train, *tuning.k_knn);
  }
  if (uses_base(BaseModel::gnb)) m.gnb.emplace(train);
  if (uses_base(BaseModel::nbm)) {
    const auto t = classify::tune_components(train, cfg.component_grid, cfg.tuning_folds,
                                             derive_seed(in.seed, {stream::mixture, r, f, 0}));
    tuning.components = t.components;
    m.nbm.emplace(train, t.components, derive_seed(in.seed, {stream::mixture, r, f, 1}));
  }
  return m;
}

CellOutput run_cell(const CellInput& in) {
  const auto& cfg = *in.config;
  const auto& methods = *in.methods;
  CellOutput out;
  out.tuning.subject = in.subject;
  out.tuning.repeat = in.repeat;
  out.tuning.fold = in.fold;

  const FeatureSet train_raw = in.clean->subset(in.split.train);
  const Standardizer scaler = cfg.standardize ? Standardizer::fit(train_raw)
                                              : Standardizer::identity(train_raw.num_channels(), train_raw.dim());
  const FeatureSet train = scaler.apply(train_raw);
  const Models models = train_models(in, train, out.tuning);
  const int num_classes = train.num_classes;

  for (std::size_t s = 0; s < cfg.snr_grid.size(); ++s) {
    const FeatureSet test = scaler.apply((*in.contaminated)[s].subset(in.split.test));
    std::vector<std::vector<int>> predicted(methods.size(), std::vector<int>(test.size()));
    for (std::size_t q = 0; q < test.size(); ++q) {
      const auto x = classify::channel_sample(test, q);
      const std::vector<double> t = models.detectors.empty() ? std::vector<double>(test.num_channels(), 1.0)
                                                             : classify::band_coordinates(models.detectors, x);
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const Method& method = methods[mi];
        const fuzzy::MembershipSpec spec{method.kind, cfg.soft.steepness};
        const classify::ClassSupports supports = with_context(fmt::format("method {}", method.label), [&] {
          if (method.family == Method::Family::fknn)
            return models.fknn->predict(x, classify::memberships(spec, t));
          return classify::baseline_predict(models.weighted(method.base), method.mode, x, t, spec).supports;
        });
        predicted[mi][q] = supports.label();
        if (cfg.dump_predictions) {
          PredictionRow row;
          row.subject = in.subject;
          row.snr_db = cfg.snr_grid[s];
          row.repeat = in.repeat;
          row.fold = in.fold;
          row.segment_id = in.split.test[q];
          row.true_label = test.labels[q];
          row.method = method.label;
          row.kind = method.kind_name();
          row.predicted_label = predicted[mi][q];
          row.supports = supports.d;
          row.fallback = supports.fallback;
          out.predictions.push_back(std::move(row));
        }
      }
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      MetricRecord rec;
      rec.subject = in.subject;
      rec.method = methods[mi].id;
      rec.kind = methods[mi].kind_name();
      rec.label = methods[mi].label;
      rec.snr_db = cfg.snr_grid[s];
      rec.repeat = in.repeat;
      rec.fold = in.fold;
      rec.bac = metrics::bac(test.labels, predicted[mi], num_classes);
      rec.kappa = metrics::kappa(test.labels, predicted[mi]);
      rec.f1 = metrics::micro_f1(test.labels, predicted[mi]);
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace

EvaluationReport run_experiment(const ExperimentConfig& config, std::span<const SegmentDataset> subjects) {
  config.validate();
  if (subjects.empty()) throw ConfigError("experiment needs at least one dataset");
  EvaluationReport report;
  report.config = config;
  report.methods = select_methods(config.experiment, config.soft.kind, config.methods);

  std::optional<SegmentDataset> pooled;
  std::vector<WorkSubject> work;
  if (config.pooling == Pooling::pool && subjects.size() > 1) {
    pooled = merge_subjects(subjects);
    work.push_back({"pooled", &*pooled});
  } else if (config.pooling == Pooling::pool) {
    work.push_back({"pooled", &subjects.front()});
  } else {
    std::set<std::string> names;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
      std::string name = subjects[i].subject_id.empty() ? fmt::format("subject{}", i + 1) : subjects[i].subject_id;
      if (!names.insert(name).second) throw ConfigError(fmt::format("duplicate subject id '{}'", name));
      work.push_back({name, &subjects[i]});
    }
  }

  for (std::size_t si = 0; si < work.size(); ++si) {
    const SegmentDataset& ds = *work[si].ds;
    const std::string& name = work[si].name;
    report.subjects.push_back(name);
    ds.validate();
    const std::uint64_t subject_seed = derive_seed(config.seed, {si});
    spdlog::info("{}: {} segments, {} classes, {} channels", name, ds.size(), ds.num_classes, ds.num_channels);

    const FeatureSet clean = extract_dataset_features(ds, config.wavelet, config.jobs);
    const FoldPlan plan = make_folds(clean.labels, clean.num_classes, config.folds, config.repeats, subject_seed);

    // Contaminated features for every segment, per repeat and SNR. Each
    // segment is tested once per repeat, so this is exactly the test data.
    std::vector<std::vector<FeatureSet>> contaminated(config.repeats);
    for (std::size_t r = 0; r < config.repeats; ++r)
      for (double snr : config.snr_grid) {
        contam::ContaminationPlan cp;
        cp.snr_db = snr;
        cp.seed = derive_seed(subject_seed, {stream::contamination, r});
        cp.snr_grid = config.snr_grid;
        cp.kinds = config.noise_kinds;
        contaminated[r].push_back(
            extract_dataset_features(contam::contaminate_dataset(ds, cp), config.wavelet, config.jobs));
      }

    const std::size_t cells = config.repeats * config.folds;
    std::vector<CellOutput> outputs(cells);
    parallel_for(cells, config.jobs, [&](std::size_t c) {
      CellInput in;
      in.config = &config;
      in.methods = &report.methods;
      in.subject = name;
      in.seed = subject_seed;
      in.clean = &clean;
      in.repeat = c / config.folds;
      in.fold = c % config.folds;
      in.contaminated = &contaminated[in.repeat];
      in.split = split_fold(plan.assignment[in.repeat], in.fold);
      if (in.split.train.empty() || in.split.test.empty())
        throw DataError(fmt::format("{}: repeat {} fold {} is empty; too few segments for {} folds", name, in.repeat,
                                    in.fold, config.folds));
      outputs[c] = with_context(fmt::format("{} repeat {} fold {}", name, in.repeat, in.fold), [&] {
        return run_cell(in);
      });
      spdlog::debug("{} repeat {} fold {} done", name, in.repeat, in.fold);
    });
    for (auto& o : outputs) {
      std::ranges::move(o.records, std::back_inserter(report.records));
      std::ranges::move(o.predictions, std::back_inserter(report.predictions));
      report.tuning.push_back(std::move(o.tuning));
    }
  }
  report.summaries = summarize(report.records, report.methods, config.snr_grid, config.alpha);
  return report;
}

namespace {

double metric_value(const MetricRecord& r, std::string_view criterion) {
  if (criterion == "bac") return r.bac;
  if (criterion == "kappa") return r.kappa;
  return r.f1;
}

}  // namespace

std::vector<CriterionSummary> summarize(std::span<const MetricRecord> records, std::span<const Method> methods,
                                        std::span<const double> snr_grid, double alpha) {
  using CaseKey = std::tuple<std::string, std::size_t, std::size_t>;
  std::vector<CriterionSummary> out;
  for (std::string_view criterion : {"bac", "kappa", "f1"}) {
    CriterionSummary cs;
    cs.criterion = std::string(criterion);
    for (double snr : snr_grid) {
      std::vector<std::map<CaseKey, double>> by_method(methods.size());
      for (const auto& r : records) {
        if (r.snr_db != snr) continue;
        const auto it = std::ranges::find(methods, r.label, &Method::label);
        if (it == methods.end()) continue;
        by_method[static_cast<std::size_t>(it - methods.begin())][{r.subject, r.repeat, r.fold}] =
            metric_value(r, criterion);
      }
      std::vector<std::vector<double>> scores(methods.size());
      for (std::size_t m = 0; m < methods.size(); ++m) {
        if (by_method[m].size() != by_method.front().size())
          throw ContractError(fmt::format("method {} has {} cases at SNR {}, expected {}", methods[m].label,
                                          by_method[m].size(), snr, by_method.front().size()));
        for (const auto& [key, v] : by_method[m]) {
          if (!by_method.front().contains(key)) throw ContractError("records do not share the same cases");
          scores[m].push_back(v);
        }
      }
      SnrSummary ss;
      ss.snr_db = snr;
      for (const auto& row : scores)
        ss.mean.push_back(row.empty() ? 0.0 : std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size()));
      ss.ranks = stats::average_ranks(scores);
      std::vector<double> raw;
      for (std::size_t i = 0; i < methods.size(); ++i)
        for (std::size_t j = i + 1; j < methods.size(); ++j) {
          const auto w = stats::wilcoxon_signed_rank(scores[i], scores[j]);
          PairwiseTest t;
          t.a = methods[i].label;
          t.b = methods[j].label;
          t.w_plus = w.w_plus;
          t.p = w.p;
          if (ss.ranks[i] < ss.ranks[j]) t.better = t.a;
          if (ss.ranks[j] < ss.ranks[i]) t.better = t.b;
          raw.push_back(w.p);
          ss.pairs.push_back(std::move(t));
        }
      const auto adjusted = stats::holm_adjust(raw);
      for (std::size_t k = 0; k < ss.pairs.size(); ++k) {
        ss.pairs[k].p_holm = adjusted[k];
        ss.pairs[k].significant = adjusted[k] < alpha;
      }
      cs.per_snr.push_back(std::move(ss));
    }
    out.push_back(std::move(cs));
  }
  return out;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError(fmt::format("cannot write {}", file.string()));
  return out;
}

}  // namespace

void write_report(const EvaluationReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));

  {
    auto out = open_for_write(dir / "records.csv");
    out << "subject,method,kind,label,snr_db,repeat,fold,bac,kappa,f1\n";
    for (const auto& r : report.records)
      out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.subject, r.method, r.kind, r.label, r.snr_db, r.repeat,
                         r.fold, r.bac, r.kappa, r.f1);
  }
  {
    auto out = open_for_write(dir / "tuning.csv");
    out << "subject,repeat,fold,k_fuzzy,k_knn,components,nu\n";
    const auto opt = [](const auto& v) { return v ? fmt::format("{}", *v) : std::string("-"); };
    for (const auto& t : report.tuning)
      out << fmt::format("{},{},{},{},{},{},{}\n", t.subject, t.repeat, t.fold, opt(t.k_fuzzy), opt(t.k_knn),
                         opt(t.components), t.nu.empty() ? "-" : fmt::format("{}", fmt::join(t.nu, ";")));
  }
  for (const auto& cs : report.summaries) {
    {
      auto out = open_for_write(dir / fmt::format("ranks_{}.csv", cs.criterion));
      out << "snr_db";
      for (const auto& m : report.methods) out << ',' << m.label;
      out << '\n';
      for (const auto& ss : cs.per_snr) out << fmt::format("{},{}\n", ss.snr_db, fmt::join(ss.ranks, ","));
    }
    nlohmann::ordered_json j;
    j["criterion"] = cs.criterion;
    j["alpha"] = report.config.alpha;
    j["test"] = "wilcoxon signed-rank, two-sided, holm-adjusted per snr";
    std::vector<std::string> labels;
    for (const auto& m : report.methods) labels.push_back(m.label);
    j["methods"] = labels;
    j["per_snr"] = nlohmann::ordered_json::array();
    for (const auto& ss : cs.per_snr) {
      nlohmann::ordered_json s;
      s["snr_db"] = ss.snr_db;
      s["mean"] = ss.mean;
      s["average_rank"] = ss.ranks;
      s["pairs"] = nlohmann::ordered_json::array();
      for (const auto& p : ss.pairs)
        s["pairs"].push_back({{"a", p.a},
                              {"b", p.b},
                              {"w_plus", p.w_plus},
                              {"p", p.p},
                              {"p_holm", p.p_holm},
                              {"significant", p.significant},
                              {"better", p.better}});
      j["per_snr"].push_back(std::move(s));
    }
    auto out = open_for_write(dir / fmt::format("stats_{}.json", cs.criterion));
    out << j.dump(2) << '\n';
  }
  if (report.config.dump_predictions) {
    auto out = open_for_write(dir / "predictions.csv");
    const std::size_t m = report.predictions.empty() ? 0 : report.predictions.front().supports.size();
    out << "subject,snr_db,repeat,fold,segment_id,true_label,method_id,kind,predicted_label";
    for (std::size_t j = 1; j <= m; ++j) out << ",d_" << j;
    out << ",fallback_flag\n";
    for (const auto& p : report.predictions)
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", p.subject, p.snr_db, p.repeat, p.fold, p.segment_id,
                         p.true_label, p.method, p.kind, p.predicted_label, fmt::join(p.supports, ","),
                         p.fallback ? 1 : 0);
  }
}

}  // namespace myofuzz::eval
