// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit status
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "myofuzz/classify.hpp"
#include "myofuzz/contam.hpp"
#include "myofuzz/core.hpp"
#include "myofuzz/experiment.hpp"
#include "myofuzz/fuzzy.hpp"
#include "myofuzz/metrics.hpp"
#include "myofuzz/occ.hpp"
#include "myofuzz/parallel.hpp"
#include "myofuzz/seed.hpp"
#include "myofuzz/stats.hpp"
#include "myofuzz/wavelet.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace myofuzz;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

classify::ChannelSample as_sample(const std::vector<oracle::Vec>& x) {
  classify::ChannelSample s;
  for (const auto& v : x) s.emplace_back(v);
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> oracle_sigmas(const oracle::Instance& in) {
  std::vector<double> s;
  for (const auto& ch : in.train) {
    const double v = oracle::pairwise_distance_std(ch);
    s.push_back(v > 0.0 ? v : 1.0);
  }
  return s;
}

// 1. Ensemble supports against the direct implementation.
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  int label_mismatch = 0;
  for (int i = 0; i < 200; ++i) {
    const auto in = oracle::random_instance(rng);
    const classify::FuzzyKnnEnsemble model(testing_support::to_feature_set(in), in.k);
    const auto got = model.predict(as_sample(in.x), in.r);
    const auto want = oracle::fuzzy_knn(in.train, in.labels, in.m, oracle_sigmas(in), in.x, in.r, in.k);
    worst = std::max(worst, max_abs_diff(got.d, want.d));
    label_mismatch += got.label() != want.label();
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && label_mismatch == 0 && secs < 10.0,
          fmt::format("200 instances, max |d - d_oracle| = {:.3g}, label mismatches {}, {:.2f} s", worst,
                      label_mismatch, secs)};
}

// 2. Constant unit membership reduces to similarity-weighted KNN.
Outcome reduction_identity() {
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  int label_mismatch = 0;
  const fuzzy::MembershipSpec cr0{fuzzy::MembershipKind::cr0, 10.0};
  for (int i = 0; i < 50; ++i) {
    const auto in = oracle::random_instance(rng);
    const classify::FuzzyKnnEnsemble model(testing_support::to_feature_set(in), in.k);
    std::vector<double> t(in.train.size());
    for (double& v : t) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto r = classify::memberships(cr0, t);
    const auto got = model.predict(as_sample(in.x), r);
    const auto want = oracle::similarity_weighted_knn(in.train, in.labels, in.m, oracle_sigmas(in), in.x, in.k);
    worst = std::max(worst, max_abs_diff(got.d, want.d));
    label_mismatch += got.label() != want.label();
  }
  return {worst <= 1e-12 && label_mismatch == 0,
          fmt::format("50 instances, max support difference {:.3g}, label mismatches {}", worst, label_mismatch)};
}

// 3. A zero membership is the same as removing the channel.
Outcome channel_silencing() {
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  int done = 0;
  while (done < 50) {
    const auto in = oracle::random_instance(rng);
    if (in.train.size() < 2) continue;
    ++done;
    const std::size_t drop = std::uniform_int_distribution<std::size_t>(0, in.train.size() - 1)(rng);
    const classify::FuzzyKnnEnsemble full(testing_support::to_feature_set(in), in.k);
    auto r = in.r;
    r[drop] = 0.0;
    const auto silenced = full.predict(as_sample(in.x), r);
    oracle::Instance reduced = in;
    reduced.train.erase(reduced.train.begin() + static_cast<std::ptrdiff_t>(drop));
    reduced.x.erase(reduced.x.begin() + static_cast<std::ptrdiff_t>(drop));
    reduced.r.erase(reduced.r.begin() + static_cast<std::ptrdiff_t>(drop));
    const classify::FuzzyKnnEnsemble smaller(testing_support::to_feature_set(reduced), in.k);
    const auto deleted = smaller.predict(as_sample(reduced.x), reduced.r);
    worst = std::max(worst, max_abs_diff(silenced.d, deleted.d));
  }
  return {worst < 1e-12, fmt::format("50 instances, max support difference {:.3g}", worst)};
}

// 4. nu-property and dual feasibility of the one-class SVM.
Outcome nu_property() {
  const auto t0 = Clock::now();
  int ok = 0;
  int total = 0;
  double worst_sum = 0.0;
  std::string first_failure;
  for (double nu : {0.2, 0.5, 0.8}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal;
      Matrix x(200, 2);
      for (double& v : x.data()) v = normal(rng);
      const auto res = occ::train_ocsvm_full(x, nu, occ::default_gamma(x));
      std::size_t rejected = 0;
      for (double s : res.model.decision(x)) rejected += s < 0.0;
      std::size_t sv = 0;
      for (double a : res.alpha) sv += a > 0.0;
      const double box = 1.0 / (nu * 200.0);
      bool in_box = true;
      for (double a : res.alpha) in_box = in_box && a >= 0.0 && a <= box;
      const double sum = std::accumulate(res.alpha.begin(), res.alpha.end(), 0.0);
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      const double rej = rejected / 200.0;
      const double svf = sv / 200.0;
      const bool pass = rej <= nu + 0.05 && svf >= nu - 0.05 && std::abs(sum - 1.0) <= 1e-9 && in_box;
      ++total;
      ok += pass;
      if (!pass && first_failure.empty())
        first_failure = fmt::format("; first failure nu={} seed={} rejection={} sv={}", nu, seed, rej, svf);
    }
  }
  const double secs = seconds_since(t0);
  return {ok == total && secs < 30.0,
          fmt::format("{}/{} (nu, seed) cases, max |sum(alpha) - 1| = {:.3g}, {:.2f} s{}", ok, total, worst_sum, secs,
                      first_failure)};
}

// 5. Filter bank sanity, reconstruction and energy preservation.
Outcome wavelet_checks() {
  const auto& bank = wavelet::db6();
  const double lo = std::accumulate(bank.dec_lo.begin(), bank.dec_lo.end(), 0.0);
  const double hi = std::accumulate(bank.dec_hi.begin(), bank.dec_hi.end(), 0.0);
  const double sum_err = std::max(std::abs(lo - std::sqrt(2.0)), std::abs(hi));
  std::mt19937_64 rng(1005);
  std::normal_distribution<double> normal;
  double worst_rec = 0.0;
  double worst_energy = 0.0;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(1024);
    for (double& v : x) v = normal(rng);
    const double e = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    for (auto ext : {wavelet::Extension::symmetric, wavelet::Extension::periodic}) {
      const wavelet::WaveletSpec spec{3, ext};
      const auto c = wavelet::dwt_decompose(x, spec);
      const auto y = wavelet::dwt_reconstruct(c, x.size(), spec);
      double err = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) err += (y[k] - x[k]) * (y[k] - x[k]);
      worst_rec = std::max(worst_rec, std::sqrt(err / e));
      if (ext == wavelet::Extension::periodic) {
        double ce = 0.0;
        for (const auto& band : c) ce += std::inner_product(band.begin(), band.end(), band.begin(), 0.0);
        worst_energy = std::max(worst_energy, std::abs(ce - e) / e);
      }
    }
  }
  return {sum_err <= 1e-10 && worst_rec < 1e-8 && worst_energy < 1e-6,
          fmt::format("filter-sum error {:.3g}, max reconstruction error {:.3g}, max energy error {:.3g}", sum_err,
                      worst_rec, worst_energy)};
}

// 6. Every injector reaches its target SNR.
Outcome noise_calibration() {
  SyntheticSpec spec;
  spec.num_classes = 4;
  spec.num_channels = 1;
  spec.segments_per_class = 25;
  spec.seed = 1006;
  const SegmentDataset ds = generate_synthetic(spec);
  std::string summary;
  bool pass = true;
  for (NoiseKind kind : kAllNoiseKinds) {
    double worst = 0.0;
    int unreachable = 0;
    const double tol = kind == NoiseKind::clipping ? 0.1 : 0.2;
    for (double snr : {0.0, 6.0, 12.0}) {
      for (std::size_t s = 0; s < ds.size(); ++s) {
        const auto& x = ds.segments[s].channels[0];
        const auto res = contam::inject(kind, x, snr, ds.sampling_rate_hz, derive_seed(1006, {s}));
        if (!res.reachable) {
          ++unreachable;
          continue;
        }
        double ps = 0.0;
        double pd = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          ps += x[i] * x[i];
          pd += (res.signal[i] - x[i]) * (res.signal[i] - x[i]);
        }
        worst = std::max(worst, std::abs(10.0 * std::log10(ps / pd) - snr));
      }
    }
    pass = pass && worst <= tol;
    summary += fmt::format("{}{} max {:.3g} dB ({} unreachable)", summary.empty() ? "" : ", ", to_string(kind),
                           worst, unreachable);
  }
  return {pass, "300 injections per kind; " + summary};
}

// 7. Metrics and statistics against hand examples and enumeration.
Outcome metrics_and_stats() {
  std::vector<std::string> failures;
  const std::vector<int> t{1, 1, 2, 2};
  const std::vector<int> p{1, 2, 2, 2};
  if (metrics::bac(t, p, 2) != 0.75) failures.push_back("bac confusion example");
  if (metrics::bac(t, t, 2) != 1.0) failures.push_back("bac perfect");
  const std::vector<int> t4{1, 2, 3, 4, 1, 2, 3, 4};
  if (metrics::bac(t4, std::vector<int>(8, 2), 4) != 0.25) failures.push_back("bac constant predictor");
  const std::vector<int> t2{1, 2, 1, 2};
  if (metrics::kappa(t2, std::vector<int>(4, 1)) != 0.0) failures.push_back("kappa constant predictor");
  if (metrics::kappa(t2, t2) != 1.0) failures.push_back("kappa identical");
  if (metrics::micro_f1(t, t) != 1.0) failures.push_back("f1 perfect");
  if (metrics::micro_f1(std::vector<int>{1, 2}, std::vector<int>{2, 1}) != 0.0) failures.push_back("f1 all wrong");

  std::mt19937_64 rng(1007);
  std::uniform_int_distribution<int> lab(1, 5);
  for (int i = 0; i < 1000; ++i) {
    std::vector<int> a(25), b(25);
    int hits = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      a[k] = lab(rng);
      b[k] = lab(rng);
      hits += a[k] == b[k];
    }
    if (metrics::micro_f1(a, b) != hits / 25.0) {
      failures.push_back("micro-f1 vs accuracy");
      break;
    }
  }

  const std::vector<double> five_a{1.1, 2.3, 3.6, 4.2, 5.9};
  const std::vector<double> five_b{1.0, 2.0, 3.0, 4.0, 5.0};
  if (std::abs(stats::wilcoxon_signed_rank(five_a, five_b).p - 2.0 / 32.0) > 1e-15)
    failures.push_back("wilcoxon n=5 example");
  std::uniform_int_distribution<int> small(-5, 5);
  double worst_w = 0.0;
  for (std::size_t n : {5U, 8U, 12U})
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> a(n), b(n);
      for (std::size_t k = 0; k < n; ++k) {
        a[k] = small(rng) * 0.1;
        b[k] = small(rng) * 0.1;
      }
      worst_w = std::max(worst_w, std::abs(stats::wilcoxon_signed_rank(a, b).p - oracle::wilcoxon_enumerated(a, b)));
    }
  if (worst_w > 1e-12) failures.push_back(fmt::format("wilcoxon vs enumeration {:.3g}", worst_w));

  const auto holm = stats::holm_adjust(std::vector<double>{0.01, 0.02, 0.04});
  if (std::abs(holm[0] - 0.03) > 1e-15 || std::abs(holm[1] - 0.04) > 1e-15 || std::abs(holm[2] - 0.04) > 1e-15)
    failures.push_back("holm example");
  std::uniform_real_distribution<double> unit;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> raw(std::uniform_int_distribution<std::size_t>(1, 12)(rng));
    for (double& v : raw) v = unit(rng) * unit(rng);
    const auto adj = stats::holm_adjust(raw);
    bool ok = true;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      ok = ok && adj[i] >= raw[i] && adj[i] <= 1.0;
      for (std::size_t j = 0; j < raw.size(); ++j)
        if (raw[i] < raw[j]) ok = ok && adj[i] <= adj[j];
    }
    if (!ok) {
      failures.push_back("holm monotonicity");
      break;
    }
  }
  std::string detail = failures.empty() ? "hand examples, 1000 micro-F1 vectors, 150 Wilcoxon enumerations, 100 "
                                          "Holm vectors"
                                        : "failed: ";
  for (std::size_t i = 0; i < failures.size(); ++i) detail += (i ? ", " : "") + failures[i];
  return {failures.empty(), detail};
}

// 8. Shape properties of the membership functions.
Outcome membership_family() {
  constexpr int kPoints = 10000;
  std::vector<std::string> failures;
  for (auto kind : fuzzy::kAllKinds) {
    const fuzzy::MembershipSpec spec{kind, 10.0};
    double last = -1.0;
    bool monotone = true;
    bool bounded = true;
    bool symmetric = true;
    for (int i = 0; i < kPoints; ++i) {
      const double t = static_cast<double>(i) / (kPoints - 1);
      const double r = fuzzy::membership(spec, t);
      bounded = bounded && r >= 0.0 && r <= 1.0;
      monotone = monotone && r >= last;
      last = r;
      if (kind == fuzzy::MembershipKind::sm || kind == fuzzy::MembershipKind::ss)
        symmetric = symmetric && std::abs(r + fuzzy::membership(spec, 1.0 - t) - 1.0) <= 1e-12;
    }
    const double r0 = fuzzy::membership(spec, 0.0);
    const double r1 = fuzzy::membership(spec, 1.0);
    bool endpoints = true;
    if (kind == fuzzy::MembershipKind::cr0)
      endpoints = r0 == 1.0 && r1 == 1.0;
    else if (kind == fuzzy::MembershipKind::cr)
      endpoints = r0 == 0.0 && r1 == 1.0 && fuzzy::membership(spec, 0.5) == 1.0;
    else
      endpoints = r0 == 0.0 && r1 == 1.0;
    const auto name = std::string(fuzzy::to_string(kind));
    if (!monotone) failures.push_back(name + " monotonicity");
    if (!bounded) failures.push_back(name + " range");
    if (!endpoints) failures.push_back(name + " endpoints");
    if (!symmetric) failures.push_back(name + " symmetry");
    if (kind == fuzzy::MembershipKind::lp) {
      const double h = 1e-7;
      const double left = (fuzzy::membership(spec, 0.5) - fuzzy::membership(spec, 0.5 - h)) / h;
      const double right = (fuzzy::membership(spec, 0.5 + h) - fuzzy::membership(spec, 0.5)) / h;
      if (std::abs(left - 4.0 / 3.0) > 1e-6 || std::abs(right - 4.0 / 3.0) > 1e-6) failures.push_back("lp C1 joint");
      if (std::abs(fuzzy::membership(spec, 0.5) - 2.0 / 3.0) > 1e-15) failures.push_back("lp midpoint");
    }
  }
  std::string detail = "six kinds on a 10^4-point grid";
  if (!failures.empty()) detail += "; failed:";
  for (const auto& f : failures) detail += " " + f;
  return {failures.empty(), detail};
}

eval::ExperimentConfig benchmark_config(std::size_t jobs) {
  eval::ExperimentConfig cfg;
  cfg.experiment = eval::ExperimentId::exp3;
  cfg.snr_grid = {0.0, 12.0};
  cfg.folds = 10;
  cfg.repeats = 4;
  cfg.seed = 1;
  cfg.jobs = jobs;
  return cfg;
}

std::vector<SegmentDataset> benchmark_data() {
  SyntheticSpec spec;  // M = 4, L = 8, 40 segments per class
  spec.seed = derive_seed(1, {stream::synthetic});
  return {generate_synthetic(spec)};
}

double mean_bac(const eval::EvaluationReport& rep, const std::string& label, double snr) {
  for (const auto& cs : rep.summaries) {
    if (cs.criterion != "bac") continue;
    for (const auto& s : cs.per_snr) {
      if (s.snr_db != snr) continue;
      for (std::size_t m = 0; m < rep.methods.size(); ++m)
        if (rep.methods[m].label == label) return s.mean[m];
    }
  }
  throw std::runtime_error("no BAC summary for " + label);
}

// 9. End-to-end trend on the synthetic benchmark.
Outcome end_to_end_trend(eval::EvaluationReport& out) {
  const auto t0 = Clock::now();
  const auto data = benchmark_data();
  out = eval::run_experiment(benchmark_config(default_jobs()), data);
  const double fknn0 = mean_bac(out, "FKNN", 0.0);
  const double b0 = mean_bac(out, "B", 0.0);
  const double aw0 = mean_bac(out, "AW", 0.0);
  const double fknn12 = mean_bac(out, "FKNN", 12.0);
  const double b12 = mean_bac(out, "B", 12.0);
  const bool pass = fknn0 >= b0 + 0.05 && fknn12 >= b12 - 0.05 && fknn0 >= aw0;
  return {pass, fmt::format("SNR 0: FKNN {:.4f}, B {:.4f}, AW {:.4f}; SNR 12: FKNN {:.4f}, B {:.4f}; {:.1f} s", fknn0,
                            b0, aw0, fknn12, b12, seconds_since(t0))};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Two runs with the same seed give byte-identical outputs.
Outcome determinism(const eval::EvaluationReport& first) {
  testing_support::TempDir dir("acceptance");
  eval::write_report(first, dir.path() / "a");
  const auto data = benchmark_data();
  eval::write_report(eval::run_experiment(benchmark_config(1), data), dir.path() / "b");
  std::vector<std::string> files{"records.csv"};
  for (const char* crit : {"bac", "kappa", "f1"}) files.push_back(fmt::format("stats_{}.json", crit));
  std::vector<std::string> differing;
  for (const auto& f : files) {
    const std::string a = slurp(dir.path() / "a" / f);
    if (a.empty() || a != slurp(dir.path() / "b" / f)) differing.push_back(f);
  }
  std::string detail = "records.csv and stats_*.json compared across two runs (parallel vs single thread)";
  for (const auto& f : differing) detail += "; differs: " + f;
  return {differing.empty(), detail};
}

Outcome guarded(const std::function<Outcome()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  eval::EvaluationReport benchmark;
  bool benchmark_ran = false;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"fuzzy KNN oracle equivalence", oracle_equivalence},
      {"unit-membership reduction", reduction_identity},
      {"channel silencing", channel_silencing},
      {"one-class SVM nu-property", nu_property},
      {"wavelet filter bank", wavelet_checks},
      {"noise calibration", noise_calibration},
      {"metrics and statistics", metrics_and_stats},
      {"membership family", membership_family},
      {"end-to-end trend",
       [&] {
         auto o = end_to_end_trend(benchmark);
         benchmark_ran = true;
         return o;
       }},
      {"determinism",
       [&]() -> Outcome {
         if (!benchmark_ran) return {false, "benchmark run unavailable"};
         return determinism(benchmark);
       }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Outcome o = guarded(criteria[i].second);
    failed += !o.pass;
    std::printf("criterion %zu [%s] %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
