#include "myofuzz/metrics.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "myofuzz/error.hpp"

namespace myofuzz::metrics {
namespace {

void check_pair(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw ContractError("metric: label vectors differ in length");
  if (truth.empty()) throw ContractError("metric: empty label vectors");
}

}  // namespace

double bac(std::span<const int> truth, std::span<const int> predicted, int num_classes) {
  check_pair(truth, predicted);
  std::vector<std::size_t> support(static_cast<std::size_t>(num_classes) + 1, 0);
  std::vector<std::size_t> hits(support.size(), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 1 || truth[i] > num_classes)
      throw ContractError(fmt::format("bac: label {} outside 1..{}", truth[i], num_classes));
    ++support[static_cast<std::size_t>(truth[i])];
    if (predicted[i] == truth[i]) ++hits[static_cast<std::size_t>(truth[i])];
  }
  double sum = 0.0;
  int present = 0;
  for (int j = 1; j <= num_classes; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (support[uj] == 0) continue;
    sum += static_cast<double>(hits[uj]) / static_cast<double>(support[uj]);
    ++present;
  }
  if (present < num_classes)
    spdlog::warn("bac: {} of {} classes absent from the reference labels", num_classes - present, num_classes);
  return sum / present;
}

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
  check_pair(truth, predicted);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double kappa(std::span<const int> truth, std::span<const int> predicted) {
  check_pair(truth, predicted);
  const auto n = static_cast<double>(truth.size());
  std::map<int, double> row, col;
  double agree = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    row[truth[i]] += 1.0;
    col[predicted[i]] += 1.0;
    agree += truth[i] == predicted[i];
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, count] : row) {
    const auto it = col.find(label);
    if (it != col.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) return 0.0;
  return (po - pe) / (1.0 - pe);
}

double micro_f1(std::span<const int> truth, std::span<const int> predicted) {
  check_pair(truth, predicted);
  std::map<int, std::size_t> tp, fp, fn;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == predicted[i]) {
      ++tp[truth[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[truth[i]];
    }
  }
  double stp = 0.0, sfp = 0.0, sfn = 0.0;
  for (const auto& [k, v] : tp) stp += static_cast<double>(v);
  for (const auto& [k, v] : fp) sfp += static_cast<double>(v);
  for (const auto& [k, v] : fn) sfn += static_cast<double>(v);
  const double denom = 2.0 * stp + sfp + sfn;
  const double f1 = denom == 0.0 ? 0.0 : 2.0 * stp / denom;
  if (std::fabs(f1 - accuracy(truth, predicted)) > 1e-12)
    throw NumericalError("micro-F1 disagrees with accuracy on single-label data");
  return f1;
}

}  // namespace myofuzz::metrics
