#include "myofuzz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "myofuzz/error.hpp"

namespace myofuzz::stats {

namespace {

// Average ranks (1-based) of `v` in ascending order.
std::vector<double> rank_ascending(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("wilcoxon_signed_rank: samples differ in length");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (const double d = a[i] - b[i]; d != 0.0) diff.push_back(d);
  WilcoxonResult out;
  out.n = diff.size();
  if (diff.empty()) return out;

  std::vector<double> mag(diff.size());
  std::ranges::transform(diff, mag.begin(), [](double d) { return std::abs(d); });
  const std::vector<double> ranks = rank_ascending(mag);
  for (std::size_t i = 0; i < diff.size(); ++i) (diff[i] > 0 ? out.w_plus : out.w_minus) += ranks[i];

  const auto n = static_cast<double>(out.n);
  if (out.n <= kExactLimit) {
    // Averaged ranks are multiples of 1/2, so doubled ranks are integers and
    // the null distribution of 2 W+ is a subset-sum count over 2^n patterns.
    std::vector<std::size_t> r2(ranks.size());
    std::ranges::transform(ranks, r2.begin(), [](double r) { return static_cast<std::size_t>(std::lround(2 * r)); });
    const std::size_t total = std::accumulate(r2.begin(), r2.end(), std::size_t{0});
    std::vector<double> count(total + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t r : r2)
      for (std::size_t s = total; s >= r; --s) {
        count[s] += count[s - r];
        if (s == r) break;
      }
    const auto observed = static_cast<std::size_t>(std::lround(2 * out.w_plus));
    const double patterns = std::ldexp(1.0, static_cast<int>(out.n));
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (s <= observed) lower += count[s];
      if (s >= observed) upper += count[s];
    }
    out.p = std::min(1.0, 2.0 * std::min(lower, upper) / patterns);
    out.exact = true;
    return out;
  }

  out.exact = false;
  const double mean = n * (n + 1) / 4;
  double var = n * (n + 1) * (2 * n + 1) / 24;
  std::vector<double> sorted = mag;
  std::ranges::sort(sorted);
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48;
    i = j;
  }
  if (var <= 0.0) return out;
  const double z = (out.w_plus - mean) / std::sqrt(var);
  out.p = std::min(1.0, std::erfc(std::abs(z) / std::numbers::sqrt2));
  return out;
}

std::vector<double> holm_adjust(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    running = std::max(running, std::min(1.0, static_cast<double>(m - i) * p[order[i]]));
    out[order[i]] = running;
  }
  return out;
}

std::vector<double> rank_descending(std::span<const double> scores) {
  std::vector<double> neg(scores.size());
  std::ranges::transform(scores, neg.begin(), [](double s) { return -s; });
  return rank_ascending(neg);
}

std::vector<double> average_ranks(const std::vector<std::vector<double>>& scores) {
  if (scores.empty()) return {};
  const std::size_t cases = scores.front().size();
  for (const auto& row : scores)
    if (row.size() != cases) throw ContractError("average_ranks: ragged score table");
  std::vector<double> mean(scores.size(), 0.0);
  if (cases == 0) return mean;
  std::vector<double> column(scores.size());
  for (std::size_t c = 0; c < cases; ++c) {
    for (std::size_t m = 0; m < scores.size(); ++m) column[m] = scores[m][c];
    const auto r = rank_descending(column);
    for (std::size_t m = 0; m < scores.size(); ++m) mean[m] += r[m];
  }
  for (double& v : mean) v /= static_cast<double>(cases);
  return mean;
}

}  // namespace myofuzz::stats
