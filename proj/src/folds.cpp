#include "myofuzz/folds.hpp"

#include <algorithm>
#include <random>

#include "myofuzz/error.hpp"

namespace myofuzz {

std::vector<std::size_t> stratified_fold_assignment(std::span<const int> labels, int num_classes,
                                                    std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > num_classes) throw DataError("fold assignment: label out of range");
    by_class[static_cast<std::size_t>(labels[i] - 1)].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out(labels.size(), 0);
  std::size_t dealer = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t idx : members) out[idx] = dealer++ % folds;
  }
  return out;
}

FoldSplit split_fold(std::span<const std::size_t> assignment, std::size_t fold) {
  FoldSplit s;
  for (std::size_t i = 0; i < assignment.size(); ++i) (assignment[i] == fold ? s.test : s.train).push_back(i);
  return s;
}

}  // namespace myofuzz
