#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace myofuzz {

// Stratified k-fold assignment: within each class the members are shuffled
// and dealt round-robin, continuing the dealer position across classes so
// total fold sizes also stay within one of each other. Returns fold index per
// sample. Labels are 1..num_classes.
std::vector<std::size_t> stratified_fold_assignment(std::span<const int> labels, int num_classes,
                                                    std::size_t folds, std::uint64_t seed);

// Indices (train, test) for one fold of an assignment.
struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
FoldSplit split_fold(std::span<const std::size_t> assignment, std::size_t fold);

}  // namespace myofuzz
