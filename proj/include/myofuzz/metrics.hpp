#pragma once

#include <span>

namespace myofuzz::metrics {

// Mean per-class recall over classes present in `truth`; absent classes are
// skipped with a warning. Labels are 1..num_classes.
double bac(std::span<const int> truth, std::span<const int> predicted, int num_classes);

// Cohen's kappa with marginal-product chance agreement; 0 when p_e == 1.
double kappa(std::span<const int> truth, std::span<const int> predicted);

// Micro-averaged F1. For single-label data this is plain accuracy, which is
// checked internally.
double micro_f1(std::span<const int> truth, std::span<const int> predicted);

double accuracy(std::span<const int> truth, std::span<const int> predicted);

}  // namespace myofuzz::metrics
