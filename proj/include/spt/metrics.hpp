#pragma once

#include <span>
#include <stdexcept>

namespace spt {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision/recall/F1 of the positive class. A zero denominator yields 0 for
// the affected metric so early degenerate models still aggregate.
inline Prf prf_positive(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("prediction/gold length mismatch");
  if (predicted.empty()) throw std::invalid_argument("empty label vectors");
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == 1 && gold[i] == 1) ++tp;
    else if (predicted[i] == 1) ++fp;
    else if (gold[i] == 1) ++fn;
  }
  Prf out;
  out.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  out.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  out.f1 = out.precision + out.recall > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

}  // namespace spt
