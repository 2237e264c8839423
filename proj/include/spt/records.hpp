#pragma once

#include <cstddef>

#include "spt/inertia.hpp"

namespace spt {

// Telemetry for one bootstrapping iteration: what the learner consumed and how
// the freshly trained model scored on the held-out test corpus.
struct IterationRecord {
  int iteration = 0;            // 1-based
  std::size_t sample_size = 0;  // capped at |U|
  ClassMoments moments;         // moments of the labels actually used for training
  bool has_eval = false;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double lr_first = 0.0;  // schedule endpoints of this iteration's training
  double lr_last = 0.0;
};

}  // namespace spt
