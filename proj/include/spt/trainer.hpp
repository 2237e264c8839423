#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "spt/classifier.hpp"
#include "spt/config.hpp"
#include "spt/rng.hpp"
#include "spt/schedule.hpp"

namespace spt {

// Fixed stream tags so every shuffle and draw has its own derived seed.
namespace seeds {
inline constexpr std::uint64_t kSupervisedShuffle = 0x01;
inline constexpr std::uint64_t kIterationSampleBase = 0x2000;
inline constexpr std::uint64_t kIterationShuffleBase = 0x3000;
inline std::uint64_t iteration_sample(int iteration) {
  return kIterationSampleBase + static_cast<std::uint64_t>(iteration);
}
inline std::uint64_t iteration_shuffle(int iteration) {
  return kIterationShuffleBase + static_cast<std::uint64_t>(iteration);
}
}  // namespace seeds

inline long batches_per_epoch(std::size_t n, int batch_size) {
  return n == 0 ? 0
               : static_cast<long>((n + static_cast<std::size_t>(batch_size) - 1) /
                                   static_cast<std::size_t>(batch_size));
}

// Shuffled mini-batch passes over `items`, one SGD step per batch with the
// learning rate read off the schedule at the running global batch index.
// Returns the batch index after the stage.
inline long run_stage(ClassifierState& state, std::span<const BatchItem> items,
                      const LossSpec& spec, const ClassifierState* teacher,
                      const ScheduleSpec& schedule, long t0, int epochs, int batch_size,
                      Rng& shuffle_rng, Gradients& grads) {
  long t = t0;
  if (items.empty()) return t;
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<BatchItem> batch;
  batch.reserve(batch_size);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      const std::size_t end = std::min(order.size(), start + batch_size);
      for (std::size_t i = start; i < end; ++i) batch.push_back(items[order[i]]);
      const double eta = lr_at(schedule, t);
      loss_and_grads(state, batch, spec, teacher, grads);
      sgd_step(state, grads, eta);
      ++t;
    }
  }
  return t;
}

}  // namespace spt
