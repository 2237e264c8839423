#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace spt {

// Right-trapezoidal learning rate: a constant plateau over the pseudo-label
// batches followed by a linear descent over the labeled batches.
struct ScheduleSpec {
  double initial_rate = 0.1;  // R
  long pseudo_batches = 0;    // b_C, plateau length
  long labeled_batches = 1;   // b_L, descent length (total across finetune epochs)
};

inline void validate(const ScheduleSpec& spec) {
  if (!(std::isfinite(spec.initial_rate) && spec.initial_rate > 0.0))
    throw std::invalid_argument("schedule initial rate must be positive");
  if (spec.pseudo_batches < 0)
    throw std::invalid_argument("schedule pseudo batch count must be >= 0");
  if (spec.labeled_batches < 1)
    throw std::invalid_argument("schedule labeled batch count must be >= 1");
}

// Learning rate for the zero-based global batch index t.
// Plateau: eta = R for t < b_C. Descent: eta = R - R * (t - b_C) / b_L, so the
// first labeled batch still sees R and the final batch sees R / b_L (never 0).
inline double lr_at(const ScheduleSpec& spec, long t) {
  validate(spec);
  const long total = spec.pseudo_batches + spec.labeled_batches;
  if (t < 0 || t >= total)
    throw std::out_of_range("batch index " + std::to_string(t) + " outside schedule of " +
                            std::to_string(total) + " batches");
  if (t < spec.pseudo_batches) return spec.initial_rate;
  const double progress = static_cast<double>(t - spec.pseudo_batches) /
                          static_cast<double>(spec.labeled_batches);
  return spec.initial_rate - spec.initial_rate * progress;
}

}  // namespace spt
