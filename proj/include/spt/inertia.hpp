#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spt/classifier.hpp"
#include "spt/features.hpp"

namespace spt {

// First two sample moments of the winning-class probabilities, tracked
// separately for positive-assigned and negative-assigned pseudo-labels.
// A count of zero flags that class's mean/std as undefined (NaN).
struct ClassMoments {
  std::size_t pos_count = 0;
  std::size_t neg_count = 0;
  double pos_mean = std::numeric_limits<double>::quiet_NaN();
  double pos_std = std::numeric_limits<double>::quiet_NaN();
  double neg_mean = std::numeric_limits<double>::quiet_NaN();
  double neg_std = std::numeric_limits<double>::quiet_NaN();
};

// One soft-labeled document. prob_base/prob_tempered are the positive-class
// probabilities at temperature 1 and at the owning set's temperature; the two
// stay consistent through the logit-gap relation (see temper_probability).
struct PseudoLabel {
  std::string doc_id;
  FeatureVector features;
  double prob_base = 0.5;
  double prob_tempered = 0.5;
  int assigned = 0;  // argmax class recorded at labeling time; ties go negative
};

struct PseudoLabelSet {
  double temperature = 1.0;
  std::vector<PseudoLabel> items;
};

inline double winning_prob(const PseudoLabel& label) {
  return label.assigned == 1 ? label.prob_base : 1.0 - label.prob_base;
}

// Population moments (divide by the class count) of the winning-class probabilities.
inline ClassMoments compute_moments(const PseudoLabelSet& labels) {
  double pos_sum = 0.0, neg_sum = 0.0;
  std::size_t n = 0, m = 0;
  for (const auto& item : labels.items) {
    if (item.assigned == 1) {
      pos_sum += winning_prob(item);
      ++n;
    } else {
      neg_sum += winning_prob(item);
      ++m;
    }
  }
  ClassMoments moments;
  moments.pos_count = n;
  moments.neg_count = m;
  if (n > 0) {
    moments.pos_mean = pos_sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& item : labels.items)
      if (item.assigned == 1) {
        const double d = winning_prob(item) - moments.pos_mean;
        ss += d * d;
      }
    moments.pos_std = std::sqrt(ss / static_cast<double>(n));
  }
  if (m > 0) {
    moments.neg_mean = neg_sum / static_cast<double>(m);
    double ss = 0.0;
    for (const auto& item : labels.items)
      if (item.assigned != 1) {
        const double d = winning_prob(item) - moments.neg_mean;
        ss += d * d;
      }
    moments.neg_std = std::sqrt(ss / static_cast<double>(m));
  }
  return moments;
}

// Per-class linear interpolation of mean and standard deviation:
// target = alpha * prev + (1 - alpha) * curr. A class that is empty on either
// side passes through from curr.
inline ClassMoments blend_moments(const ClassMoments& prev, const ClassMoments& curr,
                                  double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha must be in [0, 1]");
  ClassMoments target = curr;
  if (prev.pos_count > 0 && curr.pos_count > 0) {
    target.pos_mean = alpha * prev.pos_mean + (1.0 - alpha) * curr.pos_mean;
    target.pos_std = alpha * prev.pos_std + (1.0 - alpha) * curr.pos_std;
  }
  if (prev.neg_count > 0 && curr.neg_count > 0) {
    target.neg_mean = alpha * prev.neg_mean + (1.0 - alpha) * curr.neg_mean;
    target.neg_std = alpha * prev.neg_std + (1.0 - alpha) * curr.neg_std;
  }
  return target;
}

// Affine standardization of each winning-class probability from the current
// moments onto the target moments:
//   p_hat = target_mean + (p - curr_mean) * target_std / curr_std
// (shift only when curr_std is zero), clamped to [0.5, 1]. Class assignments
// are carried over unchanged; the tempered probability is recomputed from the
// transformed base value. `curr` must be the moments of exactly these labels.
inline PseudoLabelSet project(PseudoLabelSet labels, const ClassMoments& curr,
                              const ClassMoments& target) {
  // an unchanged class maps through the exact identity, not a rounded one
  const bool pos_identity = curr.pos_count == 0 || (target.pos_mean == curr.pos_mean &&
                                                    target.pos_std == curr.pos_std);
  const bool neg_identity = curr.neg_count == 0 || (target.neg_mean == curr.neg_mean &&
                                                    target.neg_std == curr.neg_std);
  for (auto& item : labels.items) {
    const bool positive = item.assigned == 1;
    if (positive ? pos_identity : neg_identity) continue;
    const std::size_t count = positive ? curr.pos_count : curr.neg_count;
    if (count == 0) continue;
    const double c_mean = positive ? curr.pos_mean : curr.neg_mean;
    const double c_std = positive ? curr.pos_std : curr.neg_std;
    const double t_mean = positive ? target.pos_mean : target.neg_mean;
    const double t_std = positive ? target.pos_std : target.neg_std;
    const double w = winning_prob(item);
    double projected = c_std > 0.0 ? t_mean + (w - c_mean) * (t_std / c_std)
                                   : w + (t_mean - c_mean);
    projected = std::clamp(projected, 0.5, 1.0);
    item.prob_base = positive ? projected : 1.0 - projected;
    item.prob_tempered = temper_probability(item.prob_base, labels.temperature);
  }
  return labels;
}

// Full inertia step. Without previous moments the labels pass through untouched
// and their raw moments seed the chain; otherwise blend then project, and the
// moments of the transformed labels become the next iteration's `prev`.
inline std::pair<PseudoLabelSet, ClassMoments> apply_inertia(
    const std::optional<ClassMoments>& prev, PseudoLabelSet labels, double alpha) {
  if (!prev) {
    ClassMoments raw = compute_moments(labels);
    return {std::move(labels), raw};
  }
  const ClassMoments curr = compute_moments(labels);
  const ClassMoments target = blend_moments(*prev, curr, alpha);
  PseudoLabelSet transformed = project(std::move(labels), curr, target);
  ClassMoments applied = compute_moments(transformed);
  return {std::move(transformed), applied};
}

}  // namespace spt
