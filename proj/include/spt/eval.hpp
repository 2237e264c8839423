#pragma once

#include <array>
#include <vector>

#include "spt/classifier.hpp"
#include "spt/corpus.hpp"
#include "spt/features.hpp"
#include "spt/metrics.hpp"

namespace spt {

inline std::vector<int> gold_labels(const Corpus& corpus) {
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const auto& doc : corpus.documents) labels.push_back(doc.label.value_or(0));
  return labels;
}

inline std::vector<int> predict_labels(const ClassifierState& model,
                                       const std::vector<FeatureVector>& features) {
  std::vector<int> labels;
  labels.reserve(features.size());
  for (const auto& x : features) labels.push_back(hard_label(predict_proba(model, x, 1.0)));
  return labels;
}

inline Prf evaluate_model(const ClassifierState& model, const Corpus& test,
                          const std::vector<FeatureVector>& test_features) {
  return prf_positive(predict_labels(model, test_features), gold_labels(test));
}

inline Prf evaluate_model(const ClassifierState& model, const Corpus& test) {
  return evaluate_model(model, test, featurize_corpus(test, model.dim));
}

inline std::vector<int> predict_labels_ensemble(const ClassifierState& m1,
                                                const ClassifierState& m2,
                                                const std::vector<FeatureVector>& features) {
  std::vector<int> labels;
  labels.reserve(features.size());
  for (const auto& x : features)
    labels.push_back(
        hard_label(ensemble_predict(predict_proba(m1, x, 1.0), predict_proba(m2, x, 1.0))));
  return labels;
}

inline Prf evaluate_ensemble(const ClassifierState& m1, const ClassifierState& m2,
                             const Corpus& test,
                             const std::vector<FeatureVector>& test_features) {
  return prf_positive(predict_labels_ensemble(m1, m2, test_features), gold_labels(test));
}

}  // namespace spt
