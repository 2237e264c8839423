#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spt/corpus.hpp"

namespace spt {

// FNV-1a 64-bit. The bucketing hash is pinned to these constants so that
// feature vectors are bit-identical across machines and standard libraries.
inline constexpr std::uint64_t kFnv64Offset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnv64Prime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = kFnv64Offset;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnv64Prime;
  }
  return h;
}

// Sparse L2-normalized term-frequency vector over a hashed index space.
// Entries are sorted by index and unique; the norm is 1 unless the vector is empty.
struct FeatureVector {
  std::int32_t dim = 0;
  std::vector<std::pair<std::int32_t, double>> entries;
};

inline FeatureVector hash_features(std::span<const std::string> tokens, std::int32_t dim) {
  if (dim < 2) throw std::invalid_argument("feature dimension must be >= 2");
  std::map<std::int32_t, double> counts;  // ordered: keeps summation deterministic
  for (const auto& token : tokens)
    counts[static_cast<std::int32_t>(fnv1a64(token) % static_cast<std::uint64_t>(dim))] += 1.0;
  double sum_sq = 0.0;
  for (const auto& [index, count] : counts) sum_sq += count * count;
  FeatureVector vec;
  vec.dim = dim;
  vec.entries.reserve(counts.size());
  const double inv_norm = sum_sq > 0.0 ? 1.0 / std::sqrt(sum_sq) : 0.0;
  for (const auto& [index, count] : counts) vec.entries.emplace_back(index, count * inv_norm);
  return vec;
}

inline FeatureVector featurize(std::string_view text, std::int32_t dim) {
  const auto tokens = tokenize(text);
  return hash_features(tokens, dim);
}

inline std::vector<FeatureVector> featurize_corpus(const Corpus& corpus, std::int32_t dim) {
  std::vector<FeatureVector> features;
  features.reserve(corpus.size());
  for (const auto& doc : corpus.documents) features.push_back(featurize(doc.text, dim));
  return features;
}

}  // namespace spt
