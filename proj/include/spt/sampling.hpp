#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spt/corpus.hpp"
#include "spt/rng.hpp"

namespace spt {

// Class-ratio-preserving random split. The sample receives round(n * pos_ratio)
// positives (at least 1 when positives exist and n >= 2) and the rest negatives,
// each stratum drawn uniformly without replacement. Document order is preserved
// in both halves.
inline std::pair<Corpus, Corpus> stratified_sample(const Corpus& corpus, std::size_t n,
                                                   std::uint64_t seed) {
  if (!requires_labels(corpus.kind))
    throw std::invalid_argument("stratified_sample requires a labeled corpus");
  validate_corpus(corpus);
  const std::size_t total = corpus.size();
  if (n == 0 || n > total)
    throw std::invalid_argument("sample size " + std::to_string(n) +
                                " out of range for corpus of " + std::to_string(total));

  std::vector<std::size_t> pos_idx, neg_idx;
  for (std::size_t i = 0; i < total; ++i)
    (corpus.documents[i].label == 1 ? pos_idx : neg_idx).push_back(i);

  const double pos_ratio = static_cast<double>(pos_idx.size()) / static_cast<double>(total);
  std::size_t n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * pos_ratio));
  if (n_pos == 0 && !pos_idx.empty() && n >= 2) n_pos = 1;
  n_pos = std::min(n_pos, pos_idx.size());
  std::size_t n_neg = n - std::min(n_pos, n);
  if (n_neg > neg_idx.size()) {
    n_pos += n_neg - neg_idx.size();
    n_neg = neg_idx.size();
  }

  Rng rng(seed);
  std::vector<bool> chosen(total, false);
  for (std::size_t k : rng.sample_indices(pos_idx.size(), n_pos)) chosen[pos_idx[k]] = true;
  for (std::size_t k : rng.sample_indices(neg_idx.size(), n_neg)) chosen[neg_idx[k]] = true;

  Corpus sample, remainder;
  sample.kind = corpus.kind;
  remainder.kind = corpus.kind;
  for (std::size_t i = 0; i < total; ++i)
    (chosen[i] ? sample : remainder).documents.push_back(corpus.documents[i]);
  return {std::move(sample), std::move(remainder)};
}

// Class-conditional unigram corpus. Each class samples tokens uniformly from
// its own half of the vocabulary extended by a shared region of
// round(overlap * vocab_size) tokens straddling the boundary: overlap = 0
// gives disjoint supports, overlap = 1 gives identical class-conditionals.
// Documents are shuffled before ids are assigned so position leaks nothing.
inline Corpus gen_synthetic(std::size_t vocab_size, std::size_t n_pos, std::size_t n_neg,
                            double overlap, std::size_t doc_len, std::uint64_t seed) {
  if (vocab_size < 4) throw std::invalid_argument("vocab_size must be >= 4");
  if (doc_len < 1) throw std::invalid_argument("doc_len must be >= 1");
  if (!(overlap >= 0.0 && overlap <= 1.0))
    throw std::invalid_argument("overlap must be in [0, 1]");

  const std::size_t half = vocab_size / 2;
  const std::size_t shared =
      static_cast<std::size_t>(std::llround(overlap * static_cast<double>(vocab_size)));
  const std::size_t pos_end = std::min(vocab_size, half + (shared - shared / 2));
  const std::size_t neg_begin = half - std::min(half, shared / 2);

  Rng rng(seed);
  auto make_doc = [&](std::size_t lo, std::size_t hi, int label) {
    Document doc;
    doc.label = label;
    std::string text;
    for (std::size_t t = 0; t < doc_len; ++t) {
      if (t) text.push_back(' ');
      text += "w" + std::to_string(lo + rng.bounded(hi - lo));
    }
    doc.text = std::move(text);
    return doc;
  };

  Corpus corpus;
  corpus.kind = CorpusKind::Labeled;
  corpus.documents.reserve(n_pos + n_neg);
  for (std::size_t i = 0; i < n_pos; ++i)
    corpus.documents.push_back(make_doc(0, pos_end, 1));
  for (std::size_t i = 0; i < n_neg; ++i)
    corpus.documents.push_back(make_doc(neg_begin, vocab_size, 0));
  rng.shuffle(corpus.documents);

  char id[32];
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    std::snprintf(id, sizeof(id), "d%06zu", i);
    corpus.documents[i].id = id;
  }
  return corpus;
}

}  // namespace spt
