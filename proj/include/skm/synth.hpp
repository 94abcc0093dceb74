// Synthetic bag-of-words corpora with a Zipfian vocabulary and planted
// topics. Every term follows a power-law base weight by rank; each document
// draws a topic and samples its tokens from the base weights with the
// topic's own terms boosted. Output is deterministic per seed.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace skm {

struct SynthConfig {
  uint32_t n_docs = 1000;
  uint32_t vocab = 2000;
  uint32_t topics = 10;
  double alpha = 1.0;     // power-law exponent of the base term weights
  double boost = 20.0;    // weight multiplier for a topic's own terms
  double avg_len = 60.0;  // mean token count per document
  uint32_t min_len = 5;
  uint64_t seed = 1;
};

struct SynthCorpus {
  SynthConfig config;
  std::vector<uint32_t> labels;  // planted topic per document
  // Aggregated counts per document: (1-based term id, count), ascending ids.
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> docs;
  uint64_t nnz = 0;
};

SynthCorpus generate_synth(const SynthConfig& cfg);

// Three header lines (documents, vocabulary, entry count), then one
// "docID termID count" line per entry.
void write_bag_of_words(const SynthCorpus& s, std::ostream& out);

}  // namespace skm
