// Sparse document corpus: bag-of-words ingestion, tf-idf feature build,
// and a versioned binary cache.
//
// Canonical term ids are 0-based internally and ordered by ascending document
// frequency (ties by ascending original id); every document vector is L2
// normalized. External formats (bag-of-words text, assignment files) use the
// conventional 1-based ids.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace skm {

struct SparseVecView {
  const uint32_t* terms;  // canonical ids, strictly increasing
  const double* vals;     // all > 0
  uint32_t nt;            // number of distinct terms
};

struct RawDoc {
  // (original 1-based term id, count), as parsed; sorted by term id after ingest
  std::vector<std::pair<uint32_t, uint32_t>> items;
};

struct RawCorpus {
  uint64_t n_docs = 0;   // declared document count
  uint64_t n_terms = 0;  // declared vocabulary size
  std::vector<RawDoc> docs;
  std::vector<uint64_t> df;  // per original term (slot id-1)
  std::vector<uint64_t> tf;  // total occurrences per original term
};

struct Corpus {
  uint64_t n_docs = 0;   // N, after removals
  uint64_t n_terms = 0;  // D, canonical term count
  std::vector<uint64_t> offsets;    // N+1, CSR row starts
  std::vector<uint32_t> terms;      // canonical 0-based ids
  std::vector<double> vals;         // tf-idf weights, unit norm per row
  std::vector<uint64_t> df;         // per canonical term, non-decreasing
  std::vector<uint32_t> orig_term;  // canonical id -> original 1-based id
  std::vector<uint32_t> doc_ids;    // original 1-based ids of kept documents
  double avg_nt = 0.0;              // mean distinct terms per document
  uint64_t removed_docs = 0;        // dropped because every term had idf 0

  uint32_t nt(std::size_t i) const {
    return static_cast<uint32_t>(offsets[i + 1] - offsets[i]);
  }
  SparseVecView doc(std::size_t i) const {
    return SparseVecView{terms.data() + offsets[i], vals.data() + offsets[i], nt(i)};
  }
  uint64_t nnz() const { return offsets.empty() ? 0 : offsets.back(); }
};

// Parses the common sparse bag-of-words text layout: three header lines
// (N, D, NNZ) followed by NNZ lines of "docID termID count", all 1-based.
// Throws parse_error with the offending line number on malformed input,
// out-of-range ids, duplicate (doc, term) pairs, or non-positive counts,
// and when a declared document has no entries at all.
RawCorpus ingest_bag_of_words(std::istream& in);

// tf-idf with natural-log idf and L2 normalization. Terms occurring in every
// document carry zero weight and are removed; documents left empty by that
// removal are dropped with a warning line on `warnings` (if given). Canonical
// term order is ascending df with ties by ascending original id.
Corpus build_features(const RawCorpus& raw, std::ostream* warnings = nullptr);

// Content hash over the canonical corpus (identical regardless of whether the
// corpus came from text ingestion or the binary cache).
uint64_t corpus_hash(const Corpus& c);

// Versioned little-endian binary cache. Loading verifies magic and version.
void save_corpus(const Corpus& c, const std::string& path);
Corpus load_corpus(const std::string& path);

uint64_t fnv1a64(const void* data, std::size_t len, uint64_t h = 1469598103934665603ull);

}  // namespace skm
