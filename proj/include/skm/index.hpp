// Mean set and the structured mean-inverted index.
//
// The index stores, per term, the (centroid, value) entries of all means with
// a nonzero weight there. A term-id threshold t_th and a value threshold v_th
// split the entries into three regions:
//   region 1: term id below t_th (scanned exactly)
//   region 2: term id >= t_th and value >= v_th (scanned exactly)
//   region 3: term id >= t_th and value < v_th (covered by an upper bound,
//             completed from a dense partial index only for surviving
//             candidates)
// Within each term the entries are grouped so that filtered scans can stop at
// a precomputed count: means whose cluster changed since the previous
// iteration ("moving") come first, each group in ascending centroid id.
//
// Values in the index are stored divided by v_th and object values are
// multiplied by v_th, which leaves every product unchanged but turns the
// region-3 upper bound into a pure addition.
#pragma once

#include <cstdint>
#include <vector>

#include "skm/corpus.hpp"

namespace skm {

struct StructuralParams {
  uint32_t t_th = 1;  // 1-based; D+1 puts every term in region 1
  double v_th = 1.0;  // in (0, 1]

  // 0-based index of the first term at or above the threshold.
  uint32_t r1_end() const { return t_th - 1; }
};

struct MeanSet {
  uint32_t k = 0;
  uint64_t d = 0;
  std::vector<double> mu;        // k rows by d, unscaled, unit L2 rows
  std::vector<uint64_t> sizes;   // member count per cluster
  std::vector<uint8_t> fresh;    // false when the previous mean was retained
  double v_th = 1.0;             // scaling applied by index build and similarities

  const double* row(uint32_t j) const { return mu.data() + static_cast<std::size_t>(j) * d; }
  double* row(uint32_t j) { return mu.data() + static_cast<std::size_t>(j) * d; }
};

struct MeanInvertedIndex {
  uint32_t k = 0;
  uint64_t d = 0;
  StructuralParams params;
  std::vector<uint64_t> offsets;  // d+1
  std::vector<uint32_t> ids;      // centroid ids per entry
  std::vector<double> vals;       // scaled values (v / v_th)
  std::vector<uint32_t> mf;       // entries per term
  std::vector<uint32_t> mfh;      // entries with value >= v_th; only for terms >= t_th
  std::vector<uint32_t> mfm;      // moving prefix length (region 2: moving and high)
  uint32_t n_moving = 0;
  std::vector<uint32_t> moving_ids;  // ascending
  std::vector<uint32_t> compact_of;  // centroid -> slot in moving_ids, UINT32_MAX if invariant
};

// Dense completion rows for terms at or above t_th. With full_values the rows
// carry every mean value in the subspace (sorted-scan and norm-bound
// verification); otherwise only values below v_th, scaled, zero elsewhere.
struct PartialMeanIndex {
  uint32_t k = 0;
  uint64_t d = 0;
  uint32_t r1_end = 0;
  bool full_values = false;
  std::vector<double> w;  // (d - r1_end) rows by k, row per term

  const double* term_row(uint32_t s) const {
    return w.data() + static_cast<std::size_t>(s - r1_end) * k;
  }
};

// Per-term entries for terms >= t_th sorted by descending value (ties by
// ascending centroid id), plus the same thing restricted to moving means.
struct SortedSubspaceIndex {
  uint32_t k = 0;
  uint64_t d = 0;
  uint32_t r1_end = 0;
  std::vector<uint64_t> offsets;
  std::vector<uint32_t> ids;
  std::vector<double> vals;
  std::vector<uint64_t> moffsets;
  std::vector<uint32_t> mids;
  std::vector<double> mvals;
};

// Per-term squared values for terms >= t_th, moving entries first, both
// groups in ascending centroid id. Feeds the norm upper bound.
struct SquaredSubspaceIndex {
  uint32_t k = 0;
  uint64_t d = 0;
  uint32_t r1_end = 0;
  std::vector<uint64_t> offsets;
  std::vector<uint32_t> ids;
  std::vector<double> sq;         // value squared (unscaled)
  std::vector<uint32_t> mf;       // entries per term
  std::vector<uint32_t> mfm;      // moving prefix length
};

// Cluster means: sum of member vectors (ascending object id) normalized to
// unit L2. Empty clusters retain the previous mean (row copied bit-exactly)
// and report their ids in `empties`; their `fresh` flag drops to 0.
MeanSet compute_means(const Corpus& corpus, const std::vector<std::vector<uint32_t>>& members,
                      double v_th, const MeanSet* previous,
                      std::vector<uint32_t>* empties = nullptr);

MeanInvertedIndex build_inverted_index(const MeanSet& means, StructuralParams params,
                                       const std::vector<uint8_t>& moving);

PartialMeanIndex build_partial_index(const MeanSet& means, StructuralParams params,
                                     bool full_values);

SortedSubspaceIndex build_sorted_index(const MeanSet& means, StructuralParams params,
                                       const std::vector<uint8_t>& moving);

SquaredSubspaceIndex build_squared_index(const MeanSet& means, StructuralParams params,
                                         const std::vector<uint8_t>& moving);

// Object values multiplied by v_th, aligned with corpus.vals. With v_th = 1
// this reproduces the input bit-exactly.
std::vector<double> scale_object_values(const Corpus& corpus, double v_th);

// Similarity of every object to its assigned mean, computed with the same
// scaled operands the index stores, so the next iteration's pruning threshold
// matches gather/verify arithmetic bit for bit.
std::vector<double> assigned_similarities(const Corpus& corpus,
                                          const std::vector<double>& scaled_vals,
                                          const MeanSet& means,
                                          const std::vector<uint32_t>& assign,
                                          unsigned threads);

}  // namespace skm
