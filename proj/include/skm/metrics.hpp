// Operation counters, per-iteration records, and corpus/clustering analysis
// metrics (candidate-pruning rate, rank-frequency fit, cumulative partial
// similarity, mutual information, objective, coefficient of variation).
#pragma once

#include <cstdint>
#include <vector>

#include "skm/corpus.hpp"
#include "skm/index.hpp"

namespace skm {

// One multiplication is one feature-pair product or one bound product. The
// region-3 upper bound with threshold scaling is an addition and counts zero.
// Square roots are tallied apart from multiplications.
struct OpCell {
  uint64_t r1 = 0;     // region-1 gather products
  uint64_t r2 = 0;     // region-2 / sorted-subspace gather products
  uint64_t r3 = 0;     // verification products
  uint64_t bound = 0;  // per-candidate bound products
  uint64_t sqrt_ops = 0;
  uint64_t cand = 0;   // candidates formed (size of the verified set)

  uint64_t mult() const { return r1 + r2 + r3 + bound; }
  void merge(const OpCell& o) {
    r1 += o.r1;
    r2 += o.r2;
    r3 += o.r3;
    bound += o.bound;
    sqrt_ops += o.sqrt_ops;
    cand += o.cand;
  }
};

struct IterationRecord {
  uint32_t iteration = 0;
  uint64_t mult_region1 = 0;
  uint64_t mult_region2 = 0;
  uint64_t mult_region3 = 0;
  uint64_t mult_bound = 0;
  uint64_t sqrt_ops = 0;
  uint64_t candidates = 0;  // sum over objects of the verified-set size
  uint64_t changes = 0;
  uint32_t n_moving = 0;
  double cpr = 0.0;
  double objective = 0.0;
  double wall_ms = 0.0;  // informational; never part of deterministic artifacts

  uint64_t mult_total() const {
    return mult_region1 + mult_region2 + mult_region3 + mult_bound;
  }
};

// Mean verified-candidate fraction: (1/N) sum |Z_i| / K. Unfiltered scans
// verify everything, so their rate is 1 by definition.
double cpr(uint64_t candidate_sum, uint64_t n_docs, uint32_t k);

struct ZipfFit {
  std::vector<double> sorted;  // frequencies in descending order
  double alpha = 0.0;          // negated log-log slope over the fit window
  bool degenerate = false;     // all-equal frequencies or too few points
};

// Least-squares power-law fit of the rank-frequency curve over ranks
// [rank_lo, rank_hi], clipped to the available positive frequencies.
ZipfFit rank_frequency_profile(std::vector<double> freqs, uint64_t rank_lo = 10,
                               uint64_t rank_hi = 10000);

// Per distinct document frequency, the mean number of index entries of the
// terms with that df. Pairs are sorted by ascending df.
std::vector<std::pair<uint64_t, double>> df_mf_scatter(const std::vector<uint64_t>& df,
                                                       const std::vector<uint32_t>& mf);

struct CpsProfile {
  double bin_width = 0.01;
  std::vector<double> mean;    // cumulative share of similarity per rank bin
  std::vector<double> stddev;  // population deviation across objects
  uint64_t excluded = 0;       // objects with zero assigned similarity
};

// Cumulative partial similarity: per object, per-term products with the
// assigned mean sorted descending, cumulated and normalized by the assigned
// similarity, then averaged across objects on a normalized-rank grid with
// linear interpolation between whole term counts.
CpsProfile cps_profile(const Corpus& corpus, const MeanSet& means,
                       const std::vector<uint32_t>& assign, double bin_width = 0.01);

// Normalized mutual information with natural-log entropies and the symmetric
// sqrt(Ha*Hb) normalizer. Both partitions degenerate (single cluster) gives 1;
// exactly one degenerate partition is undefined and throws.
double nmi(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);

// Sum over objects of the similarity to the assigned (unscaled) mean.
double clustering_objective(const Corpus& corpus, const MeanSet& means,
                            const std::vector<uint32_t>& assign);

// Population coefficient of variation. Needs two samples and a nonzero mean.
double cv(const std::vector<double>& samples);

}  // namespace skm
