// Structural parameter estimation.
//
// The estimator models the multiplication count of one filtered assignment
// pass as a function of the term threshold s' and value threshold v:
//   phi1: exact region-1 work, sum over terms below s' of df * mf
//   phi2: exact region-2 work, sum over terms at or above s' of df * mfh(v)
//   phi3: expected verification work; each object contributes its thresholded
//         term count weighted by the expected number of candidates that pass
//         the bound, modeled from the gap between the object's assigned
//         similarity and its average similarity over all means
// A descending sweep over s' updates J(s', v) incrementally per value
// candidate; sweeps for different candidates are independent. The direct
// summation form of the same objective is kept as a cross-check oracle.
#pragma once

#include <cstdint>
#include <vector>

#include "skm/corpus.hpp"
#include "skm/index.hpp"

namespace skm {

// Per-term object postings restricted to terms at or above s_min (1-based).
struct PartialObjectIndex {
  uint32_t s_min = 1;
  uint64_t d = 0;
  std::vector<uint64_t> offsets;  // (d - s_min + 2) row starts
  std::vector<uint32_t> obj;
  std::vector<double> val;
};

struct EstimatorGrid {
  std::vector<double> v_candidates;  // strictly increasing, in (0, 1]
  uint32_t s_min = 1;                // 1-based lower end of the term sweep
};

struct CostBreakdown {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi3 = 0.0;
  double total = 0.0;
};

struct EstResult {
  StructuralParams params;
  double best_cost = 0.0;
  // J over the sweep, one row per value candidate, columns s' = s_min..D.
  std::vector<std::vector<double>> grid_costs;
  uint32_t s_min = 1;
  std::vector<double> v_candidates;
};

PartialObjectIndex build_partial_object_index(const Corpus& corpus, uint32_t s_min);

// Default value grid: evenly spaced candidates between the 50th and 99.9th
// percentile of the nonzero mean values; default sweep floor at 85% of D.
EstimatorGrid default_grid(const MeanSet& means, double smin_frac = 0.85,
                           uint32_t n_candidates = 41);

// Column sums over the unscaled means, one per term.
std::vector<double> mean_column_sums(const MeanSet& means);

// Average similarity of an object over all k means, from the column sums.
double avg_similarity(SparseVecView x, const std::vector<double>& col_sums, uint32_t k);

// Probability that a centroid's bound beats the pruning threshold, as a
// function of the average-bound inflation delta. Exactly 1/K at delta = 0 and
// exactly exp(-1) at delta = rho_a - rho_bar; clamped to [1/K, 1].
double prob_pass(double delta_rho_bar, double rho_assigned, double rho_bar, uint32_t k);

// Expected candidates per object, K * prob_pass, with exact endpoints.
// Objects whose assigned similarity does not exceed their average similarity
// contribute at probability 1.
double pass_factor(double delta_rho_bar, double rho_assigned, double rho_bar, uint32_t k);

// Direct-summation objective at one grid point (the oracle form).
CostBreakdown objective(uint32_t s_prime, double v_h, const MeanSet& means,
                        const Corpus& corpus, const std::vector<double>& rho_assigned,
                        const std::vector<double>& rho_bar);

// Recurrence-based sweep over the full grid. Ties are broken toward the
// smaller value candidate, then the larger term threshold. With
// fixed_s_prime_1 the term threshold is pinned to 1 and only v is chosen.
EstResult est_params(const MeanSet& means, const Corpus& corpus,
                     const PartialObjectIndex& pobj, const EstimatorGrid& grid,
                     const std::vector<double>& rho_assigned,
                     const std::vector<double>& rho_bar, unsigned threads,
                     bool fixed_s_prime_1 = false);

}  // namespace skm
