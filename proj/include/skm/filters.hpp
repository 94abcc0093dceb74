// Candidate filtering: similarity gathering over index regions, upper-bound
// screening, and verification of surviving candidates.
//
// Three bound families share the two-phase shape (gather partial similarities,
// bound the remainder, verify survivors against dense completion rows):
//   - threshold bound: remainder bounded by the value threshold; with the
//     index scaling the bound is partial + remaining-mass, no multiplication
//   - sorted-scan bound: per-object value threshold derived from the previous
//     assigned similarity; descending scans stop at it
//   - norm bound: Cauchy-Schwarz over the thresholded subspace with
//     precomputed squared values
// An invariance flag per object selects whether only means whose cluster
// changed are screened (safe when the object's assigned similarity did not
// decrease) or all means.
#pragma once

#include <cstdint>
#include <vector>

#include "skm/corpus.hpp"
#include "skm/index.hpp"
#include "skm/metrics.hpp"

namespace skm {

enum class GatherMode { all, moving_only };

struct Candidates {
  std::vector<uint32_t> ids;      // ascending centroid ids
  std::vector<double> partials;   // gathered similarity per candidate
  void clear() {
    ids.clear();
    partials.clear();
  }
};

struct GatherScratch {
  std::vector<double> rho;  // partial similarities, indexed by centroid (mode
                            // all) or by moving slot (mode moving_only)
  std::vector<double> y;    // remaining scaled mass, or squared-norm accumulator
  void ensure(std::size_t k) {
    if (rho.size() < k) {
      rho.resize(k);
      y.resize(k);
    }
  }
};

// Region-3 upper bound after scaling: gathered partial plus remaining mass.
inline double upper_bound_es(double rho12, double y) { return rho12 + y; }

// Threshold-bound gather. x carries scaled object values; y_init is the scaled
// mass of the object's terms at or above the term threshold. Candidates are
// centroids whose bound strictly exceeds rho_max, in ascending id order.
void gather_es(SparseVecView x, double y_init, const MeanInvertedIndex& M,
               GatherMode mode, double rho_max, GatherScratch& scr, Candidates& out,
               OpCell& ops);

// Completes candidate similarities from the dense partial rows and reports the
// winner via best/rho_max. Products are unconditional over the object's
// thresholded terms. x_sub views only those terms.
void verify(SparseVecView x_sub, const PartialMeanIndex& P, const Candidates& cand,
            uint32_t& best, double& rho_max, OpCell& ops);

// Sorted-scan gather: descending value scans stop below v_ta; centroids with a
// zero partial are skipped outright (their bound cannot beat rho_max).
// Each surviving centroid costs one bound product.
void gather_ta(SparseVecView x, double y_init, double v_ta, const MeanInvertedIndex& M,
               const SortedSubspaceIndex& T, GatherMode mode, double rho_max,
               GatherScratch& scr, Candidates& out, OpCell& ops);

// Completion for the sorted-scan family: full-value rows, skipping entries the
// gather already consumed (value >= v_ta) behind a conditional.
void verify_ta(SparseVecView x_sub, double v_ta, const PartialMeanIndex& P,
               const Candidates& cand, uint32_t& best, double& rho_max, OpCell& ops);

// Norm-bound gather: region-1 products plus squared-value accumulation over
// the subspace; one bound product and one square root per screened centroid.
void gather_cs(SparseVecView x, double xp_norm, const MeanInvertedIndex& M,
               const SquaredSubspaceIndex& Q, GatherMode mode, double rho_max,
               GatherScratch& scr, Candidates& out, OpCell& ops);

// Per-object inputs shared by the assignment passes.
struct AssignInputs {
  const Corpus* corpus = nullptr;
  const std::vector<double>* scaled_vals = nullptr;  // aligned with corpus.vals
  const std::vector<double>* y0 = nullptr;       // per object scaled subspace mass
  const std::vector<double>* l1 = nullptr;       // per object unscaled L1 (sorted-scan)
  const std::vector<double>* xp_norm = nullptr;  // per object subspace L2 (norm bound)
  const std::vector<uint32_t>* assign = nullptr;
  const std::vector<double>* rho_prev = nullptr;  // assigned similarity, latest means
  const std::vector<uint8_t>* x_state = nullptr;  // 1 = moving-only screen is safe
  unsigned threads = 1;
};

struct AssignOutput {
  std::vector<uint32_t> assign;
  std::vector<double> rho;  // final max similarity per object
  OpCell ops;
};

// force_all disables the invariance screen (every object scans all means).
AssignOutput assign_es_family(const AssignInputs& in, const MeanInvertedIndex& M,
                              const PartialMeanIndex& P, bool force_all);

AssignOutput assign_ta(const AssignInputs& in, const MeanInvertedIndex& M,
                       const SortedSubspaceIndex& T, const PartialMeanIndex& Pfull);

AssignOutput assign_cs(const AssignInputs& in, const MeanInvertedIndex& M,
                       const SquaredSubspaceIndex& Q, const PartialMeanIndex& Pfull);

}  // namespace skm
