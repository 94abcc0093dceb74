// Spherical k-means driver and the unfiltered baseline passes.
//
// Every algorithm shares one iteration shape: an assignment pass over the
// current means, then an update that rebuilds means, indexes, and per-object
// state. Iteration 1 always runs the plain mean-inverted pass over a trivial
// index (term threshold past the last term, value threshold 1), so every
// algorithm starts from the same assignments; structural parameters take
// effect from iteration 2 on. Estimating variants re-estimate during the
// updates of iterations 1 and 2 and freeze the parameters afterwards.
//
// Assignment ties keep the incumbent: a pass starts each object at its
// previous cluster and previous assigned similarity and only a strictly
// larger similarity reassigns. The first pass starts below zero so the
// lowest-id maximal cluster wins.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skm/corpus.hpp"
#include "skm/estimator.hpp"
#include "skm/filters.hpp"
#include "skm/index.hpp"
#include "skm/metrics.hpp"
#include "skm/rng.hpp"

namespace skm {

enum class Algorithm {
  mivi,    // mean-inverted index, one object at a time, no filtering
  divi,    // document-inverted index, one mean at a time, no filtering
  icp,     // invariance screen only (trivial structural parameters)
  es_icp,  // estimated structure plus invariance screen
  ta_icp,  // sorted-scan bound plus invariance screen
  cs_icp,  // norm bound plus invariance screen
  es,      // estimated structure, no screen
  thv,     // value threshold only (term threshold pinned to 1)
  tht,     // term threshold only (value threshold pinned to 1)
};

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);

// Variants that run the structured gather/verify pass.
bool is_es_family(Algorithm a);
// Variants whose parameters come from the estimator by default.
bool estimates_params(Algorithm a);

struct RunConfig {
  uint32_t k = 2;
  Algorithm algorithm = Algorithm::es_icp;
  uint64_t seed = 1;
  uint32_t max_iters = 50;
  std::optional<uint32_t> t_th;  // fixed term threshold (1-based, up to D+1)
  std::optional<double> v_th;    // fixed value threshold in (0, 1]
  double tth_frac = 0.9;         // preset fraction for the ta/cs term threshold
  std::optional<std::vector<double>> v_grid;  // explicit estimation candidates
  double smin_frac = 0.85;       // term-sweep floor as a fraction of D
  uint32_t grid_size = 41;       // default value-candidate count
  unsigned threads = 1;
};

struct RunResult {
  RunConfig config;
  StructuralParams params;  // structural parameters after freezing
  std::vector<uint32_t> assign;
  std::vector<std::vector<uint32_t>> history;  // assignments after each pass
  std::vector<IterationRecord> iters;
  MeanSet means;
  bool converged = false;
  uint64_t input_hash = 0;
  std::optional<EstResult> estimation;  // last estimator run, if any
};

// Baseline passes. Both count one multiplication per accumulated product and
// report every mean as a candidate; with a value threshold of 1 their
// similarities are bit-identical to each other and to the filtered passes.
AssignOutput assign_mivi(const AssignInputs& in, const MeanInvertedIndex& M);
AssignOutput assign_divi(const AssignInputs& in, const MeanSet& means,
                         const PartialObjectIndex& docs);

class Driver {
 public:
  Driver(const Corpus& corpus, RunConfig cfg);

  // Runs one assignment pass and, unless it converged, the update. Returns
  // false once the run is over (converged or iteration cap).
  bool step();
  bool done() const { return finished_; }

  RunResult take_result();

  // Mid-run state, mainly for tests and the estimate command.
  uint32_t iterations() const { return iter_; }
  const MeanSet& means() const { return means_; }
  const StructuralParams& params() const { return params_; }
  const std::vector<uint32_t>& assignments() const { return assign_; }
  const std::vector<double>& assigned_rho() const { return rho_prev_; }
  const std::vector<uint8_t>& moving() const { return moving_; }
  const std::optional<EstResult>& estimation() const { return est_; }

 private:
  AssignOutput run_pass(uint32_t r);
  void resolve_params(uint32_t r);
  void estimate_now(uint32_t r);
  void rebuild_object_arrays();
  void rebuild_indexes();
  void update_phase(uint32_t r, AssignOutput& out);

  const Corpus* corpus_;
  RunConfig cfg_;
  Rng rng_;

  uint32_t iter_ = 0;       // completed passes
  bool finished_ = false;
  bool converged_ = false;
  bool params_frozen_ = false;
  StructuralParams params_;           // trivial until resolved
  MeanSet means_;
  std::vector<uint8_t> moving_;       // per cluster, drives the moving prefixes
  std::vector<uint32_t> assign_;
  std::vector<double> rho_prev_;      // assigned similarity vs current means
  std::vector<uint8_t> x_state_;      // 1 = moving-only screen safe this pass

  std::vector<double> u_scaled_;      // corpus values times v_th
  std::vector<double> y0_;            // per object scaled mass at/above t_th
  std::vector<double> l1_;            // per object unscaled L1 mass
  std::vector<double> xp_norm_;       // per object L2 mass at/above t_th

  MeanInvertedIndex M_;
  PartialMeanIndex P_;
  SortedSubspaceIndex T_;
  SquaredSubspaceIndex Q_;
  std::optional<PartialObjectIndex> docs_;  // document-inverted baseline input
  std::optional<PartialObjectIndex> pobj_;  // estimator sweep input
  std::optional<EstResult> est_;

  std::vector<IterationRecord> iters_;
  std::vector<std::vector<uint32_t>> history_;
  double prev_objective_ = 0.0;
};

RunResult run_clustering(const Corpus& corpus, const RunConfig& cfg);

}  // namespace skm
