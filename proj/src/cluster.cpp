#include "skm/cluster.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "skm/error.hpp"
#include "skm/parallel.hpp"

namespace skm {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "mivi") return Algorithm::mivi;
  if (name == "divi") return Algorithm::divi;
  if (name == "icp") return Algorithm::icp;
  if (name == "es-icp") return Algorithm::es_icp;
  if (name == "ta-icp") return Algorithm::ta_icp;
  if (name == "cs-icp") return Algorithm::cs_icp;
  if (name == "es") return Algorithm::es;
  if (name == "thv") return Algorithm::thv;
  if (name == "tht") return Algorithm::tht;
  throw config_error("unknown algorithm: " + name);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::mivi: return "mivi";
    case Algorithm::divi: return "divi";
    case Algorithm::icp: return "icp";
    case Algorithm::es_icp: return "es-icp";
    case Algorithm::ta_icp: return "ta-icp";
    case Algorithm::cs_icp: return "cs-icp";
    case Algorithm::es: return "es";
    case Algorithm::thv: return "thv";
    case Algorithm::tht: return "tht";
  }
  return "?";
}

bool is_es_family(Algorithm a) {
  return a == Algorithm::icp || a == Algorithm::es_icp || a == Algorithm::es ||
         a == Algorithm::thv || a == Algorithm::tht;
}

bool estimates_params(Algorithm a) {
  return a == Algorithm::es_icp || a == Algorithm::es || a == Algorithm::thv ||
         a == Algorithm::tht;
}

namespace {

unsigned worker_count(unsigned threads, std::size_t n) {
  std::size_t w = std::max(1u, threads);
  return static_cast<unsigned>(std::min<std::size_t>(w, n ? n : 1));
}

uint32_t smin_from_frac(double frac, uint64_t d) {
  const uint32_t s =
      static_cast<uint32_t>(std::ceil(frac * static_cast<double>(d)));
  return std::max<uint32_t>(1, std::min<uint32_t>(s, static_cast<uint32_t>(d)));
}

}  // namespace

AssignOutput assign_mivi(const AssignInputs& in, const MeanInvertedIndex& M) {
  const Corpus& corpus = *in.corpus;
  const std::size_t n = corpus.n_docs;
  const uint32_t k = M.k;
  AssignOutput out;
  out.assign.assign(n, 0);
  out.rho.assign(n, 0.0);
  std::vector<OpCell> cells(worker_count(in.threads, n));
  parallel_blocks(n, in.threads, [&](unsigned w, std::size_t b, std::size_t e) {
    std::vector<double> rho(k);
    OpCell local;
    for (std::size_t i = b; i < e; ++i) {
      const uint64_t off = corpus.offsets[i];
      const uint32_t nt = corpus.nt(i);
      const uint32_t* terms = corpus.terms.data() + off;
      const double* u = in.scaled_vals->data() + off;
      std::fill(rho.begin(), rho.end(), 0.0);
      for (uint32_t p = 0; p < nt; ++p) {
        const uint64_t row = M.offsets[terms[p]];
        const uint32_t mf = M.mf[terms[p]];
        for (uint32_t q = 0; q < mf; ++q)
          rho[M.ids[row + q]] += u[p] * M.vals[row + q];
        local.r1 += mf;
      }
      uint32_t best = (*in.assign)[i];
      double rho_max = (*in.rho_prev)[i];
      for (uint32_t j = 0; j < k; ++j) {
        if (rho[j] > rho_max) {
          best = j;
          rho_max = rho[j];
        }
      }
      out.assign[i] = best;
      out.rho[i] = rho_max;
      local.cand += k;
    }
    cells[w] = local;
  });
  for (const OpCell& c : cells) out.ops.merge(c);
  return out;
}

AssignOutput assign_divi(const AssignInputs& in, const MeanSet& means,
                         const PartialObjectIndex& docs) {
  const Corpus& corpus = *in.corpus;
  const std::size_t n = corpus.n_docs;
  const uint32_t k = means.k;
  if (docs.s_min != 1)
    throw invariant_error("divi: document index must cover every term");
  const uint64_t cells_needed = static_cast<uint64_t>(n) * k;
  if (cells_needed > (1ull << 28))
    throw config_error("divi: dense document-by-mean matrix would be too large");

  std::vector<double> rho(cells_needed, 0.0);
  std::vector<OpCell> mcells(worker_count(in.threads, k));
  // Mean at a time: each worker owns a block of means, so every matrix cell
  // is filled by exactly one worker in ascending term order.
  parallel_blocks(k, in.threads, [&](unsigned w, std::size_t jb, std::size_t je) {
    OpCell local;
    for (std::size_t j = jb; j < je; ++j) {
      const double* murow = means.row(static_cast<uint32_t>(j));
      for (uint64_t s = 0; s < means.d; ++s) {
        const double v = murow[s];
        if (v == 0.0) continue;
        for (uint64_t e = docs.offsets[s]; e < docs.offsets[s + 1]; ++e)
          rho[static_cast<uint64_t>(docs.obj[e]) * k + j] += docs.val[e] * v;
        local.r1 += docs.offsets[s + 1] - docs.offsets[s];
      }
    }
    mcells[w] = local;
  });

  AssignOutput out;
  out.assign.assign(n, 0);
  out.rho.assign(n, 0.0);
  std::vector<OpCell> acells(worker_count(in.threads, n));
  parallel_blocks(n, in.threads, [&](unsigned w, std::size_t b, std::size_t e) {
    OpCell local;
    for (std::size_t i = b; i < e; ++i) {
      const double* row = rho.data() + static_cast<uint64_t>(i) * k;
      uint32_t best = (*in.assign)[i];
      double rho_max = (*in.rho_prev)[i];
      for (uint32_t j = 0; j < k; ++j) {
        if (row[j] > rho_max) {
          best = j;
          rho_max = row[j];
        }
      }
      out.assign[i] = best;
      out.rho[i] = rho_max;
      local.cand += k;
    }
    acells[w] = local;
  });
  for (const OpCell& c : mcells) out.ops.merge(c);
  for (const OpCell& c : acells) out.ops.merge(c);
  return out;
}

Driver::Driver(const Corpus& corpus, RunConfig cfg)
    : corpus_(&corpus), cfg_(cfg), rng_(cfg.seed) {
  const uint64_t n = corpus.n_docs;
  const uint64_t d = corpus.n_terms;
  if (n == 0 || d == 0) throw config_error("empty corpus");
  if (d + 1 > std::numeric_limits<uint32_t>::max())
    throw config_error("vocabulary too large for the term threshold type");
  if (cfg_.k == 0) throw config_error("k must be positive");
  if (cfg_.k > n) throw config_error("k exceeds the document count");
  if (cfg_.max_iters == 0) throw config_error("max-iters must be positive");
  if (cfg_.threads == 0) cfg_.threads = 1;
  if (cfg_.t_th && (*cfg_.t_th < 1 || *cfg_.t_th > d + 1))
    throw config_error("term threshold out of range");
  if (cfg_.v_th && (!(*cfg_.v_th > 0.0) || *cfg_.v_th > 1.0))
    throw config_error("value threshold out of (0, 1]");
  if (!(cfg_.tth_frac > 0.0) || cfg_.tth_frac > 1.0)
    throw config_error("term threshold fraction out of (0, 1]");
  if (!(cfg_.smin_frac > 0.0) || cfg_.smin_frac > 1.0)
    throw config_error("term sweep floor fraction out of (0, 1]");
  if (cfg_.grid_size == 0) throw config_error("grid size must be positive");
  if (cfg_.v_grid) {
    if (cfg_.v_grid->empty()) throw config_error("empty value grid");
    for (double v : *cfg_.v_grid)
      if (!(v > 0.0) || v > 1.0) throw config_error("grid value out of (0, 1]");
    for (std::size_t q = 1; q < cfg_.v_grid->size(); ++q)
      if ((*cfg_.v_grid)[q] <= (*cfg_.v_grid)[q - 1])
        throw config_error("grid values must be strictly increasing");
  }

  // Which structural knobs make sense depends on the variant.
  switch (cfg_.algorithm) {
    case Algorithm::mivi:
    case Algorithm::divi:
    case Algorithm::icp:
      if (cfg_.t_th || cfg_.v_th || cfg_.v_grid)
        throw config_error(to_string(cfg_.algorithm) +
                           " takes no structural parameters");
      break;
    case Algorithm::ta_icp:
    case Algorithm::cs_icp:
      if (cfg_.v_th || cfg_.v_grid)
        throw config_error(to_string(cfg_.algorithm) +
                           " takes no value threshold");
      break;
    case Algorithm::thv:
      if (cfg_.t_th)
        throw config_error("thv pins the term threshold to 1");
      break;
    case Algorithm::tht:
      if (cfg_.v_th || cfg_.v_grid)
        throw config_error("tht pins the value threshold to 1");
      break;
    case Algorithm::es:
    case Algorithm::es_icp:
      if (cfg_.t_th.has_value() != cfg_.v_th.has_value())
        throw config_error(
            "fixed structural parameters need both thresholds");
      break;
  }

  params_.t_th = static_cast<uint32_t>(d + 1);
  params_.v_th = 1.0;

  const std::vector<uint32_t> seeds =
      sample_without_replacement(n, cfg_.k, rng_);
  means_.k = cfg_.k;
  means_.d = d;
  means_.v_th = 1.0;
  means_.mu.assign(static_cast<std::size_t>(cfg_.k) * d, 0.0);
  means_.sizes.assign(cfg_.k, 0);
  means_.fresh.assign(cfg_.k, 1);
  for (uint32_t j = 0; j < cfg_.k; ++j) {
    const SparseVecView x = corpus.doc(seeds[j]);
    double* row = means_.row(j);
    for (uint32_t t = 0; t < x.nt; ++t) row[x.terms[t]] = x.vals[t];
  }
  moving_.assign(cfg_.k, 1);
  assign_.assign(n, 0);
  rho_prev_.assign(n, -1.0);  // below any similarity: pass 1 picks fresh maxima
  x_state_.assign(n, 0);

  u_scaled_ = corpus.vals;  // value threshold 1: scaling is the identity
  l1_.assign(n, 0.0);
  for (uint64_t i = 0; i < n; ++i) {
    const SparseVecView x = corpus.doc(i);
    double acc = 0.0;
    for (uint32_t t = 0; t < x.nt; ++t) acc += x.vals[t];
    l1_[i] = acc;
  }
  y0_.assign(n, 0.0);       // trivial parameters leave the subspace empty
  xp_norm_.assign(n, 0.0);

  if (cfg_.algorithm == Algorithm::divi)
    docs_ = build_partial_object_index(corpus, 1);
  rebuild_indexes();
}

AssignOutput Driver::run_pass(uint32_t r) {
  AssignInputs in;
  in.corpus = corpus_;
  in.scaled_vals = &u_scaled_;
  in.y0 = &y0_;
  in.l1 = &l1_;
  in.xp_norm = &xp_norm_;
  in.assign = &assign_;
  in.rho_prev = &rho_prev_;
  in.x_state = &x_state_;
  in.threads = cfg_.threads;

  if (r == 1) {
    // Every variant bootstraps with the plain pass over the trivial index.
    if (cfg_.algorithm == Algorithm::divi) return assign_divi(in, means_, *docs_);
    return assign_mivi(in, M_);
  }
  switch (cfg_.algorithm) {
    case Algorithm::mivi:
      return assign_mivi(in, M_);
    case Algorithm::divi:
      return assign_divi(in, means_, *docs_);
    case Algorithm::icp:
    case Algorithm::es_icp:
      return assign_es_family(in, M_, P_, /*force_all=*/false);
    case Algorithm::es:
    case Algorithm::thv:
    case Algorithm::tht:
      return assign_es_family(in, M_, P_, /*force_all=*/true);
    case Algorithm::ta_icp:
      return assign_ta(in, M_, T_, P_);
    case Algorithm::cs_icp:
      return assign_cs(in, M_, Q_, P_);
  }
  throw invariant_error("unhandled algorithm");
}

bool Driver::step() {
  if (finished_) return false;
  const uint32_t r = iter_ + 1;
  const auto t0 = std::chrono::steady_clock::now();
  AssignOutput out = run_pass(r);
  const auto t1 = std::chrono::steady_clock::now();

  uint64_t changes = 0;
  if (r == 1) {
    changes = corpus_->n_docs;
  } else {
    for (uint64_t i = 0; i < corpus_->n_docs; ++i)
      changes += out.assign[i] != assign_[i] ? 1 : 0;
  }

  IterationRecord rec;
  rec.iteration = r;
  rec.mult_region1 = out.ops.r1;
  rec.mult_region2 = out.ops.r2;
  rec.mult_region3 = out.ops.r3;
  rec.mult_bound = out.ops.bound;
  rec.sqrt_ops = out.ops.sqrt_ops;
  rec.candidates = out.ops.cand;
  rec.changes = changes;
  rec.n_moving = M_.n_moving;
  rec.cpr = cpr(out.ops.cand, corpus_->n_docs, cfg_.k);
  rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  history_.push_back(out.assign);

  if (r > 1 && changes == 0) {
    converged_ = true;
    finished_ = true;
    rec.objective = prev_objective_;  // nothing moved, nothing recomputed
    iters_.push_back(rec);
    iter_ = r;
    return false;
  }

  update_phase(r, out);
  rec.objective = prev_objective_;
  iters_.push_back(rec);
  iter_ = r;
  if (r >= cfg_.max_iters) finished_ = true;
  return !finished_;
}

void Driver::update_phase(uint32_t r, AssignOutput& out) {
  const Corpus& corpus = *corpus_;
  const uint64_t n = corpus.n_docs;
  const uint32_t k = cfg_.k;

  if (r == 1) {
    std::fill(moving_.begin(), moving_.end(), uint8_t{1});
  } else {
    std::fill(moving_.begin(), moving_.end(), uint8_t{0});
    for (uint64_t i = 0; i < n; ++i) {
      if (out.assign[i] != assign_[i]) {
        moving_[assign_[i]] = 1;
        moving_[out.assign[i]] = 1;
      }
    }
  }
  assign_ = std::move(out.assign);

  std::vector<std::vector<uint32_t>> members(k);
  for (uint64_t i = 0; i < n; ++i)
    members[assign_[i]].push_back(static_cast<uint32_t>(i));

  std::vector<uint32_t> empties;
  MeanSet next = compute_means(corpus, members, 1.0, &means_, &empties);
  if (r == 1) {
    // First update: reseed empty clusters from a random document whose
    // cluster can spare one. Later updates retain the previous mean row
    // bit-exactly, which keeps the cluster out of the moving set.
    for (uint32_t j : empties) {
      for (;;) {
        const uint64_t i = rng_.next_below(n);
        if (members[assign_[i]].size() < 2) continue;
        double* row = next.row(j);
        std::fill(row, row + next.d, 0.0);
        const SparseVecView x = corpus.doc(i);
        for (uint32_t t = 0; t < x.nt; ++t) row[x.terms[t]] = x.vals[t];
        next.fresh[j] = 1;
        break;
      }
    }
  } else {
    for (uint32_t j : empties) moving_[j] = 0;
  }
  means_ = std::move(next);

  const StructuralParams before = params_;
  resolve_params(r);
  const bool params_changed =
      params_.t_th != before.t_th || params_.v_th != before.v_th;
  means_.v_th = params_.v_th;
  if (params_changed) rebuild_object_arrays();
  rebuild_indexes();

  // The pruning threshold of the next pass must match its gather/verify
  // arithmetic, so recompute the assigned similarities with the final
  // scaling even when only the means changed.
  rho_prev_ =
      assigned_similarities(corpus, u_scaled_, means_, assign_, cfg_.threads);
  for (uint64_t i = 0; i < n; ++i)
    x_state_[i] = rho_prev_[i] >= out.rho[i] ? 1 : 0;

  prev_objective_ = clustering_objective(corpus, means_, assign_);
}

void Driver::resolve_params(uint32_t r) {
  if (params_frozen_) return;
  const uint64_t d = corpus_->n_terms;
  const uint32_t trivial_t = static_cast<uint32_t>(d + 1);
  switch (cfg_.algorithm) {
    case Algorithm::mivi:
    case Algorithm::divi:
      params_frozen_ = true;
      return;
    case Algorithm::icp:
      params_ = StructuralParams{trivial_t, 1.0};
      params_frozen_ = true;
      return;
    case Algorithm::ta_icp:
    case Algorithm::cs_icp: {
      uint32_t t = cfg_.t_th
                       ? *cfg_.t_th
                       : smin_from_frac(cfg_.tth_frac, d);
      params_ = StructuralParams{std::min(t, trivial_t), 1.0};
      params_frozen_ = true;
      return;
    }
    default:
      break;
  }
  std::optional<uint32_t> fixed_t = cfg_.t_th;
  std::optional<double> fixed_v = cfg_.v_th;
  if (cfg_.algorithm == Algorithm::thv) fixed_t = 1;
  if (cfg_.algorithm == Algorithm::tht) fixed_v = 1.0;
  if (fixed_t && fixed_v) {
    params_ = StructuralParams{*fixed_t, *fixed_v};
    params_frozen_ = true;
    return;
  }
  estimate_now(r);
  if (r >= 2) params_frozen_ = true;
}

void Driver::estimate_now(uint32_t r) {
  (void)r;
  const Corpus& corpus = *corpus_;
  const uint64_t n = corpus.n_docs;
  const bool pin_t1 = cfg_.algorithm == Algorithm::thv;

  EstimatorGrid grid;
  if (cfg_.algorithm == Algorithm::tht) {
    grid.v_candidates = {1.0};
    grid.s_min = smin_from_frac(cfg_.smin_frac, corpus.n_terms);
  } else if (cfg_.v_grid) {
    grid.v_candidates = *cfg_.v_grid;
    grid.s_min = smin_from_frac(cfg_.smin_frac, corpus.n_terms);
  } else {
    grid = default_grid(means_, cfg_.smin_frac, cfg_.grid_size);
  }
  if (pin_t1) grid.s_min = 1;
  if (!pobj_ || pobj_->s_min != grid.s_min)
    pobj_ = build_partial_object_index(corpus, grid.s_min);

  // Model inputs live in the unscaled domain: means_ still carries the
  // build-time value threshold of 1 at this point in the update.
  std::vector<double> rho_a =
      assigned_similarities(corpus, corpus.vals, means_, assign_, cfg_.threads);
  const std::vector<double> col = mean_column_sums(means_);
  std::vector<double> rho_bar(n, 0.0);
  parallel_blocks(n, cfg_.threads, [&](unsigned, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      rho_bar[i] = avg_similarity(corpus.doc(i), col, means_.k);
  });

  est_ = est_params(means_, corpus, *pobj_, grid, rho_a, rho_bar, cfg_.threads,
                    pin_t1);
  params_ = est_->params;
}

void Driver::rebuild_object_arrays() {
  const Corpus& corpus = *corpus_;
  const uint64_t n = corpus.n_docs;
  u_scaled_ = scale_object_values(corpus, params_.v_th);
  const uint32_t r1_end = params_.r1_end();
  y0_.assign(n, 0.0);
  xp_norm_.assign(n, 0.0);
  parallel_blocks(n, cfg_.threads, [&](unsigned, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const uint64_t off = corpus.offsets[i];
      const uint32_t nt = corpus.nt(i);
      const uint32_t* terms = corpus.terms.data() + off;
      const uint32_t sb = static_cast<uint32_t>(
          std::lower_bound(terms, terms + nt, r1_end) - terms);
      double mass = 0.0;
      double sq = 0.0;
      for (uint32_t p = sb; p < nt; ++p) {
        mass += u_scaled_[off + p];
        sq += corpus.vals[off + p] * corpus.vals[off + p];
      }
      y0_[i] = mass;
      xp_norm_[i] = std::sqrt(sq);
    }
  });
}

void Driver::rebuild_indexes() {
  M_ = build_inverted_index(means_, params_, moving_);
  switch (cfg_.algorithm) {
    case Algorithm::ta_icp:
      T_ = build_sorted_index(means_, params_, moving_);
      P_ = build_partial_index(means_, params_, /*full_values=*/true);
      break;
    case Algorithm::cs_icp:
      Q_ = build_squared_index(means_, params_, moving_);
      P_ = build_partial_index(means_, params_, /*full_values=*/true);
      break;
    case Algorithm::icp:
    case Algorithm::es_icp:
    case Algorithm::es:
    case Algorithm::thv:
    case Algorithm::tht:
      P_ = build_partial_index(means_, params_, /*full_values=*/false);
      break;
    case Algorithm::mivi:
    case Algorithm::divi:
      break;
  }
}

RunResult Driver::take_result() {
  RunResult res;
  res.config = cfg_;
  res.params = params_;
  res.assign = assign_;
  res.history = std::move(history_);
  res.iters = std::move(iters_);
  res.means = std::move(means_);
  res.converged = converged_;
  res.input_hash = corpus_hash(*corpus_);
  res.estimation = std::move(est_);
  return res;
}

RunResult run_clustering(const Corpus& corpus, const RunConfig& cfg) {
  Driver driver(corpus, cfg);
  while (driver.step()) {
  }
  return driver.take_result();
}

}  // namespace skm
