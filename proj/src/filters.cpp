#include "skm/filters.hpp"

#include <algorithm>
#include <cmath>

#include "skm/error.hpp"
#include "skm/parallel.hpp"

namespace skm {

void gather_es(SparseVecView x, double y_init, const MeanInvertedIndex& M,
               GatherMode mode, double rho_max, GatherScratch& scr, Candidates& out,
               OpCell& ops) {
  const uint32_t r1_end = M.params.r1_end();
  out.clear();
  if (mode == GatherMode::all) {
    scr.ensure(M.k);
    std::fill(scr.rho.begin(), scr.rho.begin() + M.k, 0.0);
    std::fill(scr.y.begin(), scr.y.begin() + M.k, y_init);
    for (uint32_t p = 0; p < x.nt; ++p) {
      const uint32_t s = x.terms[p];
      const double u = x.vals[p];
      const uint64_t off = M.offsets[s];
      if (s < r1_end) {
        const uint32_t end = M.mf[s];
        for (uint32_t q = 0; q < end; ++q) {
          scr.rho[M.ids[off + q]] += u * M.vals[off + q];
          ++ops.r1;
        }
      } else {
        const uint32_t end = M.mfh[s];
        for (uint32_t q = 0; q < end; ++q) {
          const uint32_t c = M.ids[off + q];
          scr.rho[c] += u * M.vals[off + q];
          scr.y[c] -= u;
          ++ops.r2;
        }
      }
    }
    for (uint32_t j = 0; j < M.k; ++j) {
      if (upper_bound_es(scr.rho[j], scr.y[j]) > rho_max) {
        out.ids.push_back(j);
        out.partials.push_back(scr.rho[j]);
      }
    }
  } else {
    const uint32_t n = M.n_moving;
    if (n == 0) return;
    scr.ensure(n);
    std::fill(scr.rho.begin(), scr.rho.begin() + n, 0.0);
    std::fill(scr.y.begin(), scr.y.begin() + n, y_init);
    for (uint32_t p = 0; p < x.nt; ++p) {
      const uint32_t s = x.terms[p];
      const double u = x.vals[p];
      const uint64_t off = M.offsets[s];
      // Moving entries sit first in both regions; mfm is their count.
      const uint32_t end = M.mfm[s];
      if (s < r1_end) {
        for (uint32_t q = 0; q < end; ++q) {
          scr.rho[M.compact_of[M.ids[off + q]]] += u * M.vals[off + q];
          ++ops.r1;
        }
      } else {
        for (uint32_t q = 0; q < end; ++q) {
          const uint32_t slot = M.compact_of[M.ids[off + q]];
          scr.rho[slot] += u * M.vals[off + q];
          scr.y[slot] -= u;
          ++ops.r2;
        }
      }
    }
    for (uint32_t slot = 0; slot < n; ++slot) {
      if (upper_bound_es(scr.rho[slot], scr.y[slot]) > rho_max) {
        out.ids.push_back(M.moving_ids[slot]);
        out.partials.push_back(scr.rho[slot]);
      }
    }
  }
  ops.cand += out.ids.size();
}

void verify(SparseVecView x_sub, const PartialMeanIndex& P, const Candidates& cand,
            uint32_t& best, double& rho_max, OpCell& ops) {
  for (std::size_t q = 0; q < cand.ids.size(); ++q) {
    const uint32_t j = cand.ids[q];
    double rho = cand.partials[q];
    for (uint32_t p = 0; p < x_sub.nt; ++p) {
      rho += x_sub.vals[p] * P.term_row(x_sub.terms[p])[j];
      ++ops.r3;
    }
    if (rho > rho_max) {
      rho_max = rho;
      best = j;
    }
  }
}

void gather_ta(SparseVecView x, double y_init, double v_ta, const MeanInvertedIndex& M,
               const SortedSubspaceIndex& T, GatherMode mode, double rho_max,
               GatherScratch& scr, Candidates& out, OpCell& ops) {
  const uint32_t r1_end = M.params.r1_end();
  out.clear();
  const bool all = mode == GatherMode::all;
  const uint32_t n = all ? M.k : M.n_moving;
  if (n == 0) return;
  scr.ensure(n);
  std::fill(scr.rho.begin(), scr.rho.begin() + n, 0.0);
  std::fill(scr.y.begin(), scr.y.begin() + n, y_init);
  for (uint32_t p = 0; p < x.nt; ++p) {
    const uint32_t s = x.terms[p];
    const double u = x.vals[p];
    if (s < r1_end) {
      const uint64_t off = M.offsets[s];
      const uint32_t end = all ? M.mf[s] : M.mfm[s];
      for (uint32_t q = 0; q < end; ++q) {
        const uint32_t c = M.ids[off + q];
        scr.rho[all ? c : M.compact_of[c]] += u * M.vals[off + q];
        ++ops.r1;
      }
    } else {
      const uint64_t row = s - r1_end;
      const uint64_t lo = all ? T.offsets[row] : T.moffsets[row];
      const uint64_t hi = all ? T.offsets[row + 1] : T.moffsets[row + 1];
      const double* vals = all ? T.vals.data() : T.mvals.data();
      const uint32_t* ids = all ? T.ids.data() : T.mids.data();
      for (uint64_t q = lo; q < hi; ++q) {
        const double v = vals[q];
        if (v < v_ta) break;  // descending order: nothing further qualifies
        const uint32_t c = ids[q];
        const uint32_t slot = all ? c : M.compact_of[c];
        scr.rho[slot] += u * v;
        scr.y[slot] -= u;
        ++ops.r2;
      }
    }
  }
  for (uint32_t slot = 0; slot < n; ++slot) {
    const double rho = scr.rho[slot];
    if (rho == 0.0) continue;  // bound tops out at rho_max, cannot pass
    const double ub = rho + v_ta * scr.y[slot];
    ++ops.bound;
    if (ub > rho_max) {
      out.ids.push_back(all ? slot : M.moving_ids[slot]);
      out.partials.push_back(rho);
    }
  }
  ops.cand += out.ids.size();
}

void verify_ta(SparseVecView x_sub, double v_ta, const PartialMeanIndex& P,
               const Candidates& cand, uint32_t& best, double& rho_max, OpCell& ops) {
  for (std::size_t q = 0; q < cand.ids.size(); ++q) {
    const uint32_t j = cand.ids[q];
    double rho = cand.partials[q];
    for (uint32_t p = 0; p < x_sub.nt; ++p) {
      const double w = P.term_row(x_sub.terms[p])[j];
      if (w < v_ta) {  // entries at or above v_ta were consumed by the gather
        rho += x_sub.vals[p] * w;
        ++ops.r3;
      }
    }
    if (rho > rho_max) {
      rho_max = rho;
      best = j;
    }
  }
}

void gather_cs(SparseVecView x, double xp_norm, const MeanInvertedIndex& M,
               const SquaredSubspaceIndex& Q, GatherMode mode, double rho_max,
               GatherScratch& scr, Candidates& out, OpCell& ops) {
  const uint32_t r1_end = M.params.r1_end();
  out.clear();
  const bool all = mode == GatherMode::all;
  const uint32_t n = all ? M.k : M.n_moving;
  if (n == 0) return;
  scr.ensure(n);
  std::fill(scr.rho.begin(), scr.rho.begin() + n, 0.0);
  std::fill(scr.y.begin(), scr.y.begin() + n, 0.0);
  for (uint32_t p = 0; p < x.nt; ++p) {
    const uint32_t s = x.terms[p];
    if (s < r1_end) {
      const double u = x.vals[p];
      const uint64_t off = M.offsets[s];
      const uint32_t end = all ? M.mf[s] : M.mfm[s];
      for (uint32_t q = 0; q < end; ++q) {
        const uint32_t c = M.ids[off + q];
        scr.rho[all ? c : M.compact_of[c]] += u * M.vals[off + q];
        ++ops.r1;
      }
    } else {
      const uint64_t row = s - r1_end;
      const uint64_t off = Q.offsets[row];
      const uint32_t end = all ? Q.mf[row] : Q.mfm[row];
      // Squared values were precomputed at index build; accumulation only.
      for (uint32_t q = 0; q < end; ++q)
        scr.y[all ? Q.ids[off + q] : M.compact_of[Q.ids[off + q]]] += Q.sq[off + q];
    }
  }
  for (uint32_t slot = 0; slot < n; ++slot) {
    const double ub = scr.rho[slot] + xp_norm * std::sqrt(scr.y[slot]);
    ++ops.bound;
    ++ops.sqrt_ops;
    if (ub > rho_max) {
      out.ids.push_back(all ? slot : M.moving_ids[slot]);
      out.partials.push_back(scr.rho[slot]);
    }
  }
  ops.cand += out.ids.size();
}

namespace {

// First position of the object's terms at or above the region boundary.
uint32_t subspace_begin(SparseVecView x, uint32_t r1_end) {
  const uint32_t* it = std::lower_bound(x.terms, x.terms + x.nt, r1_end);
  return static_cast<uint32_t>(it - x.terms);
}

template <class GatherFn, class VerifyFn>
AssignOutput assign_pass(const AssignInputs& in, uint32_t k, uint32_t r1_end,
                         GatherFn&& gather, VerifyFn&& verifier) {
  const Corpus& corpus = *in.corpus;
  const uint64_t n = corpus.n_docs;
  AssignOutput out;
  out.assign.resize(n);
  out.rho.resize(n);
  const unsigned workers = in.threads ? in.threads : 1;
  std::vector<OpCell> cells(std::min<std::size_t>(std::max(1u, workers), n ? n : 1));
  parallel_blocks(n, workers, [&](unsigned w, std::size_t ib, std::size_t ie) {
    GatherScratch scr;
    scr.ensure(k);
    Candidates cand;
    OpCell& ops = cells[w];
    for (std::size_t i = ib; i < ie; ++i) {
      SparseVecView x{corpus.terms.data() + corpus.offsets[i],
                      in.scaled_vals->data() + corpus.offsets[i], corpus.nt(i)};
      uint32_t best = (*in.assign)[i];
      double rho_max = (*in.rho_prev)[i];
      gather(i, x, rho_max, scr, cand, ops);
      const uint32_t sb = subspace_begin(x, r1_end);
      SparseVecView x_sub{x.terms + sb, x.vals + sb, x.nt - sb};
      verifier(i, x_sub, cand, best, rho_max, ops);
      out.assign[i] = best;
      out.rho[i] = rho_max;
    }
  });
  for (const OpCell& c : cells) out.ops.merge(c);
  return out;
}

}  // namespace

AssignOutput assign_es_family(const AssignInputs& in, const MeanInvertedIndex& M,
                              const PartialMeanIndex& P, bool force_all) {
  return assign_pass(
      in, M.k, M.params.r1_end(),
      [&](std::size_t i, SparseVecView x, double rho_max, GatherScratch& scr,
          Candidates& cand, OpCell& ops) {
        GatherMode mode = (!force_all && (*in.x_state)[i]) ? GatherMode::moving_only
                                                           : GatherMode::all;
        gather_es(x, (*in.y0)[i], M, mode, rho_max, scr, cand, ops);
      },
      [&](std::size_t, SparseVecView x_sub, const Candidates& cand, uint32_t& best,
          double& rho_max, OpCell& ops) {
        verify(x_sub, P, cand, best, rho_max, ops);
      });
}

AssignOutput assign_ta(const AssignInputs& in, const MeanInvertedIndex& M,
                       const SortedSubspaceIndex& T, const PartialMeanIndex& Pfull) {
  std::vector<double> v_ta(in.corpus->n_docs);
  for (std::size_t i = 0; i < v_ta.size(); ++i)
    v_ta[i] = (*in.rho_prev)[i] / (*in.l1)[i];
  return assign_pass(
      in, M.k, M.params.r1_end(),
      [&](std::size_t i, SparseVecView x, double rho_max, GatherScratch& scr,
          Candidates& cand, OpCell& ops) {
        GatherMode mode = (*in.x_state)[i] ? GatherMode::moving_only : GatherMode::all;
        gather_ta(x, (*in.y0)[i], v_ta[i], M, T, mode, rho_max, scr, cand, ops);
      },
      [&](std::size_t i, SparseVecView x_sub, const Candidates& cand, uint32_t& best,
          double& rho_max, OpCell& ops) {
        verify_ta(x_sub, v_ta[i], Pfull, cand, best, rho_max, ops);
      });
}

AssignOutput assign_cs(const AssignInputs& in, const MeanInvertedIndex& M,
                       const SquaredSubspaceIndex& Q, const PartialMeanIndex& Pfull) {
  return assign_pass(
      in, M.k, M.params.r1_end(),
      [&](std::size_t i, SparseVecView x, double rho_max, GatherScratch& scr,
          Candidates& cand, OpCell& ops) {
        GatherMode mode = (*in.x_state)[i] ? GatherMode::moving_only : GatherMode::all;
        gather_cs(x, (*in.xp_norm)[i], M, Q, mode, rho_max, scr, cand, ops);
      },
      [&](std::size_t, SparseVecView x_sub, const Candidates& cand, uint32_t& best,
          double& rho_max, OpCell& ops) {
        verify(x_sub, Pfull, cand, best, rho_max, ops);
      });
}

}  // namespace skm
