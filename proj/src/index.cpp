#include "skm/index.hpp"

#include <algorithm>
#include <cmath>

#include "skm/error.hpp"
#include "skm/parallel.hpp"

namespace skm {

MeanSet compute_means(const Corpus& corpus, const std::vector<std::vector<uint32_t>>& members,
                      double v_th, const MeanSet* previous,
                      std::vector<uint32_t>* empties) {
  const uint32_t k = static_cast<uint32_t>(members.size());
  const uint64_t d = corpus.n_terms;
  if (previous && (previous->k != k || previous->d != d))
    throw invariant_error("previous mean set has mismatched shape");

  MeanSet m;
  m.k = k;
  m.d = d;
  m.v_th = v_th;
  m.mu.assign(static_cast<std::size_t>(k) * d, 0.0);
  m.sizes.assign(k, 0);
  m.fresh.assign(k, 1);

  parallel_blocks(k, default_threads(), [&](unsigned, std::size_t jb, std::size_t je) {
    for (std::size_t j = jb; j < je; ++j) {
      const auto& list = members[j];
      double* row = m.row(static_cast<uint32_t>(j));
      m.sizes[j] = list.size();
      if (list.empty()) {
        if (previous) {
          const double* prev = previous->row(static_cast<uint32_t>(j));
          std::copy(prev, prev + d, row);
          m.fresh[j] = 0;
        }
        continue;
      }
      // Ascending object id keeps the accumulation order fixed.
      for (uint32_t i : list) {
        SparseVecView x = corpus.doc(i);
        for (uint32_t p = 0; p < x.nt; ++p) row[x.terms[p]] += x.vals[p];
      }
      double sq = 0.0;
      for (uint64_t s = 0; s < d; ++s) sq += row[s] * row[s];
      double norm = std::sqrt(sq);
      if (norm < 1e-10)
        throw invariant_error("degenerate mean with vanishing norm in cluster " +
                              std::to_string(j));
      for (uint64_t s = 0; s < d; ++s) row[s] /= norm;
    }
  });

  if (empties) {
    empties->clear();
    for (uint32_t j = 0; j < k; ++j)
      if (members[j].empty()) empties->push_back(j);
  }
  return m;
}

MeanInvertedIndex build_inverted_index(const MeanSet& means, StructuralParams params,
                                       const std::vector<uint8_t>& moving) {
  const uint32_t k = means.k;
  const uint64_t d = means.d;
  if (params.t_th < 1 || params.t_th > d + 1)
    throw config_error("term threshold out of range [1, D+1]");
  if (!(params.v_th > 0.0) || params.v_th > 1.0)
    throw config_error("value threshold out of range (0, 1]");
  const uint32_t r1_end = params.r1_end();

  MeanInvertedIndex idx;
  idx.k = k;
  idx.d = d;
  idx.params = params;
  idx.params.v_th = params.v_th;
  idx.mf.assign(d, 0);
  idx.mfh.assign(d, 0);
  idx.mfm.assign(d, 0);
  idx.offsets.assign(d + 1, 0);

  for (uint32_t j = 0; j < k; ++j) {
    const double* row = means.row(j);
    for (uint64_t s = 0; s < d; ++s)
      if (row[s] != 0.0) idx.offsets[s + 1] += 1;
  }
  for (uint64_t s = 0; s < d; ++s) idx.offsets[s + 1] += idx.offsets[s];
  idx.ids.resize(idx.offsets[d]);
  idx.vals.resize(idx.offsets[d]);

  idx.moving_ids.clear();
  idx.compact_of.assign(k, UINT32_MAX);
  for (uint32_t j = 0; j < k; ++j) {
    if (moving[j]) {
      idx.compact_of[j] = static_cast<uint32_t>(idx.moving_ids.size());
      idx.moving_ids.push_back(j);
    }
  }
  idx.n_moving = static_cast<uint32_t>(idx.moving_ids.size());

  const double v_th = params.v_th;
  parallel_blocks(d, default_threads(), [&](unsigned, std::size_t sb, std::size_t se) {
    std::vector<std::pair<uint32_t, double>> ord[2][2];  // [moving][high]
    for (std::size_t s = sb; s < se; ++s) {
      for (auto& a : ord)
        for (auto& b : a) b.clear();
      for (uint32_t j = 0; j < k; ++j) {
        double v = means.row(j)[s];
        if (v == 0.0) continue;
        double scaled = v / v_th;
        bool high = s < r1_end || v >= v_th;  // region 1 entries count as "high"
        ord[moving[j] ? 1 : 0][high ? 1 : 0].emplace_back(j, scaled);
      }
      uint64_t at = idx.offsets[s];
      auto emit = [&](const std::vector<std::pair<uint32_t, double>>& grp) {
        for (auto& [j, v] : grp) {
          idx.ids[at] = j;
          idx.vals[at] = v;
          ++at;
        }
      };
      // Layout: moving-high, invariant-high, then low entries (ascending id).
      emit(ord[1][1]);
      emit(ord[0][1]);
      {
        std::vector<std::pair<uint32_t, double>> low;
        low.reserve(ord[1][0].size() + ord[0][0].size());
        for (auto& e : ord[1][0]) low.push_back(e);
        for (auto& e : ord[0][0]) low.push_back(e);
        std::sort(low.begin(), low.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        emit(low);
      }
      idx.mf[s] = static_cast<uint32_t>(at - idx.offsets[s]);
      if (s < r1_end) {
        idx.mfm[s] = static_cast<uint32_t>(ord[1][1].size());
        idx.mfh[s] = 0;  // tracked only in the thresholded subspace
      } else {
        idx.mfh[s] = static_cast<uint32_t>(ord[1][1].size() + ord[0][1].size());
        idx.mfm[s] = static_cast<uint32_t>(ord[1][1].size());
      }
    }
  });
  return idx;
}

PartialMeanIndex build_partial_index(const MeanSet& means, StructuralParams params,
                                     bool full_values) {
  const uint32_t r1_end = params.r1_end();
  PartialMeanIndex p;
  p.k = means.k;
  p.d = means.d;
  p.r1_end = r1_end;
  p.full_values = full_values;
  if (r1_end >= means.d) return p;  // empty subspace
  p.w.assign(static_cast<std::size_t>(means.d - r1_end) * means.k, 0.0);
  const double v_th = params.v_th;
  parallel_blocks(means.d - r1_end, default_threads(),
                  [&](unsigned, std::size_t rb, std::size_t re) {
                    for (std::size_t r = rb; r < re; ++r) {
                      uint64_t s = r1_end + r;
                      double* row = p.w.data() + r * means.k;
                      for (uint32_t j = 0; j < means.k; ++j) {
                        double v = means.row(j)[s];
                        if (v == 0.0) continue;
                        if (full_values)
                          row[j] = v;
                        else if (v < v_th)
                          row[j] = v / v_th;
                      }
                    }
                  });
  return p;
}

SortedSubspaceIndex build_sorted_index(const MeanSet& means, StructuralParams params,
                                       const std::vector<uint8_t>& moving) {
  const uint32_t r1_end = params.r1_end();
  SortedSubspaceIndex t;
  t.k = means.k;
  t.d = means.d;
  t.r1_end = r1_end;
  uint64_t rows = means.d > r1_end ? means.d - r1_end : 0;
  t.offsets.assign(rows + 1, 0);
  t.moffsets.assign(rows + 1, 0);
  if (rows == 0) return t;

  for (uint32_t j = 0; j < means.k; ++j) {
    const double* row = means.row(j);
    for (uint64_t s = r1_end; s < means.d; ++s) {
      if (row[s] == 0.0) continue;
      t.offsets[s - r1_end + 1] += 1;
      if (moving[j]) t.moffsets[s - r1_end + 1] += 1;
    }
  }
  for (uint64_t r = 0; r < rows; ++r) {
    t.offsets[r + 1] += t.offsets[r];
    t.moffsets[r + 1] += t.moffsets[r];
  }
  t.ids.resize(t.offsets[rows]);
  t.vals.resize(t.offsets[rows]);
  t.mids.resize(t.moffsets[rows]);
  t.mvals.resize(t.moffsets[rows]);

  parallel_blocks(rows, default_threads(), [&](unsigned, std::size_t rb, std::size_t re) {
    std::vector<std::pair<double, uint32_t>> all, mov;
    for (std::size_t r = rb; r < re; ++r) {
      all.clear();
      mov.clear();
      uint64_t s = r1_end + r;
      for (uint32_t j = 0; j < means.k; ++j) {
        double v = means.row(j)[s];
        if (v == 0.0) continue;
        all.emplace_back(v, j);
        if (moving[j]) mov.emplace_back(v, j);
      }
      auto desc = [](const std::pair<double, uint32_t>& a,
                     const std::pair<double, uint32_t>& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      };
      std::sort(all.begin(), all.end(), desc);
      std::sort(mov.begin(), mov.end(), desc);
      uint64_t at = t.offsets[r];
      for (auto& [v, j] : all) {
        t.vals[at] = v;
        t.ids[at] = j;
        ++at;
      }
      at = t.moffsets[r];
      for (auto& [v, j] : mov) {
        t.mvals[at] = v;
        t.mids[at] = j;
        ++at;
      }
    }
  });
  return t;
}

SquaredSubspaceIndex build_squared_index(const MeanSet& means, StructuralParams params,
                                         const std::vector<uint8_t>& moving) {
  const uint32_t r1_end = params.r1_end();
  SquaredSubspaceIndex q;
  q.k = means.k;
  q.d = means.d;
  q.r1_end = r1_end;
  uint64_t rows = means.d > r1_end ? means.d - r1_end : 0;
  q.offsets.assign(rows + 1, 0);
  q.mf.assign(rows, 0);
  q.mfm.assign(rows, 0);
  if (rows == 0) return q;

  for (uint32_t j = 0; j < means.k; ++j) {
    const double* row = means.row(j);
    for (uint64_t s = r1_end; s < means.d; ++s)
      if (row[s] != 0.0) q.offsets[s - r1_end + 1] += 1;
  }
  for (uint64_t r = 0; r < rows; ++r) q.offsets[r + 1] += q.offsets[r];
  q.ids.resize(q.offsets[rows]);
  q.sq.resize(q.offsets[rows]);

  parallel_blocks(rows, default_threads(), [&](unsigned, std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      uint64_t s = r1_end + r;
      uint64_t at = q.offsets[r];
      uint32_t n_mov = 0;
      for (int pass = 0; pass < 2; ++pass) {
        for (uint32_t j = 0; j < means.k; ++j) {
          if ((moving[j] != 0) != (pass == 0)) continue;
          double v = means.row(j)[s];
          if (v == 0.0) continue;
          q.ids[at] = j;
          q.sq[at] = v * v;
          ++at;
          if (pass == 0) ++n_mov;
        }
      }
      q.mf[r] = static_cast<uint32_t>(at - q.offsets[r]);
      q.mfm[r] = n_mov;
    }
  });
  return q;
}

std::vector<double> scale_object_values(const Corpus& corpus, double v_th) {
  std::vector<double> out(corpus.vals.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = corpus.vals[i] * v_th;
  return out;
}

std::vector<double> assigned_similarities(const Corpus& corpus,
                                          const std::vector<double>& scaled_vals,
                                          const MeanSet& means,
                                          const std::vector<uint32_t>& assign,
                                          unsigned threads) {
  std::vector<double> rho(corpus.n_docs, 0.0);
  const double v_th = means.v_th;
  parallel_blocks(corpus.n_docs, threads, [&](unsigned, std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i) {
      const double* row = means.row(assign[i]);
      const uint32_t* terms = corpus.terms.data() + corpus.offsets[i];
      const double* u = scaled_vals.data() + corpus.offsets[i];
      uint32_t nt = corpus.nt(i);
      double acc = 0.0;
      for (uint32_t p = 0; p < nt; ++p) acc += u[p] * (row[terms[p]] / v_th);
      rho[i] = acc;
    }
  });
  return rho;
}

}  // namespace skm
