#include "skm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skm/error.hpp"
#include "skm/parallel.hpp"

namespace skm {

namespace {

// Per-term statistics over the unscaled mean values, 1-based term ids.
// Terms below s_min only need mf (they stay in region 1 for every grid
// point); terms at or above s_min also need the sorted nonzero values and
// their prefix sums so that mfh and the average bound inflation can be
// evaluated at any value candidate with one binary search.
struct TermStats {
  uint32_t s_min = 1;
  std::vector<uint32_t> mf;             // all terms, index s-1
  std::vector<std::vector<double>> vals;    // ascending, terms >= s_min
  std::vector<std::vector<double>> prefix;  // running sums, one longer
};

TermStats collect_term_stats(const MeanSet& means, uint32_t s_min) {
  TermStats ts;
  ts.s_min = s_min;
  ts.mf.assign(means.d, 0);
  ts.vals.resize(means.d - s_min + 1);
  for (uint32_t j = 0; j < means.k; ++j) {
    const double* row = means.row(j);
    for (uint64_t s0 = 0; s0 < means.d; ++s0) {
      if (row[s0] == 0.0) continue;
      ++ts.mf[s0];
      if (s0 + 1 >= s_min) ts.vals[s0 + 1 - s_min].push_back(row[s0]);
    }
  }
  ts.prefix.resize(ts.vals.size());
  for (std::size_t r = 0; r < ts.vals.size(); ++r) {
    std::sort(ts.vals[r].begin(), ts.vals[r].end());
    ts.prefix[r].resize(ts.vals[r].size() + 1);
    ts.prefix[r][0] = 0.0;
    for (std::size_t p = 0; p < ts.vals[r].size(); ++p)
      ts.prefix[r][p + 1] = ts.prefix[r][p] + ts.vals[r][p];
  }
  return ts;
}

// Average over the k means of the gap between the bounded and the true
// contribution of term s, per unit of object value. Means at or above the
// candidate are handled exactly (gap zero); means below it are bounded by
// the candidate value; absent means are bounded by the candidate value too.
double avg_inflation(const TermStats& ts, uint32_t s, double v_h, uint32_t k) {
  const std::size_t r = s - ts.s_min;
  const auto& v = ts.vals[r];
  const std::size_t mfl =
      std::lower_bound(v.begin(), v.end(), v_h) - v.begin();
  const double sum_low = ts.prefix[r][mfl];
  const double mf = static_cast<double>(v.size());
  return ((static_cast<double>(mfl) * v_h - sum_low) +
          (static_cast<double>(k) - mf) * v_h) /
         static_cast<double>(k);
}

uint32_t mfh_at(const TermStats& ts, uint32_t s, double v_h) {
  const auto& v = ts.vals[s - ts.s_min];
  return static_cast<uint32_t>(
      v.end() - std::lower_bound(v.begin(), v.end(), v_h));
}

}  // namespace

PartialObjectIndex build_partial_object_index(const Corpus& corpus, uint32_t s_min) {
  if (s_min < 1 || s_min > corpus.n_terms)
    throw config_error("partial object index: term floor out of range");
  PartialObjectIndex p;
  p.s_min = s_min;
  p.d = corpus.n_terms;
  const uint64_t rows = corpus.n_terms - s_min + 1;
  p.offsets.assign(rows + 1, 0);
  for (uint64_t e = 0; e < corpus.nnz(); ++e) {
    const uint32_t s = corpus.terms[e] + 1;
    if (s >= s_min) ++p.offsets[s - s_min + 1];
  }
  for (uint64_t r = 0; r < rows; ++r) p.offsets[r + 1] += p.offsets[r];
  p.obj.resize(p.offsets[rows]);
  p.val.resize(p.offsets[rows]);
  std::vector<uint64_t> cursor(p.offsets.begin(), p.offsets.end() - 1);
  for (uint32_t i = 0; i < corpus.n_docs; ++i) {
    const SparseVecView x = corpus.doc(i);
    for (uint32_t t = 0; t < x.nt; ++t) {
      const uint32_t s = x.terms[t] + 1;
      if (s < s_min) continue;
      const uint64_t at = cursor[s - s_min]++;
      p.obj[at] = i;
      p.val[at] = x.vals[t];
    }
  }
  return p;
}

EstimatorGrid default_grid(const MeanSet& means, double smin_frac,
                           uint32_t n_candidates) {
  if (n_candidates == 0) throw config_error("estimator grid: no candidates");
  if (smin_frac <= 0.0 || smin_frac > 1.0)
    throw config_error("estimator grid: term floor fraction out of (0, 1]");
  std::vector<double> nz;
  for (uint32_t j = 0; j < means.k; ++j) {
    const double* row = means.row(j);
    for (uint64_t s = 0; s < means.d; ++s)
      if (row[s] != 0.0) nz.push_back(row[s]);
  }
  if (nz.empty()) throw invariant_error("estimator grid: means are all zero");
  std::sort(nz.begin(), nz.end());
  auto percentile = [&](double q) {
    const double pos = q * static_cast<double>(nz.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, nz.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return nz[lo] + frac * (nz[hi] - nz[lo]);
  };
  const double lo = percentile(0.50);
  const double hi = percentile(0.999);
  EstimatorGrid grid;
  if (n_candidates == 1 || hi <= lo) {
    grid.v_candidates.push_back(lo);
  } else {
    const double step = (hi - lo) / static_cast<double>(n_candidates - 1);
    for (uint32_t c = 0; c < n_candidates; ++c) {
      const double v = lo + step * static_cast<double>(c);
      if (grid.v_candidates.empty() || v > grid.v_candidates.back())
        grid.v_candidates.push_back(v);
    }
  }
  grid.s_min = std::max<uint32_t>(
      1, static_cast<uint32_t>(
             std::ceil(smin_frac * static_cast<double>(means.d))));
  return grid;
}

std::vector<double> mean_column_sums(const MeanSet& means) {
  std::vector<double> sums(means.d, 0.0);
  for (uint32_t j = 0; j < means.k; ++j) {
    const double* row = means.row(j);
    for (uint64_t s = 0; s < means.d; ++s) sums[s] += row[s];
  }
  return sums;
}

double avg_similarity(SparseVecView x, const std::vector<double>& col_sums,
                      uint32_t k) {
  double acc = 0.0;
  for (uint32_t t = 0; t < x.nt; ++t) acc += x.vals[t] * col_sums[x.terms[t]];
  return acc / static_cast<double>(k);
}

double prob_pass(double delta_rho_bar, double rho_assigned, double rho_bar,
                 uint32_t k) {
  if (k == 0) throw config_error("prob_pass: k must be positive");
  const double inv_k = 1.0 / static_cast<double>(k);
  if (rho_assigned <= rho_bar) return 1.0;
  if (delta_rho_bar <= 0.0) return inv_k;
  const double span = rho_assigned - rho_bar;
  if (delta_rho_bar == span) return std::exp(-1.0);
  const double x = delta_rho_bar / span;
  const double p =
      inv_k * std::pow(static_cast<double>(k) / std::exp(1.0), x);
  return std::clamp(p, inv_k, 1.0);
}

double pass_factor(double delta_rho_bar, double rho_assigned, double rho_bar,
                   uint32_t k) {
  if (k == 0) throw config_error("pass_factor: k must be positive");
  const double kd = static_cast<double>(k);
  if (rho_assigned <= rho_bar) return kd;
  if (delta_rho_bar <= 0.0) return 1.0;
  const double span = rho_assigned - rho_bar;
  if (delta_rho_bar == span) return kd * std::exp(-1.0);
  const double x = delta_rho_bar / span;
  const double f = std::pow(kd / std::exp(1.0), x);
  return std::clamp(f, 1.0, kd);
}

CostBreakdown objective(uint32_t s_prime, double v_h, const MeanSet& means,
                        const Corpus& corpus,
                        const std::vector<double>& rho_assigned,
                        const std::vector<double>& rho_bar) {
  if (s_prime < 1 || s_prime > means.d + 1)
    throw config_error("objective: term threshold out of range");
  const TermStats ts = collect_term_stats(means, s_prime);
  CostBreakdown cost;
  for (uint32_t s = 1; s < s_prime; ++s)
    cost.phi1 += static_cast<double>(corpus.df[s - 1]) *
                 static_cast<double>(ts.mf[s - 1]);
  for (uint32_t s = s_prime; s <= means.d; ++s)
    cost.phi2 += static_cast<double>(corpus.df[s - 1]) *
                 static_cast<double>(mfh_at(ts, s, v_h));
  for (uint32_t i = 0; i < corpus.n_docs; ++i) {
    const SparseVecView x = corpus.doc(i);
    uint32_t nt_high = 0;
    double drho = 0.0;
    for (uint32_t t = 0; t < x.nt; ++t) {
      const uint32_t s = x.terms[t] + 1;
      if (s < s_prime) continue;
      ++nt_high;
      drho += x.vals[t] * avg_inflation(ts, s, v_h, means.k);
    }
    if (nt_high == 0) continue;
    cost.phi3 += static_cast<double>(nt_high) *
                 pass_factor(drho, rho_assigned[i], rho_bar[i], means.k);
  }
  cost.total = cost.phi1 + cost.phi2 + cost.phi3;
  return cost;
}

EstResult est_params(const MeanSet& means, const Corpus& corpus,
                     const PartialObjectIndex& pobj, const EstimatorGrid& grid,
                     const std::vector<double>& rho_assigned,
                     const std::vector<double>& rho_bar, unsigned threads,
                     bool fixed_s_prime_1) {
  if (grid.v_candidates.empty())
    throw config_error("est_params: empty value grid");
  const uint32_t s_min = fixed_s_prime_1 ? 1 : grid.s_min;
  if (s_min < 1 || s_min > means.d)
    throw config_error("est_params: term floor out of range");
  if (pobj.s_min != s_min || pobj.d != means.d)
    throw invariant_error("est_params: object index does not match the sweep");
  if (rho_assigned.size() != corpus.n_docs || rho_bar.size() != corpus.n_docs)
    throw invariant_error("est_params: similarity vectors sized wrong");

  const TermStats ts = collect_term_stats(means, s_min);
  double base_phi1 = 0.0;
  for (uint64_t s0 = 0; s0 < means.d; ++s0)
    base_phi1 +=
        static_cast<double>(corpus.df[s0]) * static_cast<double>(ts.mf[s0]);

  const std::size_t n_h = grid.v_candidates.size();
  const uint32_t cols = fixed_s_prime_1 ? 1 : means.d - s_min + 1;
  std::vector<std::vector<double>> rows(n_h);

  // Sweeps for different value candidates are independent; each worker
  // reuses one set of per-object accumulators across its candidates.
  parallel_blocks(n_h, threads, [&](unsigned, std::size_t h_begin,
                                    std::size_t h_end) {
    std::vector<uint32_t> nt_high(corpus.n_docs);
    std::vector<double> drho(corpus.n_docs);
    std::vector<double> contrib(corpus.n_docs);
    for (std::size_t h = h_begin; h < h_end; ++h) {
      const double v_h = grid.v_candidates[h];
      std::fill(nt_high.begin(), nt_high.end(), 0u);
      std::fill(drho.begin(), drho.end(), 0.0);
      std::fill(contrib.begin(), contrib.end(), 0.0);
      rows[h].assign(cols, 0.0);
      double phi1 = base_phi1;
      double phi2 = 0.0;
      double phi3 = 0.0;
      for (uint32_t sp = static_cast<uint32_t>(means.d); sp >= s_min; --sp) {
        const double df = static_cast<double>(corpus.df[sp - 1]);
        phi1 -= df * static_cast<double>(ts.mf[sp - 1]);
        phi2 += df * static_cast<double>(mfh_at(ts, sp, v_h));
        const double dv = avg_inflation(ts, sp, v_h, means.k);
        const uint64_t row = sp - s_min;
        for (uint64_t e = pobj.offsets[row]; e < pobj.offsets[row + 1]; ++e) {
          const uint32_t i = pobj.obj[e];
          nt_high[i] += 1;
          drho[i] += pobj.val[e] * dv;
          const double nc =
              static_cast<double>(nt_high[i]) *
              pass_factor(drho[i], rho_assigned[i], rho_bar[i], means.k);
          phi3 += nc - contrib[i];
          contrib[i] = nc;
        }
        if (!fixed_s_prime_1)
          rows[h][sp - s_min] = phi1 + phi2 + phi3;
        else if (sp == 1)
          rows[h][0] = phi1 + phi2 + phi3;
      }
    }
  });

  EstResult res;
  res.s_min = s_min;
  res.v_candidates = grid.v_candidates;
  res.grid_costs = std::move(rows);
  res.best_cost = std::numeric_limits<double>::infinity();
  // Ties prefer the smaller value candidate, then the larger term threshold.
  for (std::size_t h = 0; h < n_h; ++h) {
    for (uint32_t c = cols; c-- > 0;) {
      const double j = res.grid_costs[h][c];
      if (j < res.best_cost) {
        res.best_cost = j;
        res.params.t_th = fixed_s_prime_1 ? 1 : s_min + c;
        res.params.v_th = grid.v_candidates[h];
      }
    }
  }
  return res;
}

}  // namespace skm
