#include "skm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "skm/error.hpp"

namespace skm {

double cpr(uint64_t candidate_sum, uint64_t n_docs, uint32_t k) {
  if (n_docs == 0 || k == 0) throw config_error("cpr needs a nonempty run");
  return static_cast<double>(candidate_sum) /
         (static_cast<double>(n_docs) * static_cast<double>(k));
}

ZipfFit rank_frequency_profile(std::vector<double> freqs, uint64_t rank_lo,
                               uint64_t rank_hi) {
  ZipfFit fit;
  std::sort(freqs.begin(), freqs.end(), std::greater<double>());
  while (!freqs.empty() && freqs.back() <= 0.0) freqs.pop_back();
  fit.sorted = std::move(freqs);
  uint64_t n = fit.sorted.size();
  uint64_t lo = std::max<uint64_t>(rank_lo, 1);
  uint64_t hi = std::min<uint64_t>(rank_hi, n);
  if (hi < lo + 1) {
    fit.degenerate = true;
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  uint64_t m = hi - lo + 1;
  for (uint64_t r = lo; r <= hi; ++r) {
    double x = std::log(static_cast<double>(r));
    double y = std::log(fit.sorted[r - 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = m * sxx - sx * sx;
  if (denom == 0.0) {
    fit.degenerate = true;
    return fit;
  }
  double slope = (m * sxy - sx * sy) / denom;
  fit.alpha = -slope;
  if (fit.sorted[lo - 1] == fit.sorted[hi - 1]) {
    // A flat window has no law to fit; report no slope rather than noise.
    fit.degenerate = true;
    fit.alpha = 0.0;
  }
  return fit;
}

std::vector<std::pair<uint64_t, double>> df_mf_scatter(const std::vector<uint64_t>& df,
                                                       const std::vector<uint32_t>& mf) {
  if (df.size() != mf.size())
    throw config_error("df and mf arrays must align per canonical term");
  std::map<uint64_t, std::pair<double, uint64_t>> acc;  // df -> (sum mf, count)
  for (std::size_t s = 0; s < df.size(); ++s) {
    auto& slot = acc[df[s]];
    slot.first += mf[s];
    slot.second += 1;
  }
  std::vector<std::pair<uint64_t, double>> out;
  out.reserve(acc.size());
  for (auto& [dfv, sc] : acc)
    out.emplace_back(dfv, sc.first / static_cast<double>(sc.second));
  return out;
}

CpsProfile cps_profile(const Corpus& corpus, const MeanSet& means,
                       const std::vector<uint32_t>& assign, double bin_width) {
  if (!(bin_width > 0.0) || bin_width > 1.0)
    throw config_error("cps bin width must lie in (0, 1]");
  const uint64_t bins = static_cast<uint64_t>(std::llround(1.0 / bin_width));
  CpsProfile prof;
  prof.bin_width = bin_width;
  std::vector<double> sum(bins, 0.0), sumsq(bins, 0.0);
  uint64_t used = 0;
  std::vector<double> parts;
  std::vector<double> cum;

  for (uint64_t i = 0; i < corpus.n_docs; ++i) {
    SparseVecView x = corpus.doc(i);
    const double* row = means.row(assign[i]);
    parts.clear();
    double rho = 0.0;
    for (uint32_t p = 0; p < x.nt; ++p) {
      double t = x.vals[p] * row[x.terms[p]];
      parts.push_back(t);
      rho += t;
    }
    if (rho == 0.0) {
      prof.excluded += 1;
      continue;
    }
    std::sort(parts.begin(), parts.end(), std::greater<double>());
    cum.assign(parts.size() + 1, 0.0);
    for (std::size_t h = 0; h < parts.size(); ++h) cum[h + 1] = cum[h] + parts[h];
    for (auto& c : cum) c /= rho;
    for (uint64_t b = 0; b < bins; ++b) {
      double pos = static_cast<double>(b + 1) * bin_width * static_cast<double>(x.nt);
      double fl = std::floor(pos);
      std::size_t lo = static_cast<std::size_t>(fl);
      double v;
      if (lo >= parts.size())
        v = cum[parts.size()];
      else
        v = cum[lo] + (pos - fl) * (cum[lo + 1] - cum[lo]);
      sum[b] += v;
      sumsq[b] += v * v;
    }
    ++used;
  }
  if (used == 0) throw config_error("cps profile has no objects with positive similarity");
  prof.mean.resize(bins);
  prof.stddev.resize(bins);
  for (uint64_t b = 0; b < bins; ++b) {
    double m = sum[b] / static_cast<double>(used);
    prof.mean[b] = m;
    double var = sumsq[b] / static_cast<double>(used) - m * m;
    prof.stddev[b] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return prof;
}

double nmi(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  if (a.size() != b.size() || a.empty())
    throw config_error("nmi needs two equal-length nonempty labelings");
  // A labeling against itself has I = H on both sides; evaluating the
  // quotient through logs would only accumulate rounding around 1.
  if (a == b) return 1.0;
  const double n = static_cast<double>(a.size());
  uint32_t ka = *std::max_element(a.begin(), a.end()) + 1;
  uint32_t kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<uint64_t> cont(static_cast<std::size_t>(ka) * kb, 0);
  std::vector<uint64_t> ca(ka, 0), cb(kb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    cont[static_cast<std::size_t>(a[i]) * kb + b[i]] += 1;
    ca[a[i]] += 1;
    cb[b[i]] += 1;
  }
  double ha = 0.0, hb = 0.0;
  for (uint64_t c : ca)
    if (c) ha -= (c / n) * std::log(c / n);
  for (uint64_t c : cb)
    if (c) hb -= (c / n) * std::log(c / n);
  if (ha == 0.0 && hb == 0.0) return 1.0;  // identical single-cluster partitions
  if (ha == 0.0 || hb == 0.0)
    throw config_error("nmi undefined: exactly one partition has zero entropy");
  double info = 0.0;
  for (uint32_t x = 0; x < ka; ++x) {
    for (uint32_t y = 0; y < kb; ++y) {
      uint64_t c = cont[static_cast<std::size_t>(x) * kb + y];
      if (!c) continue;
      double pxy = c / n;
      info += pxy * std::log(n * static_cast<double>(c) /
                             (static_cast<double>(ca[x]) * static_cast<double>(cb[y])));
    }
  }
  return info / std::sqrt(ha * hb);
}

double clustering_objective(const Corpus& corpus, const MeanSet& means,
                            const std::vector<uint32_t>& assign) {
  // Sequential sum over objects keeps the value independent of worker counts.
  double total = 0.0;
  for (uint64_t i = 0; i < corpus.n_docs; ++i) {
    SparseVecView x = corpus.doc(i);
    const double* row = means.row(assign[i]);
    double acc = 0.0;
    for (uint32_t p = 0; p < x.nt; ++p) acc += x.vals[p] * row[x.terms[p]];
    total += acc;
  }
  return total;
}

double cv(const std::vector<double>& samples) {
  if (samples.size() < 2) throw config_error("cv needs at least two samples");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  if (mean == 0.0) throw config_error("cv undefined for zero mean");
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(samples.size());
  return std::sqrt(var) / mean;
}

}  // namespace skm
