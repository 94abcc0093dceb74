#include "skm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "skm/error.hpp"
#include "skm/rng.hpp"

namespace skm {

SynthCorpus generate_synth(const SynthConfig& cfg) {
  if (cfg.n_docs == 0) throw config_error("synth: need at least one document");
  if (cfg.vocab == 0) throw config_error("synth: need a vocabulary");
  if (cfg.topics == 0 || cfg.topics > cfg.vocab)
    throw config_error("synth: topic count out of [1, vocab]");
  if (!(cfg.alpha > 0.0)) throw config_error("synth: alpha must be positive");
  if (cfg.boost < 1.0) throw config_error("synth: boost must be at least 1");
  if (cfg.min_len == 0) throw config_error("synth: minimum length must be positive");
  if (!(cfg.avg_len > static_cast<double>(cfg.min_len)))
    throw config_error("synth: average length must exceed the minimum");

  // One cumulative weight table per topic; the inverse-CDF draw below is the
  // only consumer, so unnormalized running sums are enough.
  std::vector<double> base(cfg.vocab);
  for (uint32_t s = 0; s < cfg.vocab; ++s)
    base[s] = std::pow(static_cast<double>(s + 1), -cfg.alpha);
  std::vector<std::vector<double>> cum(cfg.topics);
  for (uint32_t t = 0; t < cfg.topics; ++t) {
    cum[t].resize(cfg.vocab);
    double acc = 0.0;
    for (uint32_t s = 0; s < cfg.vocab; ++s) {
      acc += s % cfg.topics == t ? base[s] * cfg.boost : base[s];
      cum[t][s] = acc;
    }
  }

  Rng rng(cfg.seed);
  SynthCorpus out;
  out.config = cfg;
  out.labels.resize(cfg.n_docs);
  out.docs.resize(cfg.n_docs);
  std::vector<uint32_t> tokens;
  const double span = cfg.avg_len - static_cast<double>(cfg.min_len);
  for (uint32_t i = 0; i < cfg.n_docs; ++i) {
    const uint32_t topic = static_cast<uint32_t>(rng.next_below(cfg.topics));
    out.labels[i] = topic;
    const double stretch = -std::log1p(-rng.next_double());  // exponential(1)
    const uint32_t len =
        cfg.min_len + static_cast<uint32_t>(std::floor(stretch * span));
    tokens.clear();
    const std::vector<double>& c = cum[topic];
    for (uint32_t t = 0; t < len; ++t) {
      const double u = rng.next_double() * c.back();
      const uint32_t s = static_cast<uint32_t>(
          std::upper_bound(c.begin(), c.end(), u) - c.begin());
      tokens.push_back(std::min(s, cfg.vocab - 1));
    }
    std::sort(tokens.begin(), tokens.end());
    std::vector<std::pair<uint32_t, uint32_t>>& doc = out.docs[i];
    for (std::size_t p = 0; p < tokens.size();) {
      std::size_t q = p;
      while (q < tokens.size() && tokens[q] == tokens[p]) ++q;
      doc.emplace_back(tokens[p] + 1, static_cast<uint32_t>(q - p));
      p = q;
    }
    out.nnz += doc.size();
  }
  return out;
}

void write_bag_of_words(const SynthCorpus& s, std::ostream& out) {
  out << s.config.n_docs << "\n" << s.config.vocab << "\n" << s.nnz << "\n";
  for (uint32_t i = 0; i < s.docs.size(); ++i)
    for (const auto& [term, count] : s.docs[i])
      out << i + 1 << " " << term << " " << count << "\n";
}

}  // namespace skm
