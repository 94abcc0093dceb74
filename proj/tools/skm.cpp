// skm: spherical k-means over sparse tf-idf document corpora.
//
// Subcommands: synth (generate a corpus), ingest (parse and summarize, with
// an optional binary cache), cluster (run one algorithm), estimate (report
// the structural-parameter sweep), profile (corpus and clustering curves),
// compare (run several algorithms and require identical assignments).
//
// Exit codes: 0 success, 1 bad configuration, 2 parse or I/O failure,
// 3 violated internal invariant.
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "skm/cluster.hpp"
#include "skm/error.hpp"
#include "skm/estimator.hpp"
#include "skm/metrics.hpp"
#include "skm/report.hpp"
#include "skm/synth.hpp"

namespace {

skm::Corpus load_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw skm::parse_error("cannot open " + path);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  constexpr char kMagic[8] = {'S', 'K', 'M', 'C', 'O', 'R', 'P', '\0'};
  if (in.gcount() == sizeof magic && std::memcmp(magic, kMagic, sizeof magic) == 0) {
    in.close();
    return skm::load_corpus(path);
  }
  in.clear();
  in.seekg(0);
  skm::RawCorpus raw = skm::ingest_bag_of_words(in);
  return skm::build_features(raw, &std::cerr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw skm::parse_error("cannot write " + path);
  return out;
}

std::vector<double> parse_grid_spec(const std::string& spec) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(spec);
  if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !ss.eof())
    throw skm::config_error("grid spec must be lo:hi:step");
  if (!(step > 0.0) || hi < lo)
    throw skm::config_error("grid spec needs step > 0 and hi >= lo");
  std::vector<double> out;
  for (double v = lo; v <= hi + step * 1e-9; v += step) out.push_back(v);
  if (out.empty()) throw skm::config_error("grid spec produced no values");
  return out;
}

struct ClusterArgs {
  std::string input;
  skm::RunConfig cfg;
  std::string algorithm = "es-icp";
  uint32_t tth = 0;            // 0 = unset
  double vth = 0.0;            // 0 = unset
  std::string grid_spec;
  std::string assignments_out;
  std::string metrics_out;
  std::string summary_out;
};

void add_common_cluster_options(CLI::App* cmd, ClusterArgs& a) {
  cmd->add_option("--input", a.input, "corpus file (bag-of-words text or cache)")
      ->required();
  cmd->add_option("--k", a.cfg.k, "number of clusters")->required();
  cmd->add_option("--seed", a.cfg.seed, "random seed");
  cmd->add_option("--max-iters", a.cfg.max_iters, "iteration cap");
  cmd->add_option("--threads", a.cfg.threads, "worker threads (results never depend on this)");
  cmd->add_option("--tth", a.tth, "fixed term threshold (1-based, up to D+1)");
  cmd->add_option("--vth", a.vth, "fixed value threshold in (0, 1]");
  cmd->add_option("--tth-frac", a.cfg.tth_frac,
                  "term threshold as a fraction of D for ta-icp/cs-icp");
  cmd->add_option("--vth-grid", a.grid_spec, "estimation candidates, lo:hi:step");
  cmd->add_option("--smin-frac", a.cfg.smin_frac,
                  "estimation sweep floor as a fraction of D");
  cmd->add_option("--grid-size", a.cfg.grid_size, "default candidate count");
}

skm::RunConfig finish_config(ClusterArgs& a) {
  a.cfg.algorithm = skm::parse_algorithm(a.algorithm);
  if (a.tth != 0) a.cfg.t_th = a.tth;
  if (a.vth != 0.0) a.cfg.v_th = a.vth;
  if (!a.grid_spec.empty()) a.cfg.v_grid = parse_grid_spec(a.grid_spec);
  return a.cfg;
}

void print_run_brief(const skm::RunResult& res) {
  const skm::IterationRecord& last = res.iters.back();
  uint64_t mult = 0, cand = 0;
  for (const skm::IterationRecord& it : res.iters) {
    mult += it.mult_total();
    cand += it.candidates;
  }
  std::cout << "algorithm " << to_string(res.config.algorithm) << ", k "
            << res.config.k << ", seed " << res.config.seed << "\n"
            << "iterations " << res.iters.size()
            << (res.converged ? " (converged)" : " (iteration cap)") << "\n"
            << "params t_th " << res.params.t_th << ", v_th "
            << res.params.v_th
            << (res.estimation ? " (estimated)" : "") << "\n"
            << "objective " << std::setprecision(12) << last.objective << "\n"
            << "multiplications " << mult << ", candidates " << cand << "\n"
            << "history " << skm::hex64(skm::history_hash(res.history)) << "\n";
}

int cmd_synth(const skm::SynthConfig& scfg, const std::string& out_path,
              const std::string& labels_path) {
  skm::SynthCorpus synth = skm::generate_synth(scfg);
  std::ofstream out = open_out(out_path);
  skm::write_bag_of_words(synth, out);
  if (!out) throw skm::parse_error("short write on " + out_path);
  if (!labels_path.empty()) {
    std::ofstream lab = open_out(labels_path);
    for (uint32_t i = 0; i < synth.labels.size(); ++i)
      lab << i + 1 << " " << synth.labels[i] + 1 << "\n";
  }
  std::cout << "wrote " << out_path << ": " << scfg.n_docs << " docs, vocab "
            << scfg.vocab << ", " << synth.nnz << " entries\n";
  return 0;
}

int cmd_ingest(const std::string& input, const std::string& cache) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw skm::parse_error("cannot open " + input);
  skm::RawCorpus raw = skm::ingest_bag_of_words(in);
  skm::Corpus corpus = skm::build_features(raw, &std::cerr);
  const uint64_t declared = raw.n_terms;
  std::cout << "documents " << corpus.n_docs
            << (corpus.removed_docs ? " (dropped " + std::to_string(corpus.removed_docs) + ")"
                                    : "")
            << "\n"
            << "declared vocabulary " << declared << "\n"
            << "effective vocabulary " << corpus.n_terms << " ("
            << std::setprecision(4)
            << 100.0 * static_cast<double>(corpus.n_terms) /
                   static_cast<double>(declared ? declared : 1)
            << "%)\n"
            << "entries " << corpus.nnz() << ", avg distinct terms "
            << std::setprecision(6) << corpus.avg_nt << "\n"
            << "hash " << skm::hex64(skm::corpus_hash(corpus)) << "\n";
  if (!cache.empty()) {
    skm::save_corpus(corpus, cache);
    std::cout << "cache " << cache << "\n";
  }
  return 0;
}

int cmd_cluster(ClusterArgs& a) {
  const skm::RunConfig cfg = finish_config(a);
  const skm::Corpus corpus = load_input(a.input);
  skm::RunResult res = skm::run_clustering(corpus, cfg);
  if (!a.assignments_out.empty()) {
    std::ofstream out = open_out(a.assignments_out);
    skm::write_assignments(corpus, res.assign, out);
  }
  if (!a.metrics_out.empty()) {
    std::ofstream out = open_out(a.metrics_out);
    skm::write_iteration_csv(res, out);
  }
  if (!a.summary_out.empty()) {
    std::ofstream out = open_out(a.summary_out);
    skm::write_summary(res, out);
  }
  print_run_brief(res);
  return 0;
}

int cmd_estimate(ClusterArgs& a, const std::string& grid_out) {
  skm::RunConfig cfg = finish_config(a);
  if (!estimates_params(cfg.algorithm))
    throw skm::config_error("estimate needs an estimating algorithm (es-icp, es, thv, tht)");
  if (cfg.t_th && cfg.v_th)
    throw skm::config_error("estimate with both thresholds fixed has nothing to do");
  const skm::Corpus corpus = load_input(a.input);
  cfg.max_iters = 2;  // estimation happens in the first two updates
  skm::RunResult res = skm::run_clustering(corpus, cfg);
  if (!res.estimation)
    throw skm::invariant_error("estimating run produced no estimate");
  const skm::EstResult& est = *res.estimation;
  std::cout << "chosen t_th " << est.params.t_th << ", v_th " << est.params.v_th
            << ", modeled cost " << std::setprecision(12) << est.best_cost
            << "\n"
            << "sweep floor " << est.s_min << ", candidates "
            << est.v_candidates.size() << "\n";
  if (!grid_out.empty()) {
    std::ofstream out = open_out(grid_out);
    skm::write_grid_csv(est, out);
  }
  return 0;
}

int cmd_profile(ClusterArgs& a, const std::string& prefix) {
  const skm::RunConfig cfg = finish_config(a);
  const skm::Corpus corpus = load_input(a.input);
  skm::RunResult res = skm::run_clustering(corpus, cfg);

  std::vector<double> freqs(corpus.df.begin(), corpus.df.end());
  skm::ZipfFit fit = skm::rank_frequency_profile(freqs);
  {
    std::ofstream out = open_out(prefix + ".rank_freq.csv");
    out << "rank,df\n";
    for (std::size_t r = 0; r < fit.sorted.size(); ++r)
      out << r + 1 << "," << fit.sorted[r] << "\n";
  }
  {
    std::vector<uint32_t> mf(corpus.n_terms, 0);
    for (uint32_t j = 0; j < res.means.k; ++j) {
      const double* row = res.means.row(j);
      for (uint64_t s = 0; s < res.means.d; ++s)
        if (row[s] != 0.0) ++mf[s];
    }
    std::ofstream out = open_out(prefix + ".df_mf.csv");
    out << "df,mean_mf\n";
    for (const auto& [df, mean_mf] : skm::df_mf_scatter(corpus.df, mf))
      out << df << "," << mean_mf << "\n";
  }
  {
    skm::CpsProfile cps = skm::cps_profile(corpus, res.means, res.assign);
    std::ofstream out = open_out(prefix + ".cps.csv");
    out << "rank_fraction,mean,stddev\n";
    for (std::size_t b = 0; b < cps.mean.size(); ++b)
      out << std::setprecision(10) << (b + 1) * cps.bin_width << ","
          << cps.mean[b] << "," << cps.stddev[b] << "\n";
  }
  std::cout << "rank-frequency slope " << std::setprecision(6) << fit.alpha
            << (fit.degenerate ? " (degenerate fit)" : "") << "\n"
            << "wrote " << prefix << ".rank_freq.csv, " << prefix
            << ".df_mf.csv, " << prefix << ".cps.csv\n";
  return 0;
}

int cmd_compare(ClusterArgs& a, std::vector<std::string>& names) {
  if (names.empty())
    names = {"mivi", "divi", "icp", "es-icp", "ta-icp", "cs-icp", "es", "thv", "tht"};
  const skm::Corpus corpus = load_input(a.input);
  std::vector<skm::RunResult> runs;
  runs.reserve(names.size());
  for (const std::string& name : names) {
    ClusterArgs one = a;
    one.algorithm = name;
    runs.push_back(skm::run_clustering(corpus, finish_config(one)));
  }

  const skm::RunResult& base = runs.front();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const skm::RunResult& other = runs[r];
    if (other.history.size() != base.history.size())
      throw skm::invariant_error(
          to_string(other.config.algorithm) + " took " +
          std::to_string(other.history.size()) + " iterations, " +
          to_string(base.config.algorithm) + " took " +
          std::to_string(base.history.size()));
    for (std::size_t it = 0; it < base.history.size(); ++it)
      if (other.history[it] != base.history[it])
        throw skm::invariant_error(to_string(other.config.algorithm) +
                                   " diverged from " +
                                   to_string(base.config.algorithm) +
                                   " at iteration " + std::to_string(it + 1));
  }

  uint64_t base_mult = 0;
  for (const skm::IterationRecord& it : base.iters) base_mult += it.mult_total();
  std::cout << "identical assignment histories across " << runs.size()
            << " algorithms (" << base.history.size() << " iterations, history "
            << skm::hex64(skm::history_hash(base.history)) << ")\n";
  std::cout << std::left << std::setw(8) << "algo" << std::right << std::setw(8)
            << "iters" << std::setw(16) << "mult" << std::setw(10) << "ratio"
            << std::setw(12) << "sqrt" << std::setw(10) << "cpr"
            << std::setw(12) << "wall_ms" << "\n";
  for (const skm::RunResult& res : runs) {
    uint64_t mult = 0, sq = 0, cand = 0;
    double wall = 0.0;
    for (const skm::IterationRecord& it : res.iters) {
      mult += it.mult_total();
      sq += it.sqrt_ops;
      cand += it.candidates;
      wall += it.wall_ms;
    }
    const double ratio =
        base_mult ? static_cast<double>(mult) / static_cast<double>(base_mult) : 0.0;
    const double mean_cpr = skm::cpr(cand, corpus.n_docs * res.iters.size(),
                                     res.config.k);
    std::cout << std::left << std::setw(8) << to_string(res.config.algorithm)
              << std::right << std::setw(8) << res.iters.size() << std::setw(16)
              << mult << std::setw(10) << std::fixed << std::setprecision(4)
              << ratio << std::setw(12) << sq << std::setw(10)
              << std::setprecision(4) << mean_cpr << std::setw(12)
              << std::setprecision(1) << wall << "\n";
    std::cout.unsetf(std::ios::fixed);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spherical k-means with structured mean-index filtering"};
  app.require_subcommand(1);

  skm::SynthConfig scfg;
  std::string synth_out, synth_labels;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--docs", scfg.n_docs, "document count");
  synth->add_option("--vocab", scfg.vocab, "vocabulary size");
  synth->add_option("--topics", scfg.topics, "planted topic count");
  synth->add_option("--alpha", scfg.alpha, "term power-law exponent");
  synth->add_option("--boost", scfg.boost, "in-topic weight multiplier");
  synth->add_option("--avg-len", scfg.avg_len, "mean tokens per document");
  synth->add_option("--min-len", scfg.min_len, "minimum tokens per document");
  synth->add_option("--seed", scfg.seed, "random seed");
  synth->add_option("--out", synth_out, "output bag-of-words file")->required();
  synth->add_option("--labels-out", synth_labels, "planted topics file");

  std::string ingest_input, ingest_cache;
  CLI::App* ingest = app.add_subcommand("ingest", "parse a corpus and report stats");
  ingest->add_option("--input", ingest_input, "bag-of-words text file")->required();
  ingest->add_option("--cache", ingest_cache, "write a binary corpus cache");

  ClusterArgs cl;
  CLI::App* cluster = app.add_subcommand("cluster", "run one clustering algorithm");
  add_common_cluster_options(cluster, cl);
  cluster->add_option("--algorithm", cl.algorithm,
                      "mivi divi icp es-icp ta-icp cs-icp es thv tht");
  cluster->add_option("--assignments-out", cl.assignments_out, "docID clusterID lines");
  cluster->add_option("--metrics-out", cl.metrics_out, "per-iteration CSV");
  cluster->add_option("--summary-out", cl.summary_out, "deterministic JSON summary");

  ClusterArgs es;
  std::string grid_out;
  CLI::App* estimate = app.add_subcommand("estimate", "report the parameter sweep");
  add_common_cluster_options(estimate, es);
  estimate->add_option("--algorithm", es.algorithm, "es-icp es thv tht");
  estimate->add_option("--grid-out", grid_out, "sweep CSV (v_th, t_th, cost)");

  ClusterArgs pr;
  std::string profile_prefix;
  CLI::App* profile = app.add_subcommand("profile", "corpus and clustering curves");
  add_common_cluster_options(profile, pr);
  profile->add_option("--algorithm", pr.algorithm, "algorithm behind the curves");
  profile->add_option("--out-prefix", profile_prefix, "CSV path prefix")->required();

  ClusterArgs cp;
  std::vector<std::string> compare_names;
  CLI::App* compare =
      app.add_subcommand("compare", "run algorithms and require identical results");
  add_common_cluster_options(compare, cp);
  compare->add_option("--algorithms", compare_names, "algorithms to compare")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(scfg, synth_out, synth_labels);
    if (ingest->parsed()) return cmd_ingest(ingest_input, ingest_cache);
    if (cluster->parsed()) return cmd_cluster(cl);
    if (estimate->parsed()) return cmd_estimate(es, grid_out);
    if (profile->parsed()) return cmd_profile(pr, profile_prefix);
    if (compare->parsed()) return cmd_compare(cp, compare_names);
  } catch (const skm::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const skm::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const skm::invariant_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
