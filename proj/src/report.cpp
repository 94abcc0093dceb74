#include "skm/report.hpp"

#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace skm {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_assignments(const Corpus& corpus, const std::vector<uint32_t>& assign,
                       std::ostream& out) {
  for (std::size_t i = 0; i < assign.size(); ++i)
    out << corpus.doc_ids[i] << " " << assign[i] + 1 << "\n";
}

void write_iteration_csv(const RunResult& res, std::ostream& out) {
  out << "iteration,changes,n_moving,candidates,cpr,mult_region1,mult_region2,"
         "mult_region3,mult_bound,mult_total,sqrt_ops,objective,wall_ms\n";
  for (const IterationRecord& it : res.iters) {
    out << it.iteration << "," << it.changes << "," << it.n_moving << ","
        << it.candidates << "," << fmt_double(it.cpr) << "," << it.mult_region1
        << "," << it.mult_region2 << "," << it.mult_region3 << ","
        << it.mult_bound << "," << it.mult_total() << "," << it.sqrt_ops << ","
        << fmt_double(it.objective) << "," << fmt_double(it.wall_ms) << "\n";
  }
}

void write_summary(const RunResult& res, std::ostream& out) {
  nlohmann::ordered_json j;
  j["input_hash"] = hex64(res.input_hash);
  j["algorithm"] = to_string(res.config.algorithm);
  j["k"] = res.config.k;
  j["seed"] = res.config.seed;
  j["max_iters"] = res.config.max_iters;
  j["params"] = {{"t_th", res.params.t_th},
                 {"v_th", res.params.v_th},
                 {"estimated", res.estimation.has_value()}};
  j["converged"] = res.converged;
  j["iterations"] = res.iters.size();
  j["history_hash"] = hex64(history_hash(res.history));
  uint64_t r1 = 0, r2 = 0, r3 = 0, bound = 0, sq = 0, cand = 0;
  for (const IterationRecord& it : res.iters) {
    r1 += it.mult_region1;
    r2 += it.mult_region2;
    r3 += it.mult_region3;
    bound += it.mult_bound;
    sq += it.sqrt_ops;
    cand += it.candidates;
  }
  j["totals"] = {{"mult", r1 + r2 + r3 + bound},
                 {"mult_region1", r1},
                 {"mult_region2", r2},
                 {"mult_region3", r3},
                 {"mult_bound", bound},
                 {"sqrt_ops", sq},
                 {"candidates", cand}};
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const IterationRecord& it : res.iters) {
    arr.push_back({{"iteration", it.iteration},
                   {"changes", it.changes},
                   {"n_moving", it.n_moving},
                   {"candidates", it.candidates},
                   {"cpr", it.cpr},
                   {"mult_region1", it.mult_region1},
                   {"mult_region2", it.mult_region2},
                   {"mult_region3", it.mult_region3},
                   {"mult_bound", it.mult_bound},
                   {"sqrt_ops", it.sqrt_ops},
                   {"objective", it.objective}});
  }
  j["per_iteration"] = std::move(arr);
  out << j.dump(2) << "\n";
}

void write_grid_csv(const EstResult& est, std::ostream& out) {
  out << "v_th,t_th,cost\n";
  for (std::size_t h = 0; h < est.v_candidates.size(); ++h) {
    const std::vector<double>& row = est.grid_costs[h];
    for (std::size_t c = 0; c < row.size(); ++c)
      out << fmt_double(est.v_candidates[h]) << ","
          << est.s_min + static_cast<uint32_t>(c) << "," << fmt_double(row[c])
          << "\n";
  }
}

uint64_t history_hash(const std::vector<std::vector<uint32_t>>& history) {
  uint64_t h = fnv1a64("", 0);
  for (const std::vector<uint32_t>& a : history) {
    const uint64_t n = a.size();
    h = fnv1a64(&n, sizeof n, h);
    h = fnv1a64(a.data(), a.size() * sizeof(uint32_t), h);
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace skm
