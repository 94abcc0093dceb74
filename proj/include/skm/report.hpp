// Artifact writers shared by the command line tool and the tests.
//
// Assignment files and run summaries contain only deterministic quantities,
// so the same corpus, configuration, and seed produce byte-identical files
// regardless of the worker count. Wall-clock time appears only in the
// iteration CSV, which is explicitly not byte-stable.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "skm/cluster.hpp"

namespace skm {

// One "docID clusterID" line per document, both 1-based, ascending docID.
void write_assignments(const Corpus& corpus, const std::vector<uint32_t>& assign,
                       std::ostream& out);

// Per-iteration counters, one CSV row per pass. Includes wall_ms.
void write_iteration_csv(const RunResult& res, std::ostream& out);

// Deterministic JSON summary (no wall clock, no worker count).
void write_summary(const RunResult& res, std::ostream& out);

// Estimator sweep: one row per (value candidate, term threshold) pair.
void write_grid_csv(const EstResult& est, std::ostream& out);

// Chained content hash over the full assignment history.
uint64_t history_hash(const std::vector<std::vector<uint32_t>>& history);

std::string hex64(uint64_t v);

}  // namespace skm
