#include "skm/corpus.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "skm/error.hpp"

namespace skm {

static_assert(std::endian::native == std::endian::little,
              "binary cache assumes a little-endian host");

uint64_t fnv1a64(const void* data, std::size_t len, uint64_t h) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

[[noreturn]] void fail_line(uint64_t line_no, const std::string& what) {
  throw parse_error("line " + std::to_string(line_no) + ": " + what);
}

// Splits on blanks and parses exactly `want` unsigned fields.
bool parse_fields(const std::string& line, uint64_t* out, int want) {
  const char* p = line.data();
  const char* end = p + line.size();
  for (int f = 0; f < want; ++f) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) return false;
    auto [next, ec] = std::from_chars(p, end, out[f]);
    if (ec != std::errc() || next == p) return false;
    p = next;
  }
  while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
  return p == end;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

RawCorpus ingest_bag_of_words(std::istream& in) {
  RawCorpus raw;
  std::string line;
  uint64_t line_no = 0;
  uint64_t header[3];
  for (int h = 0; h < 3; ++h) {
    if (!std::getline(in, line)) fail_line(line_no + 1, "missing header line");
    ++line_no;
    if (!parse_fields(line, &header[h], 1))
      fail_line(line_no, "header must be a single unsigned integer");
  }
  raw.n_docs = header[0];
  raw.n_terms = header[1];
  uint64_t nnz = header[2];
  if (raw.n_docs == 0) fail_line(1, "document count must be positive");
  if (raw.n_terms == 0) fail_line(2, "vocabulary size must be positive");

  raw.docs.resize(raw.n_docs);
  raw.df.assign(raw.n_terms, 0);
  raw.tf.assign(raw.n_terms, 0);
  // Line number per entry is kept so duplicate reports can cite both offenders.
  std::vector<std::vector<uint64_t>> lines(raw.n_docs);

  uint64_t seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    uint64_t f[3];
    if (!parse_fields(line, f, 3))
      fail_line(line_no, "expected \"docID termID count\"");
    if (seen == nnz) fail_line(line_no, "more entries than the declared count");
    if (f[0] < 1 || f[0] > raw.n_docs)
      fail_line(line_no, "document id " + std::to_string(f[0]) + " out of range");
    if (f[1] < 1 || f[1] > raw.n_terms)
      fail_line(line_no, "term id " + std::to_string(f[1]) + " out of range");
    if (f[2] == 0) fail_line(line_no, "count must be positive");
    auto& doc = raw.docs[f[0] - 1];
    doc.items.emplace_back(static_cast<uint32_t>(f[1]), static_cast<uint32_t>(f[2]));
    lines[f[0] - 1].push_back(line_no);
    raw.df[f[1] - 1] += 1;
    raw.tf[f[1] - 1] += f[2];
    ++seen;
  }
  if (seen != nnz)
    throw parse_error("expected " + std::to_string(nnz) + " entries, found " +
                      std::to_string(seen));

  for (uint64_t d = 0; d < raw.n_docs; ++d) {
    auto& items = raw.docs[d].items;
    if (items.empty())
      throw parse_error("document " + std::to_string(d + 1) + " has no terms");
    // Sort by term id, carrying the source line along for duplicate reports.
    std::vector<uint32_t> order(items.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
      return items[a].first < items[b].first;
    });
    std::vector<std::pair<uint32_t, uint32_t>> sorted(items.size());
    for (std::size_t q = 0; q < order.size(); ++q) sorted[q] = items[order[q]];
    for (std::size_t q = 1; q < sorted.size(); ++q) {
      if (sorted[q].first == sorted[q - 1].first) {
        uint64_t l1 = lines[d][order[q - 1]];
        uint64_t l2 = lines[d][order[q]];
        fail_line(std::max(l1, l2), "duplicate (doc " + std::to_string(d + 1) +
                                        ", term " + std::to_string(sorted[q].first) +
                                        ") pair, first seen on line " +
                                        std::to_string(std::min(l1, l2)));
      }
    }
    items = std::move(sorted);
  }
  return raw;
}

Corpus build_features(const RawCorpus& raw, std::ostream* warnings) {
  const uint64_t n = raw.n_docs;
  // Canonical term space: terms that occur somewhere and have nonzero idf,
  // ordered by ascending df with ties by ascending original id.
  std::vector<uint32_t> keep;
  keep.reserve(raw.n_terms);
  for (uint64_t t = 0; t < raw.n_terms; ++t)
    if (raw.df[t] > 0 && raw.df[t] < n) keep.push_back(static_cast<uint32_t>(t));
  std::sort(keep.begin(), keep.end(), [&](uint32_t a, uint32_t b) {
    if (raw.df[a] != raw.df[b]) return raw.df[a] < raw.df[b];
    return a < b;
  });
  std::vector<uint32_t> canon_of(raw.n_terms, UINT32_MAX);
  for (std::size_t c = 0; c < keep.size(); ++c) canon_of[keep[c]] = static_cast<uint32_t>(c);

  std::vector<double> idf(raw.n_terms, 0.0);
  const double logn = std::log(static_cast<double>(n));
  for (uint32_t t : keep)
    idf[t] = logn - std::log(static_cast<double>(raw.df[t]));

  Corpus c;
  c.n_terms = keep.size();
  c.orig_term.resize(keep.size());
  for (std::size_t q = 0; q < keep.size(); ++q) c.orig_term[q] = keep[q] + 1;

  c.offsets.push_back(0);
  std::vector<std::pair<uint32_t, double>> row;
  for (uint64_t d = 0; d < n; ++d) {
    row.clear();
    for (auto [orig, cnt] : raw.docs[d].items) {
      uint32_t t = canon_of[orig - 1];
      if (t == UINT32_MAX) continue;  // idf-0 or absent term
      row.emplace_back(t, static_cast<double>(cnt) * idf[orig - 1]);
    }
    if (row.empty()) {
      c.removed_docs += 1;
      if (warnings)
        *warnings << "warning: document " << (d + 1)
                  << " lost every term to zero idf and was removed\n";
      continue;
    }
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double sq = 0.0;
    for (auto& [t, v] : row) sq += v * v;
    double norm = std::sqrt(sq);
    for (auto& [t, v] : row) {
      c.terms.push_back(t);
      c.vals.push_back(v / norm);
    }
    c.offsets.push_back(c.terms.size());
    c.doc_ids.push_back(static_cast<uint32_t>(d + 1));
  }
  c.n_docs = c.doc_ids.size();
  if (c.n_docs == 0)
    throw parse_error("every document vanished during feature construction");

  // df over kept documents. Removed documents held only dropped terms, so this
  // must agree with the raw counts; the check guards the canonical ordering.
  c.df.assign(c.n_terms, 0);
  for (uint32_t t : c.terms) c.df[t] += 1;
  for (std::size_t q = 0; q < keep.size(); ++q) {
    if (c.df[q] != raw.df[keep[q]])
      throw invariant_error("df recount diverged from raw df for canonical term " +
                            std::to_string(q));
  }
  c.avg_nt = static_cast<double>(c.nnz()) / static_cast<double>(c.n_docs);
  return c;
}

uint64_t corpus_hash(const Corpus& c) {
  uint64_t h = fnv1a64(&c.n_docs, sizeof c.n_docs);
  h = fnv1a64(&c.n_terms, sizeof c.n_terms, h);
  h = fnv1a64(c.offsets.data(), c.offsets.size() * sizeof(uint64_t), h);
  h = fnv1a64(c.terms.data(), c.terms.size() * sizeof(uint32_t), h);
  h = fnv1a64(c.vals.data(), c.vals.size() * sizeof(double), h);
  h = fnv1a64(c.df.data(), c.df.size() * sizeof(uint64_t), h);
  h = fnv1a64(c.orig_term.data(), c.orig_term.size() * sizeof(uint32_t), h);
  h = fnv1a64(c.doc_ids.data(), c.doc_ids.size() * sizeof(uint32_t), h);
  return h;
}

namespace {

constexpr char kMagic[8] = {'S', 'K', 'M', 'C', 'O', 'R', 'P', '\0'};
constexpr uint32_t kVersion = 1;

template <class T>
void write_vec(std::ofstream& out, const std::vector<T>& v) {
  uint64_t n = v.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(T)));
}

template <class T>
std::vector<T> read_vec(std::ifstream& in, const char* field) {
  uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  std::vector<T> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw parse_error(std::string("corpus cache truncated while reading ") + field);
  return v;
}

}  // namespace

void save_corpus(const Corpus& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw parse_error("cannot open cache file for writing: " + path);
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  uint64_t hash = corpus_hash(c);
  out.write(reinterpret_cast<const char*>(&hash), sizeof hash);
  out.write(reinterpret_cast<const char*>(&c.n_docs), sizeof c.n_docs);
  out.write(reinterpret_cast<const char*>(&c.n_terms), sizeof c.n_terms);
  out.write(reinterpret_cast<const char*>(&c.avg_nt), sizeof c.avg_nt);
  out.write(reinterpret_cast<const char*>(&c.removed_docs), sizeof c.removed_docs);
  write_vec(out, c.df);
  write_vec(out, c.offsets);
  write_vec(out, c.terms);
  write_vec(out, c.vals);
  write_vec(out, c.orig_term);
  write_vec(out, c.doc_ids);
  if (!out) throw parse_error("failed writing cache file: " + path);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open cache file: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw parse_error("not a corpus cache file: " + path);
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != kVersion)
    throw parse_error("unsupported corpus cache version " + std::to_string(version));
  uint64_t stored_hash = 0;
  in.read(reinterpret_cast<char*>(&stored_hash), sizeof stored_hash);
  Corpus c;
  in.read(reinterpret_cast<char*>(&c.n_docs), sizeof c.n_docs);
  in.read(reinterpret_cast<char*>(&c.n_terms), sizeof c.n_terms);
  in.read(reinterpret_cast<char*>(&c.avg_nt), sizeof c.avg_nt);
  in.read(reinterpret_cast<char*>(&c.removed_docs), sizeof c.removed_docs);
  if (!in) throw parse_error("corpus cache truncated: " + path);
  c.df = read_vec<uint64_t>(in, "df");
  c.offsets = read_vec<uint64_t>(in, "offsets");
  c.terms = read_vec<uint32_t>(in, "terms");
  c.vals = read_vec<double>(in, "values");
  c.orig_term = read_vec<uint32_t>(in, "term map");
  c.doc_ids = read_vec<uint32_t>(in, "doc ids");
  if (corpus_hash(c) != stored_hash)
    throw parse_error("corpus cache is corrupt (content hash mismatch): " + path);
  return c;
}

}  // namespace skm
