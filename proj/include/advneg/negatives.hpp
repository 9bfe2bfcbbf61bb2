#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "advneg/corpus.hpp"
#include "advneg/text.hpp"

namespace advneg {

// n distinct responses, uniform without replacement, none in `exclude`.
std::vector<std::string> sample_random(const std::vector<std::string>& pool,
                                       const std::unordered_set<std::string>& exclude,
                                       std::size_t n, std::uint64_t seed);

/// Okapi BM25 over the response pool. Incrementally updatable: adding then
/// removing a document restores the prior statistics exactly, and an
/// incrementally built index equals a full rebuild.
class Bm25Index {
 public:
  explicit Bm25Index(double k1 = 1.2, double b = 0.75) : k1_(k1), b_(b) {}

  static Bm25Index build(const std::vector<std::string>& pool, double k1 = 1.2,
                         double b = 0.75);

  void add_document(std::size_t doc_id, const std::vector<std::string>& tokens);
  void remove_document(std::size_t doc_id);

  // Sum over query tokens of IDF(t) * tf*(k1+1) / (tf + k1*(1-b+b*len/avglen))
  // with IDF(t) = ln((N-df+0.5)/(df+0.5)+1). Unknown doc_id is an error.
  double score(const std::vector<std::string>& query_tokens, std::size_t doc_id) const;

  // Top-n doc ids by (score desc, id asc) over all docs not in `exclude`.
  std::vector<std::size_t> top_n(const std::vector<std::string>& query_tokens,
                                 std::size_t n,
                                 const std::unordered_set<std::size_t>& exclude) const;

  std::size_t size() const { return doc_len_.size(); }
  double k1() const { return k1_; }
  double b() const { return b_; }
  double avg_doc_len() const;

  bool operator==(const Bm25Index& other) const;

 private:
  double idf(const std::string& term) const;

  double k1_;
  double b_;
  std::size_t total_len_ = 0;
  std::map<std::size_t, std::size_t> doc_len_;
  // term -> (doc id -> term frequency); doc-id order kept sorted for
  // deterministic traversal.
  std::unordered_map<std::string, std::map<std::size_t, int>> postings_;
  std::map<std::size_t, std::unordered_map<std::string, int>> docs_;
};

// Top-n pool responses for the record's concatenated context, excluding the
// record's own positives; ties break by ascending pool index.
std::vector<std::string> retrieve_bm25(const DialogueRecord& record,
                                       const Bm25Index& index,
                                       const std::vector<std::string>& pool,
                                       std::size_t n,
                                       const std::unordered_set<std::string>& exclude);

/// Pluggable sentence embedding: native TF-IDF built from the pool, or
/// precomputed vectors imported from a JSON file.
class EmbeddingProvider {
 public:
  enum class Mode { tfidf_native, external_vectors };

  static EmbeddingProvider tfidf(const std::vector<std::string>& pool);
  // File schema: {"dim": D, "vectors": {"<text>": [..D floats..], ...}}
  static EmbeddingProvider external(const std::filesystem::path& path);

  SparseVec embed(const std::string& text) const;
  double similarity(const std::string& a, const std::string& b) const;

  Mode mode() const { return mode_; }
  Eigen::Index dimension() const { return dim_; }
  const TextStats& stats() const { return stats_; }

 private:
  EmbeddingProvider() = default;
  Mode mode_ = Mode::tfidf_native;
  Eigen::Index dim_ = 0;
  TextStats stats_;
  std::unordered_map<std::string, SparseVec> table_;
};

struct SemiHardConfig {
  double alpha = 0.07;
  std::size_t n = 5;
};

// Candidates ranked by cosine to the positive, eligible iff
// cosine <= 1 - alpha; an exact duplicate of the positive is never eligible.
std::vector<std::string> retrieve_semihard(const std::string& positive,
                                           const std::vector<std::string>& pool,
                                           const EmbeddingProvider& provider,
                                           const SemiHardConfig& cfg,
                                           const std::unordered_set<std::string>& exclude);

}  // namespace advneg
