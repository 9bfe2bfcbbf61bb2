#pragma once

#include <Eigen/SparseCore>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace advneg {

using SparseVec = Eigen::SparseVector<double>;

// Shared normalization for retrieval and ranker features: lowercase ASCII,
// punctuation stripped, whitespace split. Bytes >= 0x80 are kept verbatim.
std::vector<std::string> tokenize(std::string_view text);

std::set<std::string> token_set(const std::vector<std::string>& tokens);
std::set<std::string> bigram_set(const std::vector<std::string>& tokens);

bool is_stopword(const std::string& token);

// Non-stopword tokens of length >= 2; the "keywords" of a context.
std::vector<std::string> content_tokens(const std::vector<std::string>& tokens);

// Document-frequency statistics over a response pool. Backs both the native
// TF-IDF embedding and the ranker's BM25-style feature. Terms outside the
// vocabulary carry zero TF-IDF mass.
struct TextStats {
  std::size_t doc_count = 0;
  std::size_t total_len = 0;
  std::unordered_map<std::string, std::size_t> df;
  std::unordered_map<std::string, int> term_id;  // first-seen order

  double avg_doc_len() const {
    return doc_count == 0 ? 0.0 : static_cast<double>(total_len) / static_cast<double>(doc_count);
  }
  // Smoothed TF-IDF weight: ln((1+N)/(1+df)) + 1, strictly positive in-vocab.
  double idf_tfidf(const std::string& term) const;
  // ln((N - df + 0.5)/(df + 0.5) + 1); non-negative.
  double idf_bm25(const std::string& term) const;
};

TextStats build_text_stats(const std::vector<std::string>& docs);

SparseVec tfidf_embed(const std::vector<std::string>& tokens, const TextStats& stats);

// Cosine over sparse vectors; zero vector on either side yields 0.
double cosine(const SparseVec& a, const SparseVec& b);

// Okapi scoring of an arbitrary (query, document) token pair against pool
// statistics, for documents that are not themselves indexed.
double bm25_pair_score(const std::vector<std::string>& query_tokens,
                       const std::vector<std::string>& doc_tokens,
                       const TextStats& stats, double k1 = 1.2, double b = 0.75);

}  // namespace advneg
