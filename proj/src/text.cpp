#include "advneg/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

namespace advneg {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

std::set<std::string> token_set(const std::vector<std::string>& tokens) {
  return std::set<std::string>(tokens.begin(), tokens.end());
}

std::set<std::string> bigram_set(const std::vector<std::string>& tokens) {
  std::set<std::string> out;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    out.insert(tokens[i] + " " + tokens[i + 1]);
  }
  return out;
}

bool is_stopword(const std::string& token) {
  static const std::unordered_set<std::string> kStop = {
      "a",    "an",    "and",  "are",  "as",    "at",    "be",   "been",
      "but",  "by",    "can",  "could", "did",  "do",    "does", "for",
      "from", "had",   "has",  "have", "he",    "her",   "him",  "his",
      "how",  "i",     "if",   "in",   "is",    "it",    "its",  "just",
      "me",   "my",    "no",   "not",  "of",    "on",    "or",   "our",
      "she",  "so",    "that", "the",  "their", "them",  "then", "there",
      "they", "this",  "to",   "too",  "up",    "was",   "we",   "were",
      "what", "when",  "who",  "why",  "will",  "with",  "would", "you",
      "your", "am",    "about", "im",  "dont",  "very",  "really"};
  return kStop.count(token) > 0;
}

std::vector<std::string> content_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (t.size() >= 2 && !is_stopword(t)) out.push_back(t);
  }
  return out;
}

double TextStats::idf_tfidf(const std::string& term) const {
  auto it = df.find(term);
  if (it == df.end()) return 0.0;
  return std::log((1.0 + static_cast<double>(doc_count)) /
                  (1.0 + static_cast<double>(it->second))) +
         1.0;
}

double TextStats::idf_bm25(const std::string& term) const {
  double n = static_cast<double>(doc_count);
  double d = 0.0;
  auto it = df.find(term);
  if (it != df.end()) d = static_cast<double>(it->second);
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

TextStats build_text_stats(const std::vector<std::string>& docs) {
  TextStats stats;
  for (const auto& doc : docs) {
    auto tokens = tokenize(doc);
    stats.doc_count += 1;
    stats.total_len += tokens.size();
    std::set<std::string> uniq(tokens.begin(), tokens.end());
    for (const auto& t : uniq) {
      stats.df[t] += 1;
      if (!stats.term_id.count(t)) {
        int id = static_cast<int>(stats.term_id.size());
        stats.term_id[t] = id;
      }
    }
  }
  return stats;
}

SparseVec tfidf_embed(const std::vector<std::string>& tokens, const TextStats& stats) {
  std::unordered_map<std::string, double> tf;
  for (const auto& t : tokens) {
    if (stats.term_id.count(t)) tf[t] += 1.0;  // out-of-vocabulary: zero mass
  }
  std::vector<std::pair<int, double>> entries;
  entries.reserve(tf.size());
  for (const auto& [term, count] : tf) {
    entries.emplace_back(stats.term_id.at(term), count * stats.idf_tfidf(term));
  }
  std::sort(entries.begin(), entries.end());
  SparseVec v(static_cast<Eigen::Index>(stats.term_id.size()));
  v.reserve(static_cast<Eigen::Index>(entries.size()));
  for (const auto& [id, w] : entries) v.insert(id) = w;
  return v;
}

double cosine(const SparseVec& a, const SparseVec& b) {
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

double bm25_pair_score(const std::vector<std::string>& query_tokens,
                       const std::vector<std::string>& doc_tokens,
                       const TextStats& stats, double k1, double b) {
  std::unordered_map<std::string, double> tf;
  for (const auto& t : doc_tokens) tf[t] += 1.0;
  double len = static_cast<double>(doc_tokens.size());
  double avg = stats.avg_doc_len();
  if (avg == 0.0) return 0.0;
  double score = 0.0;
  for (const auto& q : query_tokens) {
    auto it = tf.find(q);
    if (it == tf.end()) continue;
    double f = it->second;
    score += stats.idf_bm25(q) * (f * (k1 + 1.0)) /
             (f + k1 * (1.0 - b + b * len / avg));
  }
  return score;
}

}  // namespace advneg
