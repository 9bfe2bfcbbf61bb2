#include "advneg/negatives.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "advneg/errors.hpp"
#include "advneg/rng.hpp"

namespace advneg {

using json = nlohmann::json;

std::vector<std::string> sample_random(const std::vector<std::string>& pool,
                                       const std::unordered_set<std::string>& exclude,
                                       std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  eligible.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!exclude.count(pool[i])) eligible.push_back(i);
  }
  if (eligible.size() < n) {
    throw Error("sample_random: need " + std::to_string(n) + " responses, pool has " +
                std::to_string(eligible.size()) + " eligible");
  }
  SeededRng rng(seed);
  auto picks = rng.sample_indices(eligible.size(), n);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t p : picks) out.push_back(pool[eligible[p]]);
  return out;
}

Bm25Index Bm25Index::build(const std::vector<std::string>& pool, double k1, double b) {
  Bm25Index index(k1, b);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    index.add_document(i, tokenize(pool[i]));
  }
  return index;
}

void Bm25Index::add_document(std::size_t doc_id, const std::vector<std::string>& tokens) {
  if (docs_.count(doc_id)) {
    throw Error("bm25: duplicate doc id " + std::to_string(doc_id));
  }
  std::unordered_map<std::string, int> counts;
  for (const auto& t : tokens) counts[t] += 1;
  for (const auto& [term, tf] : counts) postings_[term][doc_id] = tf;
  doc_len_[doc_id] = tokens.size();
  total_len_ += tokens.size();
  docs_[doc_id] = std::move(counts);
}

void Bm25Index::remove_document(std::size_t doc_id) {
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) {
    throw Error("bm25: unknown doc id " + std::to_string(doc_id));
  }
  for (const auto& [term, tf] : it->second) {
    (void)tf;
    auto p = postings_.find(term);
    p->second.erase(doc_id);
    if (p->second.empty()) postings_.erase(p);
  }
  total_len_ -= doc_len_.at(doc_id);
  doc_len_.erase(doc_id);
  docs_.erase(it);
}

double Bm25Index::avg_doc_len() const {
  if (doc_len_.empty()) return 0.0;
  return static_cast<double>(total_len_) / static_cast<double>(doc_len_.size());
}

double Bm25Index::idf(const std::string& term) const {
  double n = static_cast<double>(doc_len_.size());
  double df = 0.0;
  auto it = postings_.find(term);
  if (it != postings_.end()) df = static_cast<double>(it->second.size());
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double Bm25Index::score(const std::vector<std::string>& query_tokens,
                        std::size_t doc_id) const {
  auto doc = docs_.find(doc_id);
  if (doc == docs_.end()) {
    throw Error("bm25: unknown doc id " + std::to_string(doc_id));
  }
  double len = static_cast<double>(doc_len_.at(doc_id));
  double avg = avg_doc_len();
  double out = 0.0;
  for (const auto& q : query_tokens) {
    auto tf_it = doc->second.find(q);
    if (tf_it == doc->second.end()) continue;  // tf = 0 contributes nothing
    double tf = static_cast<double>(tf_it->second);
    out += idf(q) * (tf * (k1_ + 1.0)) / (tf + k1_ * (1.0 - b_ + b_ * len / avg));
  }
  return out;
}

std::vector<std::size_t> Bm25Index::top_n(
    const std::vector<std::string>& query_tokens, std::size_t n,
    const std::unordered_set<std::size_t>& exclude) const {
  // Accumulate contributions term-by-term over the postings lists, then rank
  // every eligible doc (zero-score docs included, id order breaking ties).
  std::unordered_map<std::string, int> query_tf;
  for (const auto& q : query_tokens) query_tf[q] += 1;

  std::map<std::size_t, double> acc;
  double avg = avg_doc_len();
  for (const auto& [term, qtf] : query_tf) {
    auto p = postings_.find(term);
    if (p == postings_.end()) continue;
    double w = idf(term);
    for (const auto& [doc_id, tf] : p->second) {
      if (exclude.count(doc_id)) continue;
      double len = static_cast<double>(doc_len_.at(doc_id));
      acc[doc_id] += qtf * w * (tf * (k1_ + 1.0)) /
                     (tf + k1_ * (1.0 - b_ + b_ * len / avg));
    }
  }

  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(doc_len_.size());
  for (const auto& [doc_id, len] : doc_len_) {
    (void)len;
    if (exclude.count(doc_id)) continue;
    auto it = acc.find(doc_id);
    ranked.emplace_back(it == acc.end() ? 0.0 : it->second, doc_id);
  }
  if (ranked.size() < n) {
    throw Error("bm25: need " + std::to_string(n) + " docs, only " +
                std::to_string(ranked.size()) + " scorable");
  }
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<long>(n), ranked.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ranked[i].second);
  return out;
}

bool Bm25Index::operator==(const Bm25Index& other) const {
  return k1_ == other.k1_ && b_ == other.b_ && total_len_ == other.total_len_ &&
         doc_len_ == other.doc_len_ && postings_ == other.postings_ &&
         docs_ == other.docs_;
}

std::vector<std::string> retrieve_bm25(const DialogueRecord& record,
                                       const Bm25Index& index,
                                       const std::vector<std::string>& pool,
                                       std::size_t n,
                                       const std::unordered_set<std::string>& exclude) {
  std::unordered_set<std::size_t> excluded_ids;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (exclude.count(pool[i])) excluded_ids.insert(i);
  }
  auto query = tokenize(record.context_text());
  auto ids = index.top_n(query, n, excluded_ids);
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (std::size_t id : ids) out.push_back(pool.at(id));
  return out;
}

EmbeddingProvider EmbeddingProvider::tfidf(const std::vector<std::string>& pool) {
  EmbeddingProvider p;
  p.mode_ = Mode::tfidf_native;
  p.stats_ = build_text_stats(pool);
  p.dim_ = static_cast<Eigen::Index>(p.stats_.term_id.size());
  return p;
}

EmbeddingProvider EmbeddingProvider::external(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file: " + path.string());
  json j = json::parse(in);
  EmbeddingProvider p;
  p.mode_ = Mode::external_vectors;
  p.dim_ = j.at("dim").get<Eigen::Index>();
  for (const auto& [text, arr] : j.at("vectors").items()) {
    if (static_cast<Eigen::Index>(arr.size()) != p.dim_) {
      throw Error("embedding for \"" + text + "\" has wrong dimension");
    }
    SparseVec v(p.dim_);
    for (Eigen::Index i = 0; i < p.dim_; ++i) {
      double x = arr[static_cast<std::size_t>(i)].get<double>();
      if (x != 0.0) v.insert(i) = x;
    }
    p.table_.emplace(text, std::move(v));
  }
  return p;
}

SparseVec EmbeddingProvider::embed(const std::string& text) const {
  if (mode_ == Mode::tfidf_native) {
    return tfidf_embed(tokenize(text), stats_);
  }
  auto it = table_.find(text);
  if (it == table_.end()) {
    throw Error("no external embedding for: " + text);
  }
  return it->second;
}

double EmbeddingProvider::similarity(const std::string& a, const std::string& b) const {
  return cosine(embed(a), embed(b));
}

std::vector<std::string> retrieve_semihard(const std::string& positive,
                                           const std::vector<std::string>& pool,
                                           const EmbeddingProvider& provider,
                                           const SemiHardConfig& cfg,
                                           const std::unordered_set<std::string>& exclude) {
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0) {
    throw Error("semihard: alpha must be in (0,1)");
  }
  const SparseVec pos = provider.embed(positive);
  const double cap = 1.0 - cfg.alpha;
  std::vector<std::pair<double, std::size_t>> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (exclude.count(pool[i])) continue;
    double c = cosine(provider.embed(pool[i]), pos);
    if (c <= cap) eligible.emplace_back(c, i);
  }
  if (eligible.size() < cfg.n) {
    throw Error("semihard: need " + std::to_string(cfg.n) + " eligible responses, found " +
                std::to_string(eligible.size()));
  }
  std::partial_sort(eligible.begin(), eligible.begin() + static_cast<long>(cfg.n),
                    eligible.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<std::string> out;
  out.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) out.push_back(pool[eligible[i].second]);
  return out;
}

}  // namespace advneg
