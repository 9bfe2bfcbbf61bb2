#include "advneg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "advneg/errors.hpp"

namespace advneg {

double recall_at_1(const std::vector<RankingOutcome>& outcomes) {
  if (outcomes.empty()) throw Error("recall_at_1: no outcomes");
  std::size_t hits = 0;
  for (const auto& o : outcomes) hits += o.rank == 1;
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

double mean_reciprocal_rank(const std::vector<RankingOutcome>& outcomes) {
  if (outcomes.empty()) throw Error("mean_reciprocal_rank: no outcomes");
  double s = 0.0;
  for (const auto& o : outcomes) s += 1.0 / static_cast<double>(o.rank);
  return s / static_cast<double>(outcomes.size());
}

EvalResult evaluate(const RankerModel& model,
                    const std::vector<CandidateInstance>& instances,
                    const Corpus& corpus, const TextStats& stats) {
  auto featurized = featurize_instances(instances, corpus, stats);
  EvalResult result;
  result.outcomes.reserve(instances.size());
  for (std::size_t i = 0; i < featurized.size(); ++i) {
    Eigen::VectorXd s = featurized[i].features * model.weights;
    RankingOutcome o;
    o.context_id = featurized[i].context_id;
    o.scores.assign(s.data(), s.data() + s.size());
    double pos = s(featurized[i].positive_index);
    int rank = 1;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (j == featurized[i].positive_index) continue;
      if (s(j) >= pos) ++rank;  // ties count against the positive
    }
    o.rank = rank;
    result.outcomes.push_back(std::move(o));
  }
  result.r_at_1 = recall_at_1(result.outcomes);
  result.mrr = mean_reciprocal_rank(result.outcomes);
  return result;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted[0];
  double h = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

SummaryStats summarize(const std::vector<double>& values) {
  SummaryStats s;
  s.n = values.size();
  if (values.empty()) return s;
  double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  s.mean = mean;
  s.stddev = std::sqrt(var);
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  return s;
}

QualityStats quality_report(const RankerModel& model, const EmbeddingProvider& provider,
                            const std::vector<TypedResponses>& responses,
                            const Corpus& corpus, const TextStats& stats) {
  QualityStats out;
  std::unordered_map<std::string, const DialogueRecord*> by_id;
  for (const auto& r : corpus.records) by_id[r.id] = &r;

  struct Entry {
    std::size_t type_index;
    double raw_score;
    double similarity;
  };
  std::vector<Entry> entries;
  std::vector<std::string> type_names;
  for (const auto& typed : responses) {
    if (typed.items.size() < 2) {
      out.warnings.push_back("type \"" + typed.type +
                             "\" omitted: needs at least 2 responses");
      continue;
    }
    std::size_t type_index = type_names.size();
    type_names.push_back(typed.type);
    for (const auto& [record_id, response] : typed.items) {
      auto it = by_id.find(record_id);
      if (it == by_id.end()) throw Error("quality: unknown record id " + record_id);
      const DialogueRecord& record = *it->second;
      Entry e;
      e.type_index = type_index;
      e.raw_score = score(model, featurize(record, response, stats));
      e.similarity = provider.similarity(record.context_text(), response);
      entries.push_back(e);
    }
  }
  if (entries.size() < 2) {
    out.warnings.push_back("too few responses for a quality report");
    return out;
  }

  std::vector<double> raw;
  raw.reserve(entries.size());
  for (const auto& e : entries) raw.push_back(e.raw_score);
  auto normalized = normalize_scores(raw);

  for (std::size_t t = 0; t < type_names.size(); ++t) {
    std::vector<double> preds;
    std::vector<double> sims;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].type_index != t) continue;
      preds.push_back(normalized[i]);
      sims.push_back(entries[i].similarity);
    }
    out.pred_score[type_names[t]] = summarize(preds);
    out.similarity[type_names[t]] = summarize(sims);
  }
  return out;
}

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// mean with the standard deviation as a subscript, table convention
std::string mean_std(const SummaryStats& s) {
  return fmt3(s.mean) + "_{" + fmt3(s.stddev) + "}";
}

}  // namespace

std::string quality_table(const QualityStats& stats) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %-16s %s\n", "Approach", "Pred. Score",
                "Similarity");
  out << buf;
  for (const auto& [type, pred] : stats.pred_score) {
    auto sim = stats.similarity.find(type);
    std::snprintf(buf, sizeof(buf), "%-12s %-16s %s\n", type.c_str(),
                  mean_std(pred).c_str(),
                  sim == stats.similarity.end() ? "-" : mean_std(sim->second).c_str());
    out << buf;
  }
  return out.str();
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error("pearson: length mismatch");
  if (xs.size() < 2) throw Error("pearson: need at least 2 points");
  double n = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

// average ranks, ties share the mean of their positions
std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error("spearman: length mismatch");
  if (xs.size() < 2) throw Error("spearman: need at least 2 points");
  return pearson(average_ranks(xs), average_ranks(ys));
}

std::vector<ContaminationRow> contamination_report(
    const std::vector<GenerationResult>& results) {
  // (k, position) -> paired observations
  struct Bucket {
    std::vector<double> jaccards;
    std::vector<double> example_lens;
    std::vector<double> generated_lens;
  };
  std::map<std::pair<std::size_t, std::size_t>, Bucket> buckets;

  for (const auto& r : results) {
    std::size_t k = r.examples_used.size();
    if (k == 0 || r.negatives.empty()) continue;
    for (std::size_t pos = 0; pos < k; ++pos) {
      const auto& example = r.examples_used[pos];
      std::size_t pairs = std::min(example.negatives.size(), r.negatives.size());
      for (std::size_t i = 0; i < pairs; ++i) {
        auto ex_tokens = tokenize(example.negatives[i]);
        auto gen_tokens = tokenize(r.negatives[i]);
        double j = jaccard(token_set(ex_tokens), token_set(gen_tokens));
        auto add = [&](std::size_t position) {
          Bucket& b = buckets[{k, position}];
          b.jaccards.push_back(j);
          b.example_lens.push_back(static_cast<double>(ex_tokens.size()));
          b.generated_lens.push_back(static_cast<double>(gen_tokens.size()));
        };
        add(pos + 1);
        if (k > 1) add(0);  // pooled row for multi-example prompts
      }
    }
  }

  std::vector<ContaminationRow> rows;
  for (const auto& [key, bucket] : buckets) {
    ContaminationRow row;
    row.k = key.first;
    row.position = key.second;
    row.pairs = bucket.jaccards.size();
    row.mean_jaccard =
        std::accumulate(bucket.jaccards.begin(), bucket.jaccards.end(), 0.0) /
        static_cast<double>(bucket.jaccards.size());
    try {
      row.pearson_len = pearson(bucket.example_lens, bucket.generated_lens);
    } catch (const Error&) {
      row.pearson_len = std::nullopt;  // zero variance: undefined
    }
    try {
      row.spearman_len = spearman(bucket.example_lens, bucket.generated_lens);
    } catch (const Error&) {
      row.spearman_len = std::nullopt;
    }
    rows.push_back(row);
  }
  // per-position rows first, pooled ("all") last within each k
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.k != b.k) return a.k < b.k;
    std::size_t pa = a.position == 0 ? std::numeric_limits<std::size_t>::max() : a.position;
    std::size_t pb = b.position == 0 ? std::numeric_limits<std::size_t>::max() : b.position;
    return pa < pb;
  });
  return rows;
}

std::string contamination_table(const std::vector<ContaminationRow>& rows) {
  std::ostringstream out;
  out << "k  position  jaccard  pearson  spearman  pairs\n";
  for (const auto& r : rows) {
    std::string pos = r.position == 0 ? "all" : std::to_string(r.position) + "/" + std::to_string(r.k);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-2zu %-9s %7.3f  %7s  %8s  %zu\n", r.k, pos.c_str(),
                  r.mean_jaccard,
                  r.pearson_len ? fmt3(*r.pearson_len).c_str() : "undef",
                  r.spearman_len ? fmt3(*r.spearman_len).c_str() : "undef", r.pairs);
    out << buf;
  }
  return out.str();
}

}  // namespace advneg
