#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "advneg/corpus.hpp"
#include "advneg/generator.hpp"
#include "advneg/negatives.hpp"
#include "advneg/ranker.hpp"

namespace advneg {

struct RankingOutcome {
  std::string context_id;
  std::vector<double> scores;
  int rank = 1;  // 1-based rank of the positive, pessimistic under ties
};

double recall_at_1(const std::vector<RankingOutcome>& outcomes);
double mean_reciprocal_rank(const std::vector<RankingOutcome>& outcomes);

struct EvalResult {
  double r_at_1 = 0.0;
  double mrr = 0.0;
  std::vector<RankingOutcome> outcomes;
};

// Scores every candidate and ranks the positive. Ties are pessimistic: the
// positive takes the worst rank among equal scores, so a constant model
// cannot fake R@1.
EvalResult evaluate(const RankerModel& model,
                    const std::vector<CandidateInstance>& instances,
                    const Corpus& corpus, const TextStats& stats);

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::size_t n = 0;
};

SummaryStats summarize(const std::vector<double>& values);

struct TypedResponses {
  std::string type;  // e.g. positive / random / semihard / generated / human
  std::vector<std::pair<std::string, std::string>> items;  // (record id, response)
};

struct QualityStats {
  std::map<std::string, SummaryStats> pred_score;  // normalized over all pairs
  std::map<std::string, SummaryStats> similarity;
  std::vector<std::string> warnings;
};

// Prediction scores are min-max normalized over the full evaluation pool
// before per-type summaries; similarity is provider cosine between context
// and response. Types with fewer than 2 responses are omitted with a warning.
QualityStats quality_report(const RankerModel& model, const EmbeddingProvider& provider,
                            const std::vector<TypedResponses>& responses,
                            const Corpus& corpus, const TextStats& stats);

std::string quality_table(const QualityStats& stats);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

double pearson(const std::vector<double>& xs, const std::vector<double>& ys);
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct ContaminationRow {
  std::size_t k = 0;
  std::size_t position = 0;  // 1-based; 0 means pooled over positions
  double mean_jaccard = 0.0;
  std::optional<double> pearson_len;   // absent when a length variance is zero
  std::optional<double> spearman_len;
  std::size_t pairs = 0;
};

// Overlap between in-context example negatives and the generated responses,
// paired by list position. k=1 yields one row; k=2 yields per-position rows
// plus a pooled row.
std::vector<ContaminationRow> contamination_report(
    const std::vector<GenerationResult>& results);

std::string contamination_table(const std::vector<ContaminationRow>& rows);

}  // namespace advneg
