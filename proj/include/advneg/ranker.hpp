#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "advneg/corpus.hpp"
#include "advneg/text.hpp"

namespace advneg {

// Feature layout of the linear listwise scorer. The scorer stands in for a
// fine-tuned cross-encoder; the candidate protocol and listwise objective are
// unchanged, only the representation is hand-crafted.
inline constexpr std::array<const char*, 7> kFeatureNames = {
    "bias",         "tfidf_cosine",       "jaccard_overlap",
    "bigram_overlap", "bm25_score_normalized", "length_ratio",
    "context_keyword_coverage"};
inline constexpr int kFeatureArity = 7;

// Deterministic context-response features; similarity entries lie in [0,1]
// and unknown tokens carry zero TF-IDF mass. Empty responses are an error.
Eigen::VectorXd featurize(const DialogueRecord& context, const std::string& response,
                          const TextStats& stats);

struct TrainStep {
  double loss = 0.0;
  double step_size = 0.0;
  double grad_norm = 0.0;
};

struct RankerModel {
  Eigen::VectorXd weights;
  std::vector<TrainStep> trace;
};

double score(const RankerModel& model, const Eigen::VectorXd& features);

// Numerically stable softmax (max subtraction).
Eigen::VectorXd softmax(const Eigen::VectorXd& scores);

// -log softmax(scores)[positive_index]
double listwise_loss(const Eigen::VectorXd& scores, int positive_index);

// One candidate list through the featurizer: rows are candidates.
struct FeaturizedInstance {
  std::string context_id;
  Eigen::MatrixXd features;  // width x arity
  int positive_index = 0;
};

FeaturizedInstance featurize_instance(const CandidateInstance& instance,
                                      const Corpus& corpus, const TextStats& stats);
std::vector<FeaturizedInstance> featurize_instances(
    const std::vector<CandidateInstance>& instances, const Corpus& corpus,
    const TextStats& stats);

double batch_loss(const Eigen::VectorXd& weights,
                  const std::vector<FeaturizedInstance>& batch);

// Mean over instances of sum_j (softmax_j - [j == positive]) * f_j.
Eigen::VectorXd batch_gradient(const Eigen::VectorXd& weights,
                               const std::vector<FeaturizedInstance>& batch);

Eigen::VectorXd gradient(const RankerModel& model,
                         const std::vector<CandidateInstance>& batch,
                         const Corpus& corpus, const TextStats& stats);

struct TrainConfig {
  double learning_rate = 1.0;   // initial step, halved by backtracking
  int max_steps = 300;
  double backtrack_factor = 0.5;
  double tolerance = 1e-9;      // stop when the loss delta falls below this
  std::uint64_t seed = 0;

  std::vector<std::string> validate() const;
};

// Full-batch gradient descent from zero weights with backtracking line
// search; the loss trace is non-increasing across accepted steps.
RankerModel train_featurized(const std::vector<FeaturizedInstance>& instances,
                             const TrainConfig& config);
RankerModel train(const std::vector<CandidateInstance>& instances,
                  const TrainConfig& config, const Corpus& corpus,
                  const TextStats& stats);

// Min-max map onto [0,1]; a constant list maps to all 0.5.
std::vector<double> normalize_scores(const std::vector<double>& scores);

void save_model(const RankerModel& model, const std::filesystem::path& path);
RankerModel load_model(const std::filesystem::path& path);

}  // namespace advneg
