#include "advneg/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "advneg/errors.hpp"

namespace advneg {

using json = nlohmann::json;

Eigen::VectorXd featurize(const DialogueRecord& context, const std::string& response,
                          const TextStats& stats) {
  auto resp_tokens = tokenize(response);
  if (resp_tokens.empty()) {
    throw Error("featurize: empty response for context " + context.id);
  }
  auto ctx_tokens = tokenize(context.context_text());

  Eigen::VectorXd f(kFeatureArity);
  f(0) = 1.0;
  f(1) = cosine(tfidf_embed(ctx_tokens, stats), tfidf_embed(resp_tokens, stats));

  auto ctx_set = token_set(ctx_tokens);
  auto resp_set = token_set(resp_tokens);
  std::size_t inter = 0;
  for (const auto& t : resp_set) inter += ctx_set.count(t);
  std::size_t uni = ctx_set.size() + resp_set.size() - inter;
  f(2) = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);

  auto ctx_bi = bigram_set(ctx_tokens);
  auto resp_bi = bigram_set(resp_tokens);
  std::size_t bi_inter = 0;
  for (const auto& b : resp_bi) bi_inter += ctx_bi.count(b);
  std::size_t bi_uni = ctx_bi.size() + resp_bi.size() - bi_inter;
  f(3) = bi_uni == 0 ? 0.0 : static_cast<double>(bi_inter) / static_cast<double>(bi_uni);

  double bm25 = bm25_pair_score(ctx_tokens, resp_tokens, stats);
  f(4) = bm25 / (1.0 + bm25);

  double len_r = static_cast<double>(resp_tokens.size());
  double len_c = static_cast<double>(ctx_tokens.size());
  f(5) = len_c == 0.0 ? 0.0 : std::min(len_r, len_c) / std::max(len_r, len_c);

  auto keywords = content_tokens(ctx_tokens);
  std::set<std::string> kw_set(keywords.begin(), keywords.end());
  if (kw_set.empty()) {
    f(6) = 0.0;
  } else {
    std::size_t covered = 0;
    for (const auto& k : kw_set) covered += resp_set.count(k);
    f(6) = static_cast<double>(covered) / static_cast<double>(kw_set.size());
  }
  return f;
}

double score(const RankerModel& model, const Eigen::VectorXd& features) {
  if (model.weights.size() != features.size()) {
    throw Error("score: feature arity " + std::to_string(features.size()) +
                " does not match model arity " + std::to_string(model.weights.size()));
  }
  return model.weights.dot(features);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  Eigen::VectorXd shifted = scores.array() - scores.maxCoeff();
  Eigen::VectorXd e = shifted.array().exp();
  return e / e.sum();
}

double listwise_loss(const Eigen::VectorXd& scores, int positive_index) {
  if (scores.size() < 2) throw Error("listwise_loss: need at least 2 scores");
  if (positive_index < 0 || positive_index >= scores.size()) {
    throw Error("listwise_loss: positive index out of range");
  }
  if (!scores.allFinite()) throw Error("listwise_loss: non-finite score");
  double m = scores.maxCoeff();
  double log_sum = std::log((scores.array() - m).exp().sum());
  return -(scores(positive_index) - m - log_sum);
}

FeaturizedInstance featurize_instance(const CandidateInstance& instance,
                                      const Corpus& corpus, const TextStats& stats) {
  const DialogueRecord* record = corpus.find(instance.context_id);
  if (record == nullptr) {
    throw Error("featurize: unknown context id " + instance.context_id);
  }
  FeaturizedInstance out;
  out.context_id = instance.context_id;
  out.positive_index = instance.positive_index;
  out.features.resize(static_cast<Eigen::Index>(instance.candidates.size()), kFeatureArity);
  for (std::size_t i = 0; i < instance.candidates.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        featurize(*record, instance.candidates[i], stats).transpose();
  }
  return out;
}

std::vector<FeaturizedInstance> featurize_instances(
    const std::vector<CandidateInstance>& instances, const Corpus& corpus,
    const TextStats& stats) {
  // corpus.find is linear; build the id index once
  std::unordered_map<std::string, const DialogueRecord*> by_id;
  for (const auto& r : corpus.records) by_id[r.id] = &r;
  std::vector<FeaturizedInstance> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    auto it = by_id.find(inst.context_id);
    if (it == by_id.end()) throw Error("featurize: unknown context id " + inst.context_id);
    FeaturizedInstance f;
    f.context_id = inst.context_id;
    f.positive_index = inst.positive_index;
    f.features.resize(static_cast<Eigen::Index>(inst.candidates.size()), kFeatureArity);
    for (std::size_t i = 0; i < inst.candidates.size(); ++i) {
      f.features.row(static_cast<Eigen::Index>(i)) =
          featurize(*it->second, inst.candidates[i], stats).transpose();
    }
    out.push_back(std::move(f));
  }
  return out;
}

double batch_loss(const Eigen::VectorXd& weights,
                  const std::vector<FeaturizedInstance>& batch) {
  if (batch.empty()) throw Error("batch_loss: empty batch");
  double total = 0.0;
  for (const auto& inst : batch) {
    total += listwise_loss(inst.features * weights, inst.positive_index);
  }
  return total / static_cast<double>(batch.size());
}

Eigen::VectorXd batch_gradient(const Eigen::VectorXd& weights,
                               const std::vector<FeaturizedInstance>& batch) {
  if (batch.empty()) throw Error("batch_gradient: empty batch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(weights.size());
  for (const auto& inst : batch) {
    Eigen::VectorXd p = softmax(inst.features * weights);
    p(inst.positive_index) -= 1.0;
    g += inst.features.transpose() * p;
  }
  return g / static_cast<double>(batch.size());
}

Eigen::VectorXd gradient(const RankerModel& model,
                         const std::vector<CandidateInstance>& batch,
                         const Corpus& corpus, const TextStats& stats) {
  return batch_gradient(model.weights, featurize_instances(batch, corpus, stats));
}

std::vector<std::string> TrainConfig::validate() const {
  std::vector<std::string> v;
  if (learning_rate <= 0.0) v.push_back("learning_rate must be > 0");
  if (max_steps < 1) v.push_back("max_steps must be >= 1");
  if (backtrack_factor <= 0.0 || backtrack_factor >= 1.0) {
    v.push_back("backtrack_factor must be in (0, 1)");
  }
  if (tolerance <= 0.0) v.push_back("tolerance must be > 0");
  return v;
}

RankerModel train_featurized(const std::vector<FeaturizedInstance>& instances,
                             const TrainConfig& config) {
  auto violations = config.validate();
  if (!violations.empty()) {
    std::string msg = "invalid train config:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw Error(msg);
  }
  if (instances.empty()) throw Error("train: no instances");
  const auto width = instances.front().features.rows();
  for (const auto& inst : instances) {
    if (inst.features.rows() != width) {
      throw Error("train: mixed candidate widths within one run");
    }
  }

  RankerModel model;
  model.weights = Eigen::VectorXd::Zero(instances.front().features.cols());
  double loss = batch_loss(model.weights, instances);
  if (!std::isfinite(loss)) throw Error("train: non-finite initial loss");

  for (int step = 1; step <= config.max_steps; ++step) {
    Eigen::VectorXd g = batch_gradient(model.weights, instances);
    double gn = g.norm();
    if (step == 1) model.trace.push_back({loss, 0.0, gn});
    if (gn < 1e-12) break;  // stationary

    double step_size = config.learning_rate;
    bool accepted = false;
    Eigen::VectorXd w_try;
    double loss_try = 0.0;
    while (step_size > 1e-12 * config.learning_rate) {
      w_try = model.weights - step_size * g;
      loss_try = batch_loss(w_try, instances);
      if (!std::isfinite(loss_try)) {
        throw Error("train: non-finite loss at step " + std::to_string(step));
      }
      if (loss_try < loss) {
        accepted = true;
        break;
      }
      step_size *= config.backtrack_factor;
    }
    if (!accepted) break;  // no descent direction left at any step size

    double delta = loss - loss_try;
    model.weights = w_try;
    loss = loss_try;
    model.trace.push_back({loss, step_size, gn});
    if (delta < config.tolerance) break;
  }
  return model;
}

RankerModel train(const std::vector<CandidateInstance>& instances,
                  const TrainConfig& config, const Corpus& corpus,
                  const TextStats& stats) {
  return train_featurized(featurize_instances(instances, corpus, stats), config);
}

std::vector<double> normalize_scores(const std::vector<double>& scores) {
  if (scores.size() < 2) throw Error("normalize_scores: need at least 2 scores");
  auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(scores.size());
  if (lo == hi) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = (scores[i] - lo) / (hi - lo);
  }
  return out;
}

void save_model(const RankerModel& model, const std::filesystem::path& path) {
  json j;
  j["feature_names"] = std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());
  std::vector<double> w(model.weights.data(), model.weights.data() + model.weights.size());
  j["weights"] = w;
  json trace = json::array();
  for (const auto& s : model.trace) {
    trace.push_back({{"loss", s.loss}, {"step_size", s.step_size}, {"grad_norm", s.grad_norm}});
  }
  j["trace"] = trace;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

RankerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path.string());
  json j = json::parse(in);
  RankerModel model;
  const auto& w = j.at("weights");
  model.weights.resize(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) {
    model.weights(static_cast<Eigen::Index>(i)) = w[i].get<double>();
  }
  if (j.contains("trace")) {
    for (const auto& s : j["trace"]) {
      model.trace.push_back({s.value("loss", 0.0), s.value("step_size", 0.0),
                             s.value("grad_norm", 0.0)});
    }
  }
  return model;
}

}  // namespace advneg
