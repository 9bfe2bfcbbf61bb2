#include "advneg/assemble.hpp"

#include <algorithm>

#include "advneg/errors.hpp"
#include "advneg/hash.hpp"
#include "advneg/rng.hpp"

namespace advneg {

namespace {

CandidateInstance shuffle_into_instance(const std::string& context_id,
                                        const std::string& positive,
                                        const std::vector<std::string>& random_negs,
                                        const std::vector<std::string>& adversarial_negs,
                                        std::uint64_t seed) {
  struct Entry {
    std::string text;
    Label label;
  };
  std::vector<Entry> entries;
  entries.push_back({positive, Label::positive});
  for (const auto& r : random_negs) entries.push_back({r, Label::random_neg});
  for (const auto& a : adversarial_negs) entries.push_back({a, Label::adversarial_neg});
  SeededRng rng(seed);
  rng.shuffle(entries);
  CandidateInstance inst;
  inst.context_id = context_id;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    inst.candidates.push_back(entries[i].text);
    inst.labels.push_back(entries[i].label);
    if (entries[i].label == Label::positive) inst.positive_index = static_cast<int>(i);
  }
  return inst;
}

std::unordered_set<std::string> positives_of(const DialogueRecord& r) {
  return {r.positives.begin(), r.positives.end()};
}

}  // namespace

std::string neg_source_name(NegSource s) {
  switch (s) {
    case NegSource::human: return "human";
    case NegSource::generated: return "generated";
    case NegSource::bm25: return "bm25";
    case NegSource::semihard: return "semihard";
    case NegSource::random: return "random";
  }
  return "human";
}

NegSource neg_source_from_name(const std::string& name) {
  if (name == "human") return NegSource::human;
  if (name == "generated") return NegSource::generated;
  if (name == "bm25") return NegSource::bm25;
  if (name == "semihard") return NegSource::semihard;
  if (name == "random") return NegSource::random;
  throw Error("unknown negative source: " + name);
}

TestKind test_kind_from_name(const std::string& name) {
  if (name == "random" || name == "random-test") return TestKind::random;
  if (name == "adversarial" || name == "adv-test") return TestKind::adversarial;
  throw Error("unknown test kind: " + name);
}

std::vector<CandidateInstance> assemble_training_instances(
    const Corpus& corpus, NegSource adversarial_source, std::uint64_t seed,
    const AssembleOptions& options) {
  if (adversarial_source == NegSource::generated && options.generated == nullptr) {
    throw Error("assemble: generated source requires a negatives table");
  }
  std::optional<Bm25Index> bm25;
  std::optional<EmbeddingProvider> provider;
  if (adversarial_source == NegSource::bm25) {
    bm25 = Bm25Index::build(corpus.response_pool, options.bm25_k1, options.bm25_b);
  } else if (adversarial_source == NegSource::semihard) {
    provider = EmbeddingProvider::tfidf(corpus.response_pool);
  }

  std::vector<CandidateInstance> out;
  for (const auto& record : corpus.records) {
    std::vector<std::string> adversarial;
    switch (adversarial_source) {
      case NegSource::human:
        if (!record.has_adversarial()) continue;  // skipped, never padded
        adversarial.assign(record.adversarial_negatives.begin(),
                           record.adversarial_negatives.begin() + 5);
        break;
      case NegSource::generated: {
        auto it = options.generated->find(record.id);
        if (it == options.generated->end()) continue;
        if (it->second.size() != 5) {
          throw Error("assemble: record " + record.id + " has " +
                      std::to_string(it->second.size()) + " generated negatives, need 5");
        }
        adversarial = it->second;
        break;
      }
      case NegSource::bm25:
        adversarial = retrieve_bm25(record, *bm25, corpus.response_pool, 5,
                                    positives_of(record));
        break;
      case NegSource::semihard: {
        SemiHardConfig cfg;
        cfg.alpha = options.semihard_alpha;
        cfg.n = 5;
        adversarial = retrieve_semihard(record.positives.front(), corpus.response_pool,
                                        *provider, cfg, positives_of(record));
        break;
      }
      case NegSource::random:
        adversarial = sample_random(corpus.response_pool, positives_of(record), 5,
                                    derive_seed(seed, "train-adv:" + record.id));
        break;
    }

    auto exclude = positives_of(record);
    exclude.insert(adversarial.begin(), adversarial.end());
    std::vector<std::string> random_negs;
    try {
      random_negs = sample_random(corpus.response_pool, exclude, 5,
                                  derive_seed(seed, "train-rand:" + record.id));
    } catch (const Error& e) {
      throw Error("assemble: record " + record.id + ": " + e.what());
    }

    auto inst = shuffle_into_instance(record.id, record.positives.front(), random_negs,
                                      adversarial,
                                      derive_seed(seed, "train-shuffle:" + record.id));
    if (adversarial_source == NegSource::random) {
      // truthful labels: with a random "adversarial" source every negative is random
      for (auto& l : inst.labels) {
        if (l == Label::adversarial_neg) l = Label::random_neg;
      }
    }
    out.push_back(std::move(inst));
  }
  if (out.empty()) {
    throw Error("assemble: no record has 5 " + neg_source_name(adversarial_source) +
                " negatives");
  }
  return out;
}

std::vector<CandidateInstance> assemble_test_instances(const Corpus& corpus,
                                                       TestKind kind,
                                                       std::uint64_t seed) {
  std::vector<CandidateInstance> out;
  for (const auto& record : corpus.records) {
    std::vector<std::string> negatives;
    if (kind == TestKind::random) {
      try {
        negatives = sample_random(corpus.response_pool, positives_of(record), 5,
                                  derive_seed(seed, "test-rand:" + record.id));
      } catch (const Error& e) {
        throw Error("assemble: record " + record.id + ": " + e.what());
      }
    } else {
      if (record.has_adversarial()) {
        negatives.assign(record.adversarial_negatives.begin(),
                         record.adversarial_negatives.begin() + 5);
      } else if (record.source == Source::personachat) {
        negatives = make_personachat_adversarial(record, corpus.response_pool, 5,
                                                 derive_seed(seed, "test-adv"));
      } else {
        continue;  // no adversarial material for this record
      }
    }
    std::vector<std::string> random_negs;
    std::vector<std::string> adversarial_negs;
    (kind == TestKind::random ? random_negs : adversarial_negs) = std::move(negatives);
    out.push_back(shuffle_into_instance(record.id, record.positives.front(), random_negs,
                                        adversarial_negs,
                                        derive_seed(seed, "test-shuffle:" + record.id)));
  }
  if (out.empty()) throw Error("assemble: no usable test records");
  return out;
}

}  // namespace advneg
