#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "advneg/corpus.hpp"
#include "advneg/negatives.hpp"

namespace advneg {

enum class NegSource { human, generated, bm25, semihard, random };

std::string neg_source_name(NegSource s);
NegSource neg_source_from_name(const std::string& name);

enum class TestKind { random, adversarial };

TestKind test_kind_from_name(const std::string& name);

struct AssembleOptions {
  // 5 generated negatives per record id; required for NegSource::generated.
  const std::unordered_map<std::string, std::vector<std::string>>* generated = nullptr;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  double semihard_alpha = 0.07;
};

// 11-wide training instances: 1 positive + 5 random + 5 adversarial of the
// chosen source, order shuffled per record under the seed. Records without
// enough human/generated negatives are skipped rather than padded; retrieval
// shortfalls (pool too small) raise an error naming the record.
std::vector<CandidateInstance> assemble_training_instances(
    const Corpus& corpus, NegSource adversarial_source, std::uint64_t seed,
    const AssembleOptions& options = {});

// 6-wide test instances: 1 positive + 5 negatives of one type. Adversarial
// negatives come from human annotations, or are synthesized from the context
// for persona-sourced records.
std::vector<CandidateInstance> assemble_test_instances(const Corpus& corpus,
                                                       TestKind kind,
                                                       std::uint64_t seed);

}  // namespace advneg
