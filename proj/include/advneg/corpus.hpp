#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace advneg {

enum class Speaker { A, B };

inline char speaker_letter(Speaker s) { return s == Speaker::A ? 'A' : 'B'; }
inline Speaker other_speaker(Speaker s) { return s == Speaker::A ? Speaker::B : Speaker::A; }

struct Utterance {
  Speaker speaker = Speaker::A;
  std::string text;
};

enum class Source { dailydialogpp, personachat, synthetic };

std::string source_name(Source s);
Source source_from_name(const std::string& name);

// One dialogue context with its labeled response pools.
struct DialogueRecord {
  std::string id;
  std::vector<Utterance> context;
  std::vector<std::string> persona;
  std::vector<std::string> positives;
  std::vector<std::string> adversarial_negatives;
  Source source = Source::synthetic;

  bool has_adversarial() const { return adversarial_negatives.size() >= 5; }
  // Utterance texts joined with single spaces; the retrieval/feature query.
  std::string context_text() const;
  Speaker last_speaker() const;
};

enum class Split { train, validation, test };

std::string split_name(Split s);
Split split_from_name(const std::string& name);

struct Corpus {
  Split split = Split::train;
  std::vector<DialogueRecord> records;
  // Every distinct positive response exactly once, first-seen order.
  std::vector<std::string> response_pool;

  const DialogueRecord* find(const std::string& id) const;
  std::size_t adversarial_bearing_count() const;
  void rebuild_pool();
};

enum class CorpusFormat { dailydialogpp_json, personachat_json, jsonl_native };

CorpusFormat corpus_format_from_name(const std::string& name);

// Parses and validates one of the three supported formats. Malformed records
// raise Error naming the record index; an empty corpus is an error.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   Split split = Split::train);

void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);

// Moves persona sentences to the front of the first utterance's text and
// clears the persona field. Records without persona are returned unchanged.
DialogueRecord flatten_persona(const DialogueRecord& record);

// Adversarial negatives for corpora without human-written ones: one utterance
// sampled from the context itself plus random-pool fillers.
std::vector<std::string> make_personachat_adversarial(
    const DialogueRecord& record, const std::vector<std::string>& pool,
    std::size_t n, std::uint64_t seed);

enum class Label { positive, random_neg, adversarial_neg };

std::string label_name(Label l);
Label label_from_name(const std::string& name);

// A context with an ordered candidate list: 11-wide for training
// (1 positive + 5 random + 5 adversarial), 6-wide for tests.
struct CandidateInstance {
  std::string context_id;
  std::vector<std::string> candidates;
  int positive_index = 0;
  std::vector<Label> labels;

  std::size_t width() const { return candidates.size(); }
};

void save_instances_jsonl(const std::vector<CandidateInstance>& instances,
                          const std::filesystem::path& path);
std::vector<CandidateInstance> load_instances_jsonl(const std::filesystem::path& path);

std::string record_to_jsonl_line(const DialogueRecord& record);
DialogueRecord record_from_jsonl_line(const std::string& line);

}  // namespace advneg
