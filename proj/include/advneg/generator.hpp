#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advneg/corpus.hpp"
#include "advneg/errors.hpp"
#include "advneg/llm_client.hpp"
#include "advneg/prompt.hpp"

namespace advneg {

struct ParsedResponses {
  std::vector<std::string> items;  // numbering stripped, empties removed
  std::string raw;
  bool numbering_ok = false;  // markers were exactly 1..5, in order, once each
};

// The completion continues the "1." stub, so it is re-prefixed with "1. "
// before splitting on line-leading "<digits>." markers.
ParsedResponses parse_numbered_list(const std::string& completion);

struct ResponseFlags {
  bool repetition = false;
  bool underscore_junk = false;

  bool any() const { return repetition || underscore_junk; }
};

struct ErrorReport {
  std::vector<ResponseFlags> per_response;
  bool numbering_violation = false;
  bool clean = false;
};

// Flags the three mechanical failure modes of numbered-completion output:
// word/n-gram repetition, fill-in-the-blank underscore runs, and numbering
// violations. Semantic false negatives are deliberately not detected here.
ErrorReport detect_errors(const ParsedResponses& parsed);

// repetition: a token repeated >= 4 times consecutively, or any 3-gram
// occurring >= 3 times within one response.
inline constexpr int kMaxConsecutiveRepeats = 4;
inline constexpr int kTrigramRepeatLimit = 3;

struct ExampleUse {
  std::string record_id;
  std::vector<std::string> negatives;
};

struct GenerationResult {
  std::string target_id;
  std::vector<std::string> negatives;       // exactly 5 when clean
  int attempts = 0;
  std::vector<std::string> prompts_used;    // spec hash per attempt
  std::vector<ExampleUse> examples_used;    // demonstrations of the clean attempt
  std::vector<CompletionResult> ledger_slice;
};

class GenerationError : public Error {
 public:
  GenerationError(std::string target_id, int attempts, std::vector<ErrorReport> reports)
      : Error("generation failed for " + target_id + " after " +
              std::to_string(attempts) + " attempts"),
        target_id(std::move(target_id)),
        attempts(attempts),
        reports(std::move(reports)) {}

  std::string target_id;
  int attempts;
  std::vector<ErrorReport> reports;
};

struct GeneratorOptions {
  InstructionKind instruction = InstructionKind::dir;
  std::size_t k = 2;
  int attempt_cap = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// One target: loop {select examples -> render -> complete -> parse -> filter}
// with a fresh example draw per attempt until clean or the cap; REUSE mode
// appends the clean 5-tuple back into the example set.
GenerationResult generate_negatives(const DialogueRecord& target, ExampleSet& examples,
                                    const GeneratorOptions& options,
                                    CompletionClient& client);

struct GenerationFailure {
  std::string target_id;
  int attempts = 0;
  std::vector<ErrorReport> reports;
};

struct BatchOutcome {
  std::vector<GenerationResult> results;   // input order
  std::vector<GenerationFailure> failures; // skipped records
};

// Batch driver. Targets run in parallel up to options.workers except in REUSE
// mode, which is inherently sequential (each append changes later draws).
BatchOutcome generate_for_records(const std::vector<DialogueRecord>& targets,
                                  ExampleSet& examples, const GeneratorOptions& options,
                                  CompletionClient& client);

void save_generation_jsonl(const std::vector<GenerationResult>& results,
                           const std::filesystem::path& path);
std::vector<GenerationResult> load_generation_jsonl(const std::filesystem::path& path);

}  // namespace advneg
