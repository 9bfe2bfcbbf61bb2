#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advneg/corpus.hpp"

namespace advneg {

// The three instruction variants. `dir` enumerates five irrelevant responses,
// `pos` additionally shows the relevant response above the instruction, `imp`
// is the zero-shot narrative form ending in a responder slot.
enum class InstructionKind { dir, pos, imp };

std::string instruction_kind_name(InstructionKind k);
InstructionKind instruction_kind_from_name(const std::string& name);

inline constexpr const char* kDirectInstruction =
    "Create five irrelevant responses containing keywords of the given dialogue context:";
inline constexpr const char* kRelevantResponsePrefix = "Relevant response: ";

struct PromptSpec {
  InstructionKind instruction = InstructionKind::dir;
  std::vector<DialogueRecord> examples;  // each must carry exactly 5 negatives
  DialogueRecord target;
  std::string separator = "###";
  std::string context_delimiter = "\"\"\"";

  std::size_t k() const { return examples.size(); }
};

struct RenderedPrompt {
  std::string text;
  std::string target_id;
  std::string spec_hash;
};

// Byte-exact prompt layout: per block a separator line, "Dialogue context:",
// the delimited speaker turns, then instruction + numbered negatives (examples)
// or instruction + "1." stub (target). Lines end with '\n'; the prompt ends
// with a single trailing newline and carries no trailing whitespace on any line.
RenderedPrompt render_prompt(const PromptSpec& spec);

// Demonstration pool for in-context examples.
struct ExampleSet {
  std::vector<DialogueRecord> records;
  bool reuse_enabled = false;

  std::size_t size() const { return records.size(); }
};

// Count of examples for a percentage subsample; round-to-nearest keeps the
// canonical 9259-record pool at {0.1%, 1%, 10%, 100%} -> {9, 93, 926, 9259}.
std::size_t example_set_size(std::size_t total, double fraction_percent);

// Seeded uniform subsample of the adversarial-bearing records.
ExampleSet subsample_example_set(const std::vector<DialogueRecord>& records,
                                 double fraction_percent, std::uint64_t seed,
                                 bool reuse_enabled = false);

// k distinct demonstrations, uniform without replacement, never the target.
std::vector<DialogueRecord> select_examples(const ExampleSet& set, std::size_t k,
                                            const std::string& target_id,
                                            std::uint64_t seed);

// Adds a generated 5-tuple back into the demonstration pool (the grow-as-you-
// generate mode); the new record reuses the target's context.
void reuse_append(ExampleSet& set, const DialogueRecord& target,
                  const std::vector<std::string>& negatives);

}  // namespace advneg
