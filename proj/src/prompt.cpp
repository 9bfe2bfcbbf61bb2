#include "advneg/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "advneg/errors.hpp"
#include "advneg/hash.hpp"
#include "advneg/rng.hpp"

namespace advneg {

namespace {

std::string rtrim(const std::string& s) {
  std::size_t e = s.find_last_not_of(" \t\r");
  return e == std::string::npos ? "" : s.substr(0, e + 1);
}

void append_dialogue(std::string& out, const PromptSpec& spec, const DialogueRecord& r) {
  out += spec.separator;
  out += '\n';
  out += "Dialogue context:\n";
  out += spec.context_delimiter;
  out += '\n';
  for (const auto& u : r.context) {
    out += speaker_letter(u.speaker);
    out += ": ";
    out += rtrim(u.text);
    out += '\n';
  }
  out += spec.context_delimiter;
  out += '\n';
}

void append_block(std::string& out, const PromptSpec& spec, const DialogueRecord& r,
                  bool is_target) {
  append_dialogue(out, spec, r);
  if (spec.instruction == InstructionKind::imp) {
    // Narrative form, target only: the responder is whoever did not speak last.
    char who = speaker_letter(other_speaker(r.last_speaker()));
    out += "Suddenly, ";
    out += who;
    out += " makes an awkward response. The response appears to be okay at first "
           "glance, but it's irrelevant to the conversation.\n";
    out += who;
    out += ":\n";
    return;
  }
  if (spec.instruction == InstructionKind::pos) {
    if (r.positives.empty()) {
      throw Error("prompt: record " + r.id + " has no positive response");
    }
    out += kRelevantResponsePrefix;
    out += rtrim(r.positives.front());
    out += '\n';
  }
  out += kDirectInstruction;
  out += '\n';
  if (is_target) {
    out += "1.\n";
  } else {
    for (std::size_t i = 0; i < 5; ++i) {
      out += std::to_string(i + 1);
      out += ". ";
      out += rtrim(r.adversarial_negatives[i]);
      out += '\n';
    }
  }
}

std::uint64_t hash_record(std::uint64_t h, const DialogueRecord& r) {
  h = fnv1a64(r.id, h);
  for (const auto& u : r.context) {
    h = fnv1a64(std::string(1, speaker_letter(u.speaker)), h);
    h = fnv1a64(u.text, h);
    h = fnv1a64("\x1f", h);
  }
  for (const auto& n : r.adversarial_negatives) {
    h = fnv1a64(n, h);
    h = fnv1a64("\x1f", h);
  }
  for (const auto& p : r.positives) {
    h = fnv1a64(p, h);
    h = fnv1a64("\x1f", h);
  }
  return h;
}

std::string spec_hash(const PromptSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a64(instruction_kind_name(spec.instruction), h);
  h = fnv1a64(spec.separator, h);
  h = fnv1a64(spec.context_delimiter, h);
  for (const auto& e : spec.examples) h = hash_record(h, e);
  h = fnv1a64("|target|", h);
  h = hash_record(h, spec.target);
  return to_hex(h);
}

}  // namespace

std::string instruction_kind_name(InstructionKind k) {
  switch (k) {
    case InstructionKind::dir: return "dir";
    case InstructionKind::pos: return "pos";
    case InstructionKind::imp: return "imp";
  }
  return "dir";
}

InstructionKind instruction_kind_from_name(const std::string& name) {
  if (name == "dir") return InstructionKind::dir;
  if (name == "pos") return InstructionKind::pos;
  if (name == "imp") return InstructionKind::imp;
  throw Error("unknown instruction kind: " + name);
}

RenderedPrompt render_prompt(const PromptSpec& spec) {
  if (spec.instruction == InstructionKind::imp && !spec.examples.empty()) {
    throw Error("prompt: the implicit instruction is zero-shot only (k must be 0)");
  }
  if (spec.target.context.empty()) {
    throw Error("prompt: target " + spec.target.id + " has an empty context");
  }
  for (const auto& e : spec.examples) {
    if (e.adversarial_negatives.size() != 5) {
      throw Error("prompt: example " + e.id + " must carry exactly 5 negatives, has " +
                  std::to_string(e.adversarial_negatives.size()));
    }
    if (e.context.empty()) {
      throw Error("prompt: example " + e.id + " has an empty context");
    }
  }
  RenderedPrompt out;
  out.target_id = spec.target.id;
  for (const auto& e : spec.examples) append_block(out.text, spec, e, false);
  append_block(out.text, spec, spec.target, true);
  out.spec_hash = spec_hash(spec);
  return out;
}

std::size_t example_set_size(std::size_t total, double fraction_percent) {
  if (fraction_percent <= 0.0 || fraction_percent > 100.0) {
    throw Error("example set fraction must be in (0, 100]");
  }
  auto n = static_cast<std::size_t>(
      std::llround(static_cast<double>(total) * fraction_percent / 100.0));
  return std::max<std::size_t>(1, std::min(n, total));
}

ExampleSet subsample_example_set(const std::vector<DialogueRecord>& records,
                                 double fraction_percent, std::uint64_t seed,
                                 bool reuse_enabled) {
  std::vector<const DialogueRecord*> bearing;
  for (const auto& r : records) {
    if (r.has_adversarial()) bearing.push_back(&r);
  }
  if (bearing.empty()) throw Error("example set: no records with 5 adversarial negatives");
  std::size_t n = example_set_size(bearing.size(), fraction_percent);
  SeededRng rng(derive_seed(seed, "example-subsample"));
  auto picks = rng.sample_indices(bearing.size(), n);
  std::sort(picks.begin(), picks.end());  // keep corpus order
  ExampleSet set;
  set.reuse_enabled = reuse_enabled;
  set.records.reserve(n);
  for (std::size_t p : picks) {
    DialogueRecord r = *bearing[p];
    r.adversarial_negatives.resize(5);
    set.records.push_back(std::move(r));
  }
  return set;
}

std::vector<DialogueRecord> select_examples(const ExampleSet& set, std::size_t k,
                                            const std::string& target_id,
                                            std::uint64_t seed) {
  if (k > 2) throw Error("select_examples: k must be in {0, 1, 2}");
  if (k == 0) return {};
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    const auto& id = set.records[i].id;
    if (id == target_id || id == target_id + "#reuse") continue;
    eligible.push_back(i);
  }
  if (k > eligible.size()) {
    throw Error("select_examples: k=" + std::to_string(k) + " exceeds example set of " +
                std::to_string(eligible.size()));
  }
  SeededRng rng(seed);
  auto picks = rng.sample_indices(eligible.size(), k);
  std::vector<DialogueRecord> out;
  out.reserve(k);
  for (std::size_t p : picks) out.push_back(set.records[eligible[p]]);
  return out;
}

void reuse_append(ExampleSet& set, const DialogueRecord& target,
                  const std::vector<std::string>& negatives) {
  if (!set.reuse_enabled) throw Error("reuse_append: reuse is not enabled for this set");
  if (negatives.size() != 5) {
    throw Error("reuse_append: expected exactly 5 negatives, got " +
                std::to_string(negatives.size()));
  }
  std::string id = target.id + "#reuse";
  for (const auto& r : set.records) {
    if (r.id == id) throw Error("reuse_append: duplicate id " + id);
  }
  DialogueRecord demo;
  demo.id = id;
  demo.context = target.context;
  demo.positives = target.positives;
  demo.adversarial_negatives = negatives;
  demo.source = target.source;
  set.records.push_back(std::move(demo));
}

}  // namespace advneg
