#include "advneg/generator.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "advneg/hash.hpp"
#include "advneg/text.hpp"

namespace advneg {

using json = nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Line-leading "<digits>." marker; returns the number and the rest of the line.
bool match_marker(const std::string& line, int& number, std::string& rest) {
  std::size_t i = line.find_first_not_of(" \t");
  if (i == std::string::npos) return false;
  std::size_t start = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == start || i >= line.size() || line[i] != '.') return false;
  number = std::stoi(line.substr(start, i - start));
  rest = line.substr(i + 1);
  return true;
}

}  // namespace

ParsedResponses parse_numbered_list(const std::string& completion) {
  ParsedResponses out;
  out.raw = completion;
  std::string full = "1. " + completion;

  std::vector<int> markers;
  std::vector<std::string> texts;
  std::istringstream in(full);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    int number = 0;
    std::string rest;
    if (match_marker(line, number, rest)) {
      markers.push_back(number);
      texts.push_back(trim(rest));
    } else if (!texts.empty()) {
      std::string t = trim(line);
      if (!t.empty()) {
        if (!texts.back().empty()) texts.back() += ' ';
        texts.back() += t;
      }
    }
  }

  out.numbering_ok = markers.size() == 5;
  for (std::size_t i = 0; i < markers.size() && out.numbering_ok; ++i) {
    if (markers[i] != static_cast<int>(i) + 1) out.numbering_ok = false;
  }
  for (auto& t : texts) {
    if (!t.empty()) out.items.push_back(std::move(t));
  }
  return out;
}

ErrorReport detect_errors(const ParsedResponses& parsed) {
  ErrorReport report;
  report.numbering_violation = !parsed.numbering_ok || parsed.items.size() != 5;
  bool any_flag = false;
  for (const auto& item : parsed.items) {
    ResponseFlags flags;
    if (item.find("__") != std::string::npos || item.find("_ _") != std::string::npos) {
      flags.underscore_junk = true;
    }
    auto tokens = tokenize(item);
    int run = 1;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      run = tokens[i] == tokens[i - 1] ? run + 1 : 1;
      if (run >= kMaxConsecutiveRepeats) {
        flags.repetition = true;
        break;
      }
    }
    if (!flags.repetition && tokens.size() >= 3) {
      std::map<std::string, int> trigrams;
      for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
        std::string tg = tokens[i] + ' ' + tokens[i + 1] + ' ' + tokens[i + 2];
        if (++trigrams[tg] >= kTrigramRepeatLimit) {
          flags.repetition = true;
          break;
        }
      }
    }
    any_flag = any_flag || flags.any();
    report.per_response.push_back(flags);
  }
  report.clean = !report.numbering_violation && !any_flag;
  return report;
}

GenerationResult generate_negatives(const DialogueRecord& target, ExampleSet& examples,
                                    const GeneratorOptions& options,
                                    CompletionClient& client) {
  if (options.attempt_cap < 1) throw Error("generate: attempt_cap must be >= 1");
  GenerationResult result;
  result.target_id = target.id;
  std::vector<ErrorReport> reports;
  for (int attempt = 1; attempt <= options.attempt_cap; ++attempt) {
    std::uint64_t draw_seed =
        derive_seed(options.seed, target.id + "#attempt" + std::to_string(attempt));
    auto demos = select_examples(examples, options.k, target.id, draw_seed);

    PromptSpec spec;
    spec.instruction = options.instruction;
    spec.examples = demos;
    spec.target = target;
    auto prompt = render_prompt(spec);

    auto completion = client.complete(prompt);
    result.prompts_used.push_back(prompt.spec_hash);
    result.ledger_slice.push_back(completion);
    result.attempts = attempt;

    auto parsed = parse_numbered_list(completion.text);
    auto report = detect_errors(parsed);
    if (report.clean) {
      result.negatives = parsed.items;
      for (const auto& d : demos) {
        result.examples_used.push_back({d.id, d.adversarial_negatives});
      }
      if (examples.reuse_enabled) {
        reuse_append(examples, target, result.negatives);
      }
      return result;
    }
    reports.push_back(std::move(report));
  }
  throw GenerationError(target.id, options.attempt_cap, std::move(reports));
}

BatchOutcome generate_for_records(const std::vector<DialogueRecord>& targets,
                                  ExampleSet& examples, const GeneratorOptions& options,
                                  CompletionClient& client) {
  BatchOutcome out;
  std::size_t workers = options.workers;
  if (examples.reuse_enabled) workers = 1;  // appends feed later draws
  workers = std::max<std::size_t>(1, std::min(workers, targets.size()));

  if (workers == 1) {
    for (const auto& target : targets) {
      try {
        out.results.push_back(generate_negatives(target, examples, options, client));
      } catch (const GenerationError& e) {
        out.failures.push_back({e.target_id, e.attempts, e.reports});
      }
    }
    return out;
  }

  struct Slot {
    bool ok = false;
    GenerationResult result;
    GenerationFailure failure;
  };
  std::vector<Slot> slots(targets.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= targets.size()) return;
      try {
        slots[i].result = generate_negatives(targets[i], examples, options, client);
        slots[i].ok = true;
      } catch (const GenerationError& e) {
        slots[i].failure = {e.target_id, e.attempts, e.reports};
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& s : slots) {
    if (s.ok) {
      out.results.push_back(std::move(s.result));
    } else {
      out.failures.push_back(std::move(s.failure));
    }
  }
  return out;
}

void save_generation_jsonl(const std::vector<GenerationResult>& results,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : results) {
    json j;
    j["target_id"] = r.target_id;
    j["negatives"] = r.negatives;
    j["attempts"] = r.attempts;
    j["prompts_used"] = r.prompts_used;
    json examples = json::array();
    for (const auto& e : r.examples_used) {
      examples.push_back({{"record_id", e.record_id}, {"negatives", e.negatives}});
    }
    j["examples_used"] = examples;
    json usage = json::array();
    for (const auto& u : r.ledger_slice) {
      usage.push_back({{"request_id", u.request_id},
                       {"prompt_tokens", u.prompt_tokens},
                       {"completion_tokens", u.completion_tokens},
                       {"estimated", u.usage_estimated},
                       {"latency_s", u.latency_s},
                       {"estimated_cost", u.estimated_cost}});
    }
    j["usage"] = usage;
    out << j.dump() << '\n';
  }
}

std::vector<GenerationResult> load_generation_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<GenerationResult> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    GenerationResult r;
    r.target_id = j.at("target_id").get<std::string>();
    for (const auto& n : j.at("negatives")) r.negatives.push_back(n.get<std::string>());
    r.attempts = j.value("attempts", 1);
    if (j.contains("prompts_used")) {
      for (const auto& p : j["prompts_used"]) r.prompts_used.push_back(p.get<std::string>());
    }
    if (j.contains("examples_used")) {
      for (const auto& e : j["examples_used"]) {
        ExampleUse use;
        use.record_id = e.at("record_id").get<std::string>();
        for (const auto& n : e.at("negatives")) use.negatives.push_back(n.get<std::string>());
        r.examples_used.push_back(std::move(use));
      }
    }
    if (j.contains("usage")) {
      for (const auto& u : j["usage"]) {
        CompletionResult c;
        c.request_id = u.value("request_id", "");
        c.prompt_tokens = u.value("prompt_tokens", 0L);
        c.completion_tokens = u.value("completion_tokens", 0L);
        c.usage_estimated = u.value("estimated", false);
        c.latency_s = u.value("latency_s", 0.0);
        c.estimated_cost = u.value("estimated_cost", 0.0);
        r.ledger_slice.push_back(std::move(c));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace advneg
