#include "advneg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "advneg/errors.hpp"
#include "advneg/hash.hpp"
#include "advneg/negatives.hpp"
#include "advneg/rng.hpp"

namespace advneg {

using json = nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> string_list(const json& j, const std::string& key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}

// First key present wins; public releases of the two datasets differ in
// field naming.
std::vector<std::string> string_list_any(const json& j,
                                         std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (j.contains(k)) return string_list(j, k);
  }
  return {};
}

void validate_record(DialogueRecord& r, std::size_t index) {
  if (r.context.empty()) {
    throw Error("record " + std::to_string(index) + " (" + r.id + "): empty context");
  }
  for (auto& u : r.context) {
    u.text = trim(u.text);
    if (u.text.empty()) {
      throw Error("record " + std::to_string(index) + " (" + r.id + "): empty utterance");
    }
  }
  for (std::size_t i = 1; i < r.context.size(); ++i) {
    if (r.context[i].speaker == r.context[i - 1].speaker) {
      throw Error("record " + std::to_string(index) + " (" + r.id +
                  "): speakers do not alternate");
    }
  }
  if (r.positives.empty()) {
    throw Error("record " + std::to_string(index) + " (" + r.id + "): no positive response");
  }
}

DialogueRecord record_from_public_json(const json& j, Source source, Split split,
                                       std::size_t index) {
  DialogueRecord r;
  r.source = source;
  if (j.contains("id")) {
    r.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                  : std::to_string(j.at("id").get<long long>());
  } else {
    r.id = split_name(split) + "-" + std::to_string(index);
  }
  auto context = string_list_any(j, {"context", "history", "dialogue"});
  if (context.empty()) {
    throw Error("record " + std::to_string(index) + ": missing context");
  }
  Speaker sp = Speaker::A;
  for (const auto& turn : context) {
    r.context.push_back({sp, turn});
    sp = other_speaker(sp);
  }
  r.persona = string_list_any(j, {"persona", "personality"});
  r.positives = string_list_any(j, {"positive_responses", "positives", "responses"});
  r.adversarial_negatives = string_list_any(
      j, {"adversarial_negative_responses", "adv_negative_responses",
          "adversarial_negatives"});
  validate_record(r, index);
  return r;
}

std::vector<json> parse_json_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  std::string content = buf.str();
  // Accept either a top-level array or one JSON object per line.
  std::size_t first = content.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw Error("empty corpus: " + path.string());
  std::vector<json> out;
  if (content[first] == '[') {
    json root = json::parse(content);
    for (auto& item : root) out.push_back(std::move(item));
  } else {
    std::istringstream lines(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      try {
        out.push_back(json::parse(line));
      } catch (const json::exception& e) {
        throw Error("parse error at record " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  return out;
}

}  // namespace

std::string source_name(Source s) {
  switch (s) {
    case Source::dailydialogpp: return "dailydialogpp";
    case Source::personachat: return "personachat";
    case Source::synthetic: return "synthetic";
  }
  return "synthetic";
}

Source source_from_name(const std::string& name) {
  if (name == "dailydialogpp") return Source::dailydialogpp;
  if (name == "personachat") return Source::personachat;
  if (name == "synthetic") return Source::synthetic;
  throw Error("unknown source: " + name);
}

std::string split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "validation") return Split::validation;
  if (name == "test") return Split::test;
  throw Error("unknown split: " + name);
}

std::string DialogueRecord::context_text() const {
  std::string out;
  for (const auto& u : context) {
    if (!out.empty()) out += ' ';
    out += u.text;
  }
  return out;
}

Speaker DialogueRecord::last_speaker() const {
  if (context.empty()) throw Error("record " + id + ": empty context");
  return context.back().speaker;
}

const DialogueRecord* Corpus::find(const std::string& id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::size_t Corpus::adversarial_bearing_count() const {
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.has_adversarial()) ++n;
  }
  return n;
}

void Corpus::rebuild_pool() {
  response_pool.clear();
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    for (const auto& p : r.positives) {
      if (seen.insert(p).second) response_pool.push_back(p);
    }
  }
}

CorpusFormat corpus_format_from_name(const std::string& name) {
  if (name == "dailydialogpp_json" || name == "dailydialogpp") {
    return CorpusFormat::dailydialogpp_json;
  }
  if (name == "personachat_json" || name == "personachat") {
    return CorpusFormat::personachat_json;
  }
  if (name == "jsonl_native" || name == "native") return CorpusFormat::jsonl_native;
  throw Error("unknown corpus format: " + name);
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, Split split) {
  if (!std::filesystem::exists(path)) throw Error("no such file: " + path.string());
  Corpus corpus;
  corpus.split = split;
  std::unordered_set<std::string> ids;
  if (format == CorpusFormat::jsonl_native) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      try {
        corpus.records.push_back(record_from_jsonl_line(line));
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw Error("parse error at record " + std::to_string(lineno) + ": " + e.what());
      }
      validate_record(corpus.records.back(), lineno);
    }
  } else {
    Source source = format == CorpusFormat::dailydialogpp_json ? Source::dailydialogpp
                                                               : Source::personachat;
    auto items = parse_json_records(path);
    for (std::size_t i = 0; i < items.size(); ++i) {
      try {
        corpus.records.push_back(record_from_public_json(items[i], source, split, i));
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw Error("parse error at record " + std::to_string(i) + ": " + e.what());
      }
    }
  }
  if (corpus.records.empty()) throw Error("empty corpus: " + path.string());
  for (const auto& r : corpus.records) {
    if (!ids.insert(r.id).second) throw Error("duplicate record id: " + r.id);
  }
  corpus.rebuild_pool();
  return corpus;
}

DialogueRecord flatten_persona(const DialogueRecord& record) {
  if (record.persona.empty()) return record;
  DialogueRecord out = record;
  std::string lead;
  for (const auto& s : record.persona) {
    if (!lead.empty()) lead += ' ';
    lead += trim(s);
  }
  out.context.front().text = lead + ' ' + out.context.front().text;
  out.persona.clear();
  return out;
}

std::vector<std::string> make_personachat_adversarial(
    const DialogueRecord& record, const std::vector<std::string>& pool,
    std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error("make_personachat_adversarial: n must be >= 1");
  if (record.context.empty()) throw Error("record " + record.id + ": empty context");
  SeededRng rng(derive_seed(seed, "pc-adv:" + record.id));
  std::size_t pick = static_cast<std::size_t>(rng.uniform_below(record.context.size()));
  std::vector<std::string> out;
  out.push_back(record.context[pick].text);
  if (n > 1) {
    std::unordered_set<std::string> exclude(record.positives.begin(), record.positives.end());
    exclude.insert(out.front());
    auto fillers = sample_random(pool, exclude, n - 1,
                                 derive_seed(seed, "pc-adv-fill:" + record.id));
    out.insert(out.end(), fillers.begin(), fillers.end());
  }
  return out;
}

std::string label_name(Label l) {
  switch (l) {
    case Label::positive: return "positive";
    case Label::random_neg: return "random_neg";
    case Label::adversarial_neg: return "adversarial_neg";
  }
  return "positive";
}

Label label_from_name(const std::string& name) {
  if (name == "positive") return Label::positive;
  if (name == "random_neg") return Label::random_neg;
  if (name == "adversarial_neg") return Label::adversarial_neg;
  throw Error("unknown label: " + name);
}

std::string record_to_jsonl_line(const DialogueRecord& record) {
  json j;
  j["id"] = record.id;
  j["source"] = source_name(record.source);
  json ctx = json::array();
  for (const auto& u : record.context) {
    ctx.push_back({{"speaker", std::string(1, speaker_letter(u.speaker))},
                   {"text", u.text}});
  }
  j["context"] = ctx;
  if (!record.persona.empty()) j["persona"] = record.persona;
  j["positives"] = record.positives;
  j["adversarial_negatives"] = record.adversarial_negatives;
  return j.dump();
}

DialogueRecord record_from_jsonl_line(const std::string& line) {
  json j = json::parse(line);
  DialogueRecord r;
  r.id = j.at("id").get<std::string>();
  r.source = source_from_name(j.value("source", "synthetic"));
  for (const auto& u : j.at("context")) {
    std::string sp = u.at("speaker").get<std::string>();
    if (sp != "A" && sp != "B") throw Error("bad speaker: " + sp);
    r.context.push_back({sp == "A" ? Speaker::A : Speaker::B,
                         u.at("text").get<std::string>()});
  }
  r.persona = string_list(j, "persona");
  r.positives = string_list(j, "positives");
  r.adversarial_negatives = string_list(j, "adversarial_negatives");
  return r;
}

void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : corpus.records) {
    out << record_to_jsonl_line(r) << '\n';
  }
}

void save_instances_jsonl(const std::vector<CandidateInstance>& instances,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& inst : instances) {
    json j;
    j["context_id"] = inst.context_id;
    j["candidates"] = inst.candidates;
    j["positive_index"] = inst.positive_index;
    json labels = json::array();
    for (Label l : inst.labels) labels.push_back(label_name(l));
    j["labels"] = labels;
    out << j.dump() << '\n';
  }
}

std::vector<CandidateInstance> load_instances_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<CandidateInstance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    CandidateInstance inst;
    inst.context_id = j.at("context_id").get<std::string>();
    inst.candidates = string_list(j, "candidates");
    inst.positive_index = j.at("positive_index").get<int>();
    for (const auto& l : j.at("labels")) {
      inst.labels.push_back(label_from_name(l.get<std::string>()));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace advneg
