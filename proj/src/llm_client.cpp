#include "advneg/llm_client.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "advneg/errors.hpp"
#include "advneg/hash.hpp"
#include "advneg/rng.hpp"
#include "advneg/text.hpp"

// keep last: its transitive system headers leak macros that break Eigen
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace advneg {

using json = nlohmann::json;

std::vector<std::string> GenerationConfig::validate() const {
  std::vector<std::string> v;
  if (temperature < 0.0 || temperature > 2.0) v.push_back("temperature must be in [0, 2]");
  if (frequency_penalty < -2.0 || frequency_penalty > 2.0) {
    v.push_back("frequency_penalty must be in [-2, 2]");
  }
  if (presence_penalty < -2.0 || presence_penalty > 2.0) {
    v.push_back("presence_penalty must be in [-2, 2]");
  }
  if (max_tokens < 1) v.push_back("max_tokens must be >= 1");
  if (max_retries < 1) v.push_back("max_retries must be >= 1");
  if (request_timeout_s <= 0.0) v.push_back("request_timeout must be > 0");
  return v;
}

long UsageLedger::total_tokens() const {
  long t = 0;
  for (const auto& r : records) t += r.total_tokens();
  return t;
}

double UsageLedger::mean_tokens() const {
  if (records.empty()) return 0.0;
  return static_cast<double>(total_tokens()) / static_cast<double>(records.size());
}

double UsageLedger::mean_latency() const {
  if (records.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : records) s += r.latency_s;
  return s / static_cast<double>(records.size());
}

double UsageLedger::total_cost() const {
  double s = 0.0;
  for (const auto& r : records) s += r.estimated_cost;
  return s;
}

CostEstimate estimate_cost(const UsageLedger& ledger, double price_per_1k_tokens) {
  CostEstimate out;
  if (ledger.records.empty()) return out;  // zero with warning at call sites
  out.total = static_cast<double>(ledger.total_tokens()) / 1000.0 * price_per_1k_tokens;
  out.per_record = out.total / static_cast<double>(ledger.records.size());
  return out;
}

long estimate_token_count(const std::string& text) {
  long n = 0;
  bool in_token = false;
  for (char c : text) {
    bool ws = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!ws && !in_token) ++n;
    in_token = !ws;
  }
  return n;
}

// ---- HTTP backend ----------------------------------------------------------

namespace {

struct ParsedUrl {
  bool https = false;
  std::string host_port;
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  std::string rest;
  if (url.rfind("https://", 0) == 0) {
    out.https = true;
    rest = url.substr(8);
  } else if (url.rfind("http://", 0) == 0) {
    rest = url.substr(7);
  } else {
    throw Error("endpoint URL must start with http:// or https://");
  }
  auto slash = rest.find('/');
  out.host_port = slash == std::string::npos ? rest : rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/v1/completions" : rest.substr(slash);
  return out;
}

}  // namespace

HttpBackend::HttpBackend(std::string endpoint_url, std::string api_key)
    : endpoint_url_(std::move(endpoint_url)), api_key_(std::move(api_key)) {}

BackendReply HttpBackend::complete(const std::string& prompt,
                                   const GenerationConfig& config) {
  ParsedUrl url = parse_url(endpoint_url_);
  json payload = {{"model", config.model_name},
                  {"prompt", prompt},
                  {"max_tokens", config.max_tokens},
                  {"temperature", config.temperature},
                  {"frequency_penalty", config.frequency_penalty},
                  {"presence_penalty", config.presence_penalty}};
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto started = std::chrono::steady_clock::now();
  httplib::Result res;
  std::string scheme = url.https ? "https://" : "http://";
  httplib::Client cli(scheme + url.host_port);
  cli.set_connection_timeout(static_cast<int>(config.request_timeout_s), 0);
  cli.set_read_timeout(static_cast<int>(config.request_timeout_s), 0);
  res = cli.Post(url.path, headers, payload.dump(), "application/json");
  double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (!res) {
    throw TransportError("transport failure: " + httplib::to_string(res.error()));
  }
  if (res->status == 401 || res->status == 403) {
    throw AuthError("authentication failed (HTTP " + std::to_string(res->status) + ")");
  }
  if (res->status >= 500) {
    throw TransportError("server error (HTTP " + std::to_string(res->status) + ")");
  }
  if (res->status != 200) {
    throw Error("request rejected (HTTP " + std::to_string(res->status) + "): " + res->body);
  }
  json body = json::parse(res->body);
  if (!body.contains("choices") || body["choices"].empty()) {
    throw Error("malformed completion response: missing choices");
  }
  BackendReply reply;
  reply.text = body["choices"][0].value("text", "");
  reply.latency_s = latency;
  if (body.contains("usage")) {
    const auto& u = body["usage"];
    if (u.contains("prompt_tokens")) reply.prompt_tokens = u["prompt_tokens"].get<long>();
    if (u.contains("completion_tokens")) {
      reply.completion_tokens = u["completion_tokens"].get<long>();
    }
  }
  return reply;
}

// ---- Canned backend --------------------------------------------------------

CannedBackend::CannedBackend(const std::filesystem::path& fixture) {
  std::ifstream in(fixture);
  if (!in) throw Error("cannot open canned fixture: " + fixture.string());
  json j = json::parse(in);
  for (const auto& [hash, text] : j.items()) {
    table_[hash] = text.get<std::string>();
  }
}

BackendReply CannedBackend::complete(const std::string& prompt,
                                     const GenerationConfig& config) {
  (void)config;
  auto it = table_.find(digest_hex(prompt));
  if (it == table_.end()) {
    throw Error("canned backend: no fixture entry for prompt hash " + digest_hex(prompt));
  }
  return {it->second, std::nullopt, std::nullopt, 0.0};
}

// ---- Synthetic backend -----------------------------------------------------

namespace {

// Last delimited context block of the prompt, utterance texts only.
std::vector<std::string> extract_target_context(const std::string& prompt) {
  std::vector<std::string> lines;
  std::istringstream in(prompt);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  std::size_t last_ctx = std::string::npos;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] == "Dialogue context:") last_ctx = i;
  }
  std::vector<std::string> turns;
  if (last_ctx == std::string::npos) {
    // free-form prompt: treat every line as context
    return lines;
  }
  // lines[last_ctx+1] is the opening delimiter; read until the closing one
  for (std::size_t i = last_ctx + 2; i < lines.size(); ++i) {
    if (lines[i] == lines[last_ctx + 1]) break;
    std::string t = lines[i];
    if (t.size() > 3 && (t[0] == 'A' || t[0] == 'B') && t[1] == ':' && t[2] == ' ') {
      t = t.substr(3);
    }
    turns.push_back(t);
  }
  return turns;
}

const std::vector<std::string>& sentence_frames() {
  static const std::vector<std::string> kFrames = {
      "I bought a new {1} from the store near the {2} yesterday.",
      "My cousin keeps talking about the {1} all day long.",
      "The {1} in our neighborhood was closed because of the {2}.",
      "Did you hear the news about the {1} festival downtown?",
      "I plan to study the history of the {1} next semester.",
      "Someone left a {1} on the bus and never came back for it.",
      "The documentary about the {1} and the {2} was three hours long.",
      "My grandmother collects old pictures of every {1} she has seen.",
      "They are painting the {1} a strange shade of green this week.",
      "A stray cat has been sleeping next to our {1} since the {2} ended.",
  };
  return kFrames;
}

std::string fill_frame(const std::string& frame, const std::string& kw1,
                       const std::string& kw2) {
  std::string out;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame[i] == '{' && i + 2 < frame.size() && frame[i + 2] == '}') {
      out += frame[i + 1] == '1' ? kw1 : kw2;
      i += 2;
    } else {
      out += frame[i];
    }
  }
  return out;
}

}  // namespace

BackendReply SyntheticBackend::complete(const std::string& prompt,
                                        const GenerationConfig& config) {
  (void)config;
  auto turns = extract_target_context(prompt);
  std::string joined;
  for (const auto& t : turns) {
    joined += t;
    joined += ' ';
  }
  auto keywords = content_tokens(tokenize(joined));
  std::sort(keywords.begin(), keywords.end());
  keywords.erase(std::unique(keywords.begin(), keywords.end()), keywords.end());
  if (keywords.empty()) keywords.push_back("conversation");

  SeededRng rng(fnv1a64(prompt) ^ seed_);
  const auto& frames = sentence_frames();
  std::vector<std::string> out_lines;
  std::vector<std::size_t> frame_order(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) frame_order[i] = i;
  rng.shuffle(frame_order);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& kw1 = keywords[rng.uniform_below(keywords.size())];
    const auto& kw2 = keywords[rng.uniform_below(keywords.size())];
    out_lines.push_back(fill_frame(frames[frame_order[i]], kw1, kw2));
  }
  // Continuation of the "1." stub: first line bare, the rest renumbered.
  std::string text = out_lines[0];
  for (std::size_t i = 1; i < 5; ++i) {
    text += '\n';
    text += std::to_string(i + 1);
    text += ". ";
    text += out_lines[i];
  }
  return {text, std::nullopt, std::nullopt, 0.0};
}

// ---- Client ----------------------------------------------------------------

CompletionClient::CompletionClient(CompletionBackend& backend, GenerationConfig config)
    : backend_(backend), config_(std::move(config)) {
  auto violations = config_.validate();
  if (!violations.empty()) {
    std::string msg = "invalid generation config:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw Error(msg);
  }
}

CompletionResult CompletionClient::complete(const RenderedPrompt& prompt) {
  return complete_text(prompt.text);
}

CompletionResult CompletionClient::complete_text(const std::string& prompt_text) {
  // Content-derived so ids stay stable under concurrent issue order.
  std::string request_id =
      "req-" + to_hex(fnv1a64(prompt_text, fnv1a64(backend_.name())));
  BackendReply reply;
  int attempt = 0;
  for (;;) {
    ++attempt;
    try {
      reply = backend_.complete(prompt_text, config_);
      break;
    } catch (const TransportError& e) {
      if (attempt >= config_.max_retries) {
        throw TransportError(std::string(e.what()) + " after " + std::to_string(attempt) +
                             " attempts [" + request_id + "]");
      }
      double backoff = config_.retry_backoff_s * std::pow(2.0, attempt - 1);
      if (backoff > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      }
    } catch (const AuthError& e) {
      throw AuthError(std::string(e.what()) + " [" + request_id + "]");
    }
  }
  CompletionResult result;
  result.text = reply.text;
  result.latency_s = reply.latency_s;
  result.request_id = request_id;
  if (reply.prompt_tokens && reply.completion_tokens) {
    result.prompt_tokens = *reply.prompt_tokens;
    result.completion_tokens = *reply.completion_tokens;
  } else {
    result.prompt_tokens = estimate_token_count(prompt_text);
    result.completion_tokens = estimate_token_count(reply.text);
    result.usage_estimated = true;
  }
  result.estimated_cost =
      static_cast<double>(result.total_tokens()) / 1000.0 * config_.price_per_1k_tokens;
  {
    std::lock_guard<std::mutex> lock(mu_);
    ledger_.records.push_back(result);
  }
  return result;
}

UsageLedger CompletionClient::ledger_snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return ledger_;
}

}  // namespace advneg
