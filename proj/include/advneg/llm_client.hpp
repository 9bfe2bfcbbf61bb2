#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "advneg/prompt.hpp"

namespace advneg {

struct GenerationConfig {
  double temperature = 0.8;
  double frequency_penalty = 0.4;
  double presence_penalty = 0.4;
  int max_tokens = 256;
  std::string model_name;
  int max_retries = 3;
  double request_timeout_s = 30.0;
  double retry_backoff_s = 0.25;
  double price_per_1k_tokens = 0.05;  // illustrative default

  // Returns every violation, not just the first.
  std::vector<std::string> validate() const;
};

struct CompletionResult {
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  bool usage_estimated = false;  // true when counts are whitespace estimates
  double latency_s = 0.0;
  double estimated_cost = 0.0;
  std::string request_id;

  long total_tokens() const { return prompt_tokens + completion_tokens; }
};

struct UsageLedger {
  std::vector<CompletionResult> records;

  std::size_t size() const { return records.size(); }
  long total_tokens() const;
  double mean_tokens() const;
  double mean_latency() const;
  double total_cost() const;
};

// total tokens / 1000 * price; the per-record mean is reported alongside.
struct CostEstimate {
  double total = 0.0;
  double per_record = 0.0;
};
CostEstimate estimate_cost(const UsageLedger& ledger, double price_per_1k_tokens);

struct BackendReply {
  std::string text;
  std::optional<long> prompt_tokens;
  std::optional<long> completion_tokens;
  double latency_s = 0.0;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string name() const = 0;
  virtual BackendReply complete(const std::string& prompt, const GenerationConfig& config) = 0;
};

// POSTs {model, prompt, max_tokens, temperature, frequency_penalty,
// presence_penalty} to any completions endpoint of the usual JSON shape and
// reads choices[0].text plus the usage block. The API key comes from the
// environment and is never persisted.
class HttpBackend : public CompletionBackend {
 public:
  HttpBackend(std::string endpoint_url, std::string api_key);
  std::string name() const override { return "http"; }
  BackendReply complete(const std::string& prompt, const GenerationConfig& config) override;

 private:
  std::string endpoint_url_;
  std::string api_key_;
};

// Fixture-backed mock: completions looked up by the fnv1a64 hex of the prompt
// bytes. File schema: {"<hash>": "<completion>", ...}.
class CannedBackend : public CompletionBackend {
 public:
  explicit CannedBackend(const std::filesystem::path& fixture);
  std::string name() const override { return "canned"; }
  BackendReply complete(const std::string& prompt, const GenerationConfig& config) override;

 private:
  std::unordered_map<std::string, std::string> table_;
};

// Offline generator: a pure function of (prompt bytes, seed). Recombines
// content words of the prompt's final context block with stock sentence
// frames, so every emitted line shares at least one keyword with the target
// context while staying incoherent as a reply.
class SyntheticBackend : public CompletionBackend {
 public:
  explicit SyntheticBackend(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "synthetic"; }
  BackendReply complete(const std::string& prompt, const GenerationConfig& config) override;

 private:
  std::uint64_t seed_;
};

// Retry wrapper plus usage accounting. Transport failures back off
// exponentially for up to max_retries total attempts; auth failures are
// terminal immediately. Thread-safe: the ledger is appended under a mutex.
class CompletionClient {
 public:
  CompletionClient(CompletionBackend& backend, GenerationConfig config);

  CompletionResult complete(const RenderedPrompt& prompt);
  CompletionResult complete_text(const std::string& prompt_text);

  const GenerationConfig& config() const { return config_; }
  UsageLedger ledger_snapshot() const;

 private:
  CompletionBackend& backend_;
  GenerationConfig config_;
  mutable std::mutex mu_;
  UsageLedger ledger_;
};

long estimate_token_count(const std::string& text);

}  // namespace advneg
