#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace advneg {

std::string file_digest(const std::filesystem::path& path);

// Reproducibility record: config hash, input/output digests, tool version and
// a usage summary. Re-running with an identical manifest under the mock
// backend reproduces identical outputs.
struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::map<std::string, std::string> input_digests;
  std::map<std::string, std::string> output_digests;
  nlohmann::json ledger_summary;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace advneg
