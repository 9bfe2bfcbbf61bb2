#include "advneg/manifest.hpp"

#include <fstream>
#include <sstream>

#include "advneg/errors.hpp"
#include "advneg/hash.hpp"
#include "advneg/version.hpp"

namespace advneg {

using json = nlohmann::json;

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for digest: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return digest_hex(buf.str());
}

void RunManifest::add_input(const std::filesystem::path& path) {
  input_digests[path.string()] = file_digest(path);
}

void RunManifest::add_output(const std::filesystem::path& path) {
  output_digests[path.string()] = file_digest(path);
}

json RunManifest::to_json() const {
  return {{"subcommand", subcommand},
          {"tool_version", kToolVersion},
          {"config_hash", config_hash},
          {"inputs", input_digests},
          {"outputs", output_digests},
          {"ledger", ledger_summary}};
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path.string());
  out << to_json().dump(2) << '\n';
}

}  // namespace advneg
