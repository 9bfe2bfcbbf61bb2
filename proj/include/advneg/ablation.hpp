#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advneg/assemble.hpp"
#include "advneg/eval.hpp"
#include "advneg/generator.hpp"
#include "advneg/llm_client.hpp"

namespace advneg {

// Which studies to run. Each axis varies one knob from the base configuration
// (the grids are unions, not a cartesian product).
struct AblationAxes {
  std::vector<double> e_fractions;        // percent of the example pool
  bool include_reuse = false;             // adds the smallest-fraction +reuse cell
  std::vector<std::size_t> ks;            // number of in-context examples
  std::vector<InstructionKind> instructions;  // imp runs zero-shot
  std::vector<std::size_t> augmentation_sizes;  // extra generated instances
};

struct AblationCell {
  std::string name;
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double r1_random = 0.0;
  double r1_adversarial = 0.0;
  double r1_mean = 0.0;
  std::size_t example_set_size_before = 0;
  std::size_t example_set_size_after = 0;
  std::size_t targets_processed = 0;
  std::size_t train_instances = 0;
};

struct AblationResult {
  std::vector<AblationCell> cells;
  nlohmann::json to_json() const;
};

struct AblationEnv {
  const Corpus* corpus = nullptr;       // example pool + targets + tests
  CompletionBackend* backend = nullptr;
  GenerationConfig gen_config;
  GeneratorOptions base_options;        // instruction/k defaults for non-varied axes
  TrainConfig train_config;
  std::size_t targets_per_cell = 40;
  double base_e_fraction = 100.0;
};

// Per cell: generate negatives under the cell's configuration, assemble the
// 11-wide training set and both 6-wide test sets, train, evaluate, record.
// Cell failures are recorded and the grid continues.
AblationResult run_ablation(const AblationAxes& axes, const AblationEnv& env,
                            std::uint64_t seed);

// Aligned text table: one row per cell with R@1 random / adversarial / mean.
std::string ablation_table(const AblationResult& result);

}  // namespace advneg
