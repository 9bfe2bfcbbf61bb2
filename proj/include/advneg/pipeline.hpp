#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "advneg/ablation.hpp"
#include "advneg/manifest.hpp"

namespace advneg {

struct PipelineOptions {
  std::filesystem::path outdir;
  std::uint64_t seed = 0;
  std::size_t max_records = 0;  // 0 = all adversarial-bearing records
  double e_fraction = 100.0;
  bool reuse = false;
  InstructionKind instruction = InstructionKind::dir;
  std::size_t k = 2;
  int attempt_cap = 5;
  std::size_t workers = 1;
  GenerationConfig gen_config;
  TrainConfig train_config;
};

struct PipelineSummary {
  double train_r1 = 0.0;
  double r1_random = 0.0;
  double mrr_random = 0.0;
  double r1_adversarial = 0.0;
  double mrr_adversarial = 0.0;
  std::size_t generated = 0;
  std::size_t skipped = 0;
  RunManifest manifest;
};

// generate -> assemble (11-wide train, 6-wide tests) -> train -> eval ->
// reports, everything written under options.outdir with a single manifest.
PipelineSummary run_pipeline(const Corpus& corpus, CompletionBackend& backend,
                             const PipelineOptions& options);

}  // namespace advneg
