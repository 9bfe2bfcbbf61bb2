#include "advneg/ablation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "advneg/hash.hpp"

namespace advneg {

using json = nlohmann::json;

namespace {

struct CellPlan {
  std::string name;
  double e_fraction;
  bool reuse;
  std::size_t k;
  InstructionKind instruction;
  std::size_t augmentation;
};

json plan_to_json(const CellPlan& plan) {
  return {{"e_fraction", plan.e_fraction},
          {"reuse", plan.reuse},
          {"k", plan.k},
          {"instruction", instruction_kind_name(plan.instruction)},
          {"augmentation", plan.augmentation}};
}

AblationCell run_cell(const CellPlan& plan, const AblationEnv& env, std::uint64_t seed) {
  AblationCell cell;
  cell.name = plan.name;
  cell.config = plan_to_json(plan);
  cell.seed = derive_seed(seed, "cell:" + plan.name);
  cell.config_hash = digest_hex(cell.config.dump());
  try {
    const Corpus& corpus = *env.corpus;
    std::vector<DialogueRecord> bearing;
    for (const auto& r : corpus.records) {
      if (r.has_adversarial()) bearing.push_back(r);
    }
    std::size_t n_targets = std::min(env.targets_per_cell, bearing.size());
    std::vector<DialogueRecord> targets(bearing.begin(),
                                        bearing.begin() + static_cast<long>(n_targets));
    // augmentation contexts come from the slice after the base targets
    std::size_t aug_available = bearing.size() - n_targets;
    if (plan.augmentation > aug_available) {
      throw Error("cell " + plan.name + ": " + std::to_string(plan.augmentation) +
                  " augmentation contexts requested, " + std::to_string(aug_available) +
                  " available");
    }

    ExampleSet examples =
        subsample_example_set(corpus.records, plan.e_fraction, cell.seed, plan.reuse);
    cell.example_set_size_before = examples.size();

    GeneratorOptions options = env.base_options;
    options.instruction = plan.instruction;
    options.k = plan.instruction == InstructionKind::imp ? 0 : plan.k;
    options.seed = cell.seed;

    CompletionClient client(*env.backend, env.gen_config);
    auto batch = generate_for_records(targets, examples, options, client);
    cell.example_set_size_after = examples.size();
    cell.targets_processed = batch.results.size();
    if (batch.results.empty()) {
      throw Error("cell " + plan.name + ": no target generated cleanly");
    }

    std::unordered_map<std::string, std::vector<std::string>> generated;
    for (const auto& r : batch.results) generated[r.target_id] = r.negatives;

    if (plan.augmentation > 0) {
      std::vector<DialogueRecord> extra(
          bearing.begin() + static_cast<long>(n_targets),
          bearing.begin() + static_cast<long>(n_targets + plan.augmentation));
      auto extra_batch = generate_for_records(extra, examples, options, client);
      for (const auto& r : extra_batch.results) generated[r.target_id] = r.negatives;
    }

    AssembleOptions assemble_options;
    assemble_options.generated = &generated;
    auto train_instances = assemble_training_instances(corpus, NegSource::generated,
                                                       cell.seed, assemble_options);
    cell.train_instances = train_instances.size();

    auto stats = build_text_stats(corpus.response_pool);
    auto model = train(train_instances, env.train_config, corpus, stats);

    auto random_test = assemble_test_instances(corpus, TestKind::random, cell.seed);
    auto adv_test = assemble_test_instances(corpus, TestKind::adversarial, cell.seed);
    cell.r1_random = evaluate(model, random_test, corpus, stats).r_at_1;
    cell.r1_adversarial = evaluate(model, adv_test, corpus, stats).r_at_1;
    cell.r1_mean = (cell.r1_random + cell.r1_adversarial) / 2.0;
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  return cell;
}

std::string fraction_label(double f) {
  char buf[32];
  if (f == static_cast<long>(f)) {
    std::snprintf(buf, sizeof(buf), "%ld", static_cast<long>(f));
  } else {
    std::snprintf(buf, sizeof(buf), "%g", f);
  }
  return buf;
}

}  // namespace

AblationResult run_ablation(const AblationAxes& axes, const AblationEnv& env,
                            std::uint64_t seed) {
  if (env.corpus == nullptr || env.backend == nullptr) {
    throw Error("ablation: corpus and backend are required");
  }
  std::vector<CellPlan> plans;
  CellPlan base;
  base.e_fraction = env.base_e_fraction;
  base.reuse = false;
  base.k = env.base_options.k;
  base.instruction = env.base_options.instruction;
  base.augmentation = 0;

  if (axes.include_reuse && !axes.e_fractions.empty()) {
    double smallest = *std::min_element(axes.e_fractions.begin(), axes.e_fractions.end());
    CellPlan p = base;
    p.e_fraction = smallest;
    p.reuse = true;
    p.name = "examples=" + fraction_label(smallest) + "%+reuse";
    plans.push_back(p);
  }
  for (double f : axes.e_fractions) {
    CellPlan p = base;
    p.e_fraction = f;
    p.name = "examples=" + fraction_label(f) + "%";
    plans.push_back(p);
  }
  for (std::size_t k : axes.ks) {
    CellPlan p = base;
    p.k = k;
    p.name = "k=" + std::to_string(k);
    plans.push_back(p);
  }
  for (InstructionKind kind : axes.instructions) {
    CellPlan p = base;
    p.instruction = kind;
    if (kind == InstructionKind::imp) p.k = 0;
    p.name = "instruction=" + instruction_kind_name(kind);
    plans.push_back(p);
  }
  for (std::size_t aug : axes.augmentation_sizes) {
    CellPlan p = base;
    p.augmentation = aug;
    p.name = "augmentation=+" + std::to_string(aug);
    plans.push_back(p);
  }
  if (plans.empty()) throw Error("ablation: no axes requested");

  AblationResult result;
  for (const auto& plan : plans) {
    result.cells.push_back(run_cell(plan, env, seed));
  }
  return result;
}

json AblationResult::to_json() const {
  json cells_json = json::array();
  for (const auto& c : cells) {
    json j = {{"name", c.name},
              {"config", c.config},
              {"config_hash", c.config_hash},
              {"seed", c.seed},
              {"failed", c.failed}};
    if (c.failed) {
      j["error"] = c.error;
    } else {
      j["r1_random"] = c.r1_random;
      j["r1_adversarial"] = c.r1_adversarial;
      j["r1_mean"] = c.r1_mean;
      j["example_set_size_before"] = c.example_set_size_before;
      j["example_set_size_after"] = c.example_set_size_after;
      j["targets_processed"] = c.targets_processed;
      j["train_instances"] = c.train_instances;
    }
    cells_json.push_back(std::move(j));
  }
  return {{"cells", cells_json}};
}

std::string ablation_table(const AblationResult& result) {
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%-26s %-8s %-8s %-8s\n", "Cell", "Random", "Adv",
                "Mean");
  out << buf;
  for (const auto& c : result.cells) {
    if (c.failed) {
      std::snprintf(buf, sizeof(buf), "%-26s FAILED: %s\n", c.name.c_str(),
                    c.error.c_str());
    } else {
      std::snprintf(buf, sizeof(buf), "%-26s %-8.3f %-8.3f %-8.3f\n", c.name.c_str(),
                    c.r1_random, c.r1_adversarial, c.r1_mean);
    }
    out << buf;
  }
  return out.str();
}

}  // namespace advneg
