#include "advneg/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include "advneg/hash.hpp"

namespace advneg {

using json = nlohmann::json;

PipelineSummary run_pipeline(const Corpus& corpus, CompletionBackend& backend,
                             const PipelineOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(options.outdir);

  std::vector<DialogueRecord> targets;
  for (const auto& r : corpus.records) {
    if (r.has_adversarial()) targets.push_back(r);
    if (options.max_records > 0 && targets.size() >= options.max_records) break;
  }
  if (targets.empty()) throw Error("pipeline: no adversarial-bearing records");

  ExampleSet examples = subsample_example_set(corpus.records, options.e_fraction,
                                              options.seed, options.reuse);

  GeneratorOptions gen_options;
  gen_options.instruction = options.instruction;
  gen_options.k = options.instruction == InstructionKind::imp ? 0 : options.k;
  gen_options.attempt_cap = options.attempt_cap;
  gen_options.seed = options.seed;
  gen_options.workers = options.workers;

  CompletionClient client(backend, options.gen_config);
  auto batch = generate_for_records(targets, examples, gen_options, client);
  if (batch.results.empty()) throw Error("pipeline: no record generated cleanly");

  PipelineSummary summary;
  summary.generated = batch.results.size();
  summary.skipped = batch.failures.size();

  auto negatives_path = options.outdir / "negatives.jsonl";
  save_generation_jsonl(batch.results, negatives_path);

  std::unordered_map<std::string, std::vector<std::string>> generated;
  for (const auto& r : batch.results) generated[r.target_id] = r.negatives;

  AssembleOptions assemble_options;
  assemble_options.generated = &generated;
  auto train_instances = assemble_training_instances(corpus, NegSource::generated,
                                                     options.seed, assemble_options);
  auto test_random = assemble_test_instances(corpus, TestKind::random, options.seed);
  auto test_adv = assemble_test_instances(corpus, TestKind::adversarial, options.seed);

  auto train_path = options.outdir / "train_instances.jsonl";
  auto test_random_path = options.outdir / "test_random.jsonl";
  auto test_adv_path = options.outdir / "test_adversarial.jsonl";
  save_instances_jsonl(train_instances, train_path);
  save_instances_jsonl(test_random, test_random_path);
  save_instances_jsonl(test_adv, test_adv_path);

  auto stats = build_text_stats(corpus.response_pool);
  auto model = train(train_instances, options.train_config, corpus, stats);
  auto model_path = options.outdir / "model.json";
  save_model(model, model_path);

  summary.train_r1 = evaluate(model, train_instances, corpus, stats).r_at_1;
  auto eval_random = evaluate(model, test_random, corpus, stats);
  auto eval_adv = evaluate(model, test_adv, corpus, stats);
  summary.r1_random = eval_random.r_at_1;
  summary.mrr_random = eval_random.mrr;
  summary.r1_adversarial = eval_adv.r_at_1;
  summary.mrr_adversarial = eval_adv.mrr;

  // quality report over the response types this run produced
  auto provider = EmbeddingProvider::tfidf(corpus.response_pool);
  std::vector<TypedResponses> typed(4);
  typed[0].type = "positive";
  typed[1].type = "random";
  typed[2].type = "human";
  typed[3].type = "generated";
  for (const auto& inst : test_random) {
    for (std::size_t i = 0; i < inst.candidates.size(); ++i) {
      auto& bucket = inst.labels[i] == Label::positive ? typed[0] : typed[1];
      bucket.items.emplace_back(inst.context_id, inst.candidates[i]);
    }
  }
  for (const auto& r : batch.results) {
    const DialogueRecord* record = corpus.find(r.target_id);
    if (record != nullptr && record->has_adversarial()) {
      for (std::size_t i = 0; i < 5; ++i) {
        typed[2].items.emplace_back(r.target_id, record->adversarial_negatives[i]);
      }
    }
    for (const auto& n : r.negatives) typed[3].items.emplace_back(r.target_id, n);
  }
  auto quality = quality_report(model, provider, typed, corpus, stats);

  json report;
  report["train"] = {{"r_at_1", summary.train_r1},
                     {"instances", train_instances.size()}};
  report["test_random"] = {{"r_at_1", eval_random.r_at_1}, {"mrr", eval_random.mrr}};
  report["test_adversarial"] = {{"r_at_1", eval_adv.r_at_1}, {"mrr", eval_adv.mrr}};
  json quality_json;
  for (const auto& [type, s] : quality.pred_score) {
    quality_json[type] = {{"pred_mean", s.mean},
                          {"pred_std", s.stddev},
                          {"sim_mean", quality.similarity.at(type).mean},
                          {"sim_std", quality.similarity.at(type).stddev}};
  }
  report["quality"] = quality_json;
  report["generated"] = summary.generated;
  report["skipped_records"] = summary.skipped;

  auto report_path = options.outdir / "report.json";
  {
    std::ofstream out(report_path);
    if (!out) throw Error("cannot write " + report_path.string());
    out << report.dump(2) << '\n';
  }
  auto table_path = options.outdir / "report.txt";
  {
    std::ofstream out(table_path);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %-8s %-8s %-8s\n", "Test", "R@1", "MRR", "");
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-12s %-8.3f %-8.3f\n", "random",
                  eval_random.r_at_1, eval_random.mrr);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-12s %-8.3f %-8.3f\n", "adversarial",
                  eval_adv.r_at_1, eval_adv.mrr);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-12s %-8.3f\n", "mean",
                  (eval_random.r_at_1 + eval_adv.r_at_1) / 2.0);
    out << buf;
    out << '\n' << quality_table(quality);
  }

  // manifest: config hash + every output digest + ledger aggregates
  RunManifest manifest;
  manifest.subcommand = "pipeline";
  json config = {{"seed", options.seed},
                 {"max_records", options.max_records},
                 {"e_fraction", options.e_fraction},
                 {"reuse", options.reuse},
                 {"instruction", instruction_kind_name(options.instruction)},
                 {"k", options.k},
                 {"attempt_cap", options.attempt_cap},
                 {"workers", options.workers},
                 {"temperature", options.gen_config.temperature},
                 {"frequency_penalty", options.gen_config.frequency_penalty},
                 {"presence_penalty", options.gen_config.presence_penalty},
                 {"max_tokens", options.gen_config.max_tokens},
                 {"model_name", options.gen_config.model_name},
                 {"learning_rate", options.train_config.learning_rate},
                 {"max_steps", options.train_config.max_steps}};
  manifest.config_hash = digest_hex(config.dump());
  auto ledger = client.ledger_snapshot();
  json skipped = json::array();
  for (const auto& f : batch.failures) skipped.push_back(f.target_id);
  manifest.ledger_summary = {{"requests", ledger.size()},
                             {"total_tokens", ledger.total_tokens()},
                             {"mean_tokens", ledger.mean_tokens()},
                             {"mean_latency_s", ledger.mean_latency()},
                             {"total_cost", ledger.total_cost()},
                             {"skipped_records", skipped}};
  for (const auto& p : {negatives_path, train_path, test_random_path, test_adv_path,
                        model_path, report_path, table_path}) {
    manifest.add_output(p);
  }
  manifest.write(options.outdir / "manifest.json");
  summary.manifest = manifest;
  return summary;
}

}  // namespace advneg
