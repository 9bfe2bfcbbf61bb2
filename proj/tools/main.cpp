#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "advneg/ablation.hpp"
#include "advneg/assemble.hpp"
#include "advneg/eval.hpp"
#include "advneg/generator.hpp"
#include "advneg/hash.hpp"
#include "advneg/llm_client.hpp"
#include "advneg/manifest.hpp"
#include "advneg/pipeline.hpp"
#include "advneg/synthetic.hpp"
#include "advneg/version.hpp"

using json = nlohmann::json;
using namespace advneg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;  // run finished but records were skipped

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v == nullptr ? fallback : std::string(v);
}

// ${NAME} placeholders in config string values resolve from the environment.
std::string interpolate_env(const std::string& value, std::vector<std::string>& errors) {
  std::string out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
      auto end = value.find('}', i + 2);
      if (end == std::string::npos) {
        errors.push_back("unterminated ${...} in config value: " + value);
        return value;
      }
      std::string name = value.substr(i + 2, end - i - 2);
      const char* v = std::getenv(name.c_str());
      if (v == nullptr) {
        errors.push_back("environment variable not set: " + name);
      } else {
        out += v;
      }
      i = end;
    } else {
      out += value[i];
    }
  }
  return out;
}

// Shared knobs; a JSON config file seeds them, flags override.
struct CommonConfig {
  std::string in_path;
  std::string out_path;
  std::uint64_t seed = 0;
  GenerationConfig gen;
  TrainConfig train;
  bool mock = false;
  std::string mock_fixture;  // canned backend when set
  std::size_t workers = 1;
  std::string endpoint;
  double alpha = 0.07;
  std::string embeddings = "tfidf";

  std::vector<std::string> load_file(const std::string& path) {
    std::vector<std::string> errors;
    std::ifstream f(path);
    if (!f) {
      errors.push_back("cannot open config file: " + path);
      return errors;
    }
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      errors.push_back(std::string("config parse error: ") + e.what());
      return errors;
    }
    auto str = [&](const char* key, std::string& into) {
      if (j.contains(key)) into = interpolate_env(j[key].get<std::string>(), errors);
    };
    str("in", in_path);
    str("out", out_path);
    str("endpoint", endpoint);
    str("model", gen.model_name);
    str("embeddings", embeddings);
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("temperature")) gen.temperature = j["temperature"].get<double>();
    if (j.contains("frequency_penalty")) gen.frequency_penalty = j["frequency_penalty"].get<double>();
    if (j.contains("presence_penalty")) gen.presence_penalty = j["presence_penalty"].get<double>();
    if (j.contains("max_tokens")) gen.max_tokens = j["max_tokens"].get<int>();
    if (j.contains("max_retries")) gen.max_retries = j["max_retries"].get<int>();
    if (j.contains("price_per_1k_tokens")) gen.price_per_1k_tokens = j["price_per_1k_tokens"].get<double>();
    if (j.contains("mock")) mock = j["mock"].get<bool>();
    if (j.contains("workers")) workers = j["workers"].get<std::size_t>();
    if (j.contains("alpha")) alpha = j["alpha"].get<double>();
    if (j.contains("learning_rate")) train.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("max_steps")) train.max_steps = j["max_steps"].get<int>();
    if (j.contains("tolerance")) train.tolerance = j["tolerance"].get<double>();
    return errors;
  }
};

std::unique_ptr<CompletionBackend> make_backend(const CommonConfig& cfg,
                                                std::vector<std::string>& errors) {
  if (!cfg.mock_fixture.empty()) {
    return std::make_unique<CannedBackend>(cfg.mock_fixture);
  }
  if (cfg.mock) {
    return std::make_unique<SyntheticBackend>(cfg.seed);
  }
  std::string key = env_or("ADVNEG_API_KEY", env_or("OPENAI_API_KEY", ""));
  std::string endpoint =
      cfg.endpoint.empty()
          ? env_or("ADVNEG_ENDPOINT", "https://api.openai.com/v1/completions")
          : cfg.endpoint;
  if (key.empty()) {
    errors.push_back(
        "no API key: set ADVNEG_API_KEY or OPENAI_API_KEY, or pass --mock");
  }
  if (cfg.gen.model_name.empty()) {
    errors.push_back("a live endpoint needs --model");
  }
  if (!errors.empty()) return nullptr;
  return std::make_unique<HttpBackend>(endpoint, key);
}

int fail_with(const std::vector<std::string>& errors) {
  std::cerr << "configuration errors:\n";
  for (const auto& e : errors) std::cerr << "  - " << e << '\n';
  return kExitError;
}

void write_manifest(const std::string& subcommand, const json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const json& ledger = json::object()) {
  if (outputs.empty()) return;
  RunManifest manifest;
  manifest.subcommand = subcommand;
  manifest.config_hash = digest_hex(config.dump());
  for (const auto& p : inputs) manifest.add_input(p);
  for (const auto& p : outputs) manifest.add_output(p);
  manifest.ledger_summary = ledger;
  manifest.write(outputs.front() + ".manifest.json");
}

Corpus load_native(const std::string& path) {
  return load_corpus(path, CorpusFormat::jsonl_native);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial negative response generation and response selection toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values")
      ->envname("ADVNEG_CONFIG");

  // Config file values seed the defaults; flags parsed afterwards override
  // them, so the file is pre-scanned before CLI11 runs.
  std::vector<std::string> config_errors;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i] == nullptr ? "" : argv[i];
    if (a == "--config" && i + 1 < argc) {
      config_errors = cfg.load_file(argv[i + 1]);
    } else if (a.rfind("--config=", 0) == 0) {
      config_errors = cfg.load_file(a.substr(9));
    }
  }

  auto add_llm_flags = [&](CLI::App* cmd) {
    cmd->add_option("--model", cfg.gen.model_name, "completion model name");
    cmd->add_option("--temperature", cfg.gen.temperature, "sampling temperature");
    cmd->add_option("--freq-penalty", cfg.gen.frequency_penalty, "frequency penalty");
    cmd->add_option("--pres-penalty", cfg.gen.presence_penalty, "presence penalty");
    cmd->add_option("--max-tokens", cfg.gen.max_tokens, "completion token limit");
    cmd->add_option("--max-retries", cfg.gen.max_retries, "transport attempts per request");
    cmd->add_option("--endpoint", cfg.endpoint, "completions endpoint URL");
    cmd->add_flag("--mock", cfg.mock, "offline synthetic backend");
    cmd->add_option("--mock-fixture", cfg.mock_fixture,
                    "offline canned backend: JSON {prompt-hash: completion}");
    cmd->add_option("--workers", cfg.workers, "parallel in-flight requests");
  };

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "normalize a dataset into native JSONL");
  std::string format_name = "native";
  std::string split_str = "train";
  ingest->add_option("--format", format_name,
                     "dailydialogpp_json | personachat_json | jsonl_native");
  ingest->add_option("--in", cfg.in_path, "input dataset file")->required();
  ingest->add_option("--out", cfg.out_path, "output JSONL path")->required();
  ingest->add_option("--split", split_str, "train | validation | test");

  // ---- assemble ----
  auto* assemble = app.add_subcommand("assemble", "build candidate instances");
  std::string kind_str = "train";
  std::string neg_source_str = "human";
  std::string negatives_path;
  assemble->add_option("--kind", kind_str, "train | random-test | adv-test");
  assemble->add_option("--neg-source", neg_source_str,
                       "human | generated | bm25 | semihard | random");
  assemble->add_option("--negatives", negatives_path,
                       "generated negatives JSONL (for --neg-source generated)");
  assemble->add_option("--in", cfg.in_path, "native corpus JSONL")->required();
  assemble->add_option("--out", cfg.out_path, "output instances JSONL")->required();
  assemble->add_option("--seed", cfg.seed, "shuffle seed");
  assemble->add_option("--alpha", cfg.alpha, "semi-hard margin");

  // ---- prompt render ----
  auto* prompt_cmd = app.add_subcommand("prompt", "prompt utilities");
  auto* render = prompt_cmd->add_subcommand("render", "render one generation prompt");
  std::string instruction_str = "dir";
  std::size_t k = 2;
  std::string target_id;
  render->add_option("--instruction", instruction_str, "dir | pos | imp");
  render->add_option("--k", k, "number of in-context examples (0..2)");
  render->add_option("--seed", cfg.seed, "example draw seed");
  render->add_option("--target-id", target_id, "target record id")->required();
  render->add_option("--in", cfg.in_path, "native corpus JSONL")->required();
  render->add_option("--out", cfg.out_path, "write prompt here instead of stdout");

  // ---- generate ----
  auto* generate = app.add_subcommand("generate", "generate adversarial negatives");
  double e_fraction = 100.0;
  bool reuse = false;
  int attempt_cap = 5;
  std::size_t max_records = 0;
  generate->add_option("--in", cfg.in_path, "native corpus JSONL")->required();
  generate->add_option("--out", cfg.out_path, "output negatives JSONL")->required();
  generate->add_option("--instruction", instruction_str, "dir | pos | imp");
  generate->add_option("--k", k, "number of in-context examples (0..2)");
  generate->add_option("--e-fraction", e_fraction,
                       "example-set size as percent of the pool (0.1, 1, 10, 100)");
  generate->add_flag("--reuse", reuse, "append generated tuples to the example set");
  generate->add_option("--attempt-cap", attempt_cap, "regeneration cap per record");
  generate->add_option("--seed", cfg.seed, "run seed");
  generate->add_option("--max-records", max_records, "limit processed records (0 = all)");
  add_llm_flags(generate);

  // ---- negatives ----
  auto* negatives = app.add_subcommand("negatives", "baseline negative samplers");
  std::string method = "random";
  std::size_t n_negatives = 5;
  negatives->add_option("--method", method, "random | bm25 | semihard | human");
  negatives->add_option("--n", n_negatives, "negatives per record");
  negatives->add_option("--alpha", cfg.alpha, "semi-hard margin");
  negatives->add_option("--embeddings", cfg.embeddings, "tfidf | file:<path>");
  negatives->add_option("--in", cfg.in_path, "native corpus JSONL")->required();
  negatives->add_option("--out", cfg.out_path, "output JSONL")->required();
  negatives->add_option("--seed", cfg.seed, "sampling seed");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "train the listwise ranker");
  std::string train_instances_path;
  train_cmd->add_option("--train-instances", train_instances_path, "instances JSONL")
      ->required();
  train_cmd->add_option("--in", cfg.in_path, "native corpus JSONL")->required();
  train_cmd->add_option("--out", cfg.out_path, "output model JSON")->required();
  train_cmd->add_option("--learning-rate", cfg.train.learning_rate, "initial step size");
  train_cmd->add_option("--max-steps", cfg.train.max_steps, "max descent steps");
  train_cmd->add_option("--tolerance", cfg.train.tolerance, "loss-delta stop threshold");
  train_cmd->add_option("--seed", cfg.seed, "seed recorded in the manifest");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "R@1 / MRR over instances");
  std::string model_path;
  eval_cmd->add_option("--model", model_path, "model JSON")->required();
  eval_cmd->add_option("--instances", train_instances_path, "instances JSONL")->required();
  eval_cmd->add_option("--in", cfg.in_path, "native corpus JSONL")->required();
  eval_cmd->add_option("--out", cfg.out_path, "report JSON (optional)");

  // ---- quality ----
  auto* quality_cmd = app.add_subcommand("quality", "per-type score/similarity stats");
  std::string generated_path;
  quality_cmd->add_option("--model", model_path, "model JSON")->required();
  quality_cmd->add_option("--in", cfg.in_path, "native corpus JSONL")->required();
  quality_cmd->add_option("--generated", generated_path, "generated negatives JSONL");
  quality_cmd->add_option("--embeddings", cfg.embeddings, "tfidf | file:<path>");
  quality_cmd->add_option("--seed", cfg.seed, "sampling seed for the random type");
  quality_cmd->add_option("--out", cfg.out_path, "report JSON (optional)");

  // ---- contamination ----
  auto* contamination_cmd =
      app.add_subcommand("contamination", "example-to-output overlap analysis");
  contamination_cmd->add_option("--generated", generated_path, "generated negatives JSONL")
      ->required();
  contamination_cmd->add_option("--out", cfg.out_path, "report JSON (optional)");

  // ---- ablate ----
  auto* ablate = app.add_subcommand("ablate", "run ablation grids");
  std::string axes_str = "e,k,instruction";
  std::size_t targets_per_cell = 40;
  std::string aug_sizes_str;
  ablate->add_option("--in", cfg.in_path, "native corpus JSONL")->required();
  ablate->add_option("--out", cfg.out_path, "grid result JSON")->required();
  ablate->add_option("--axes", axes_str, "comma list: e, k, instruction, aug");
  ablate->add_option("--targets", targets_per_cell, "targets per cell");
  ablate->add_option("--aug-sizes", aug_sizes_str, "comma list of augmentation sizes");
  ablate->add_option("--seed", cfg.seed, "grid seed");
  add_llm_flags(ablate);

  // ---- pipeline ----
  auto* pipeline_cmd = app.add_subcommand("pipeline", "end-to-end run with manifest");
  std::string outdir = "pipeline_out";
  pipeline_cmd->add_option("--in", cfg.in_path, "native corpus JSONL")->required();
  pipeline_cmd->add_option("--outdir", outdir, "output directory");
  pipeline_cmd->add_option("--seed", cfg.seed, "run seed");
  pipeline_cmd->add_option("--max-records", max_records, "limit records (0 = all)");
  pipeline_cmd->add_option("--instruction", instruction_str, "dir | pos | imp");
  pipeline_cmd->add_option("--k", k, "in-context examples (0..2)");
  pipeline_cmd->add_option("--e-fraction", e_fraction, "example-set percent");
  pipeline_cmd->add_flag("--reuse", reuse, "grow the example set with outputs");
  pipeline_cmd->add_option("--attempt-cap", attempt_cap, "regeneration cap");
  pipeline_cmd->add_option("--learning-rate", cfg.train.learning_rate, "trainer step");
  pipeline_cmd->add_option("--max-steps", cfg.train.max_steps, "trainer steps");
  add_llm_flags(pipeline_cmd);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "write a synthetic demo corpus");
  std::size_t synth_records = 100;
  synth->add_option("--records", synth_records, "number of records");
  synth->add_option("--seed", cfg.seed, "corpus seed");
  synth->add_option("--out", cfg.out_path, "output JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  if (!config_errors.empty()) return fail_with(config_errors);

  try {
    if (*ingest) {
      auto format = corpus_format_from_name(format_name);
      auto split = split_from_name(split_str);
      Corpus corpus = load_corpus(cfg.in_path, format, split);
      if (format == CorpusFormat::personachat_json) {
        for (auto& r : corpus.records) r = flatten_persona(r);
      }
      save_corpus_jsonl(corpus, cfg.out_path);
      std::cout << split_name(corpus.split) << ": " << corpus.records.size()
                << " records, " << corpus.adversarial_bearing_count()
                << " adversarial-bearing, pool " << corpus.response_pool.size() << '\n';
      write_manifest("ingest", {{"format", format_name}, {"split", split_str}},
                     {cfg.in_path}, {cfg.out_path});
      return kExitOk;
    }

    if (*assemble) {
      Corpus corpus = load_native(cfg.in_path);
      std::vector<CandidateInstance> instances;
      if (kind_str == "train") {
        AssembleOptions options;
        options.semihard_alpha = cfg.alpha;
        std::unordered_map<std::string, std::vector<std::string>> generated;
        if (!negatives_path.empty()) {
          for (const auto& r : load_generation_jsonl(negatives_path)) {
            generated[r.target_id] = r.negatives;
          }
          options.generated = &generated;
        }
        instances = assemble_training_instances(
            corpus, neg_source_from_name(neg_source_str), cfg.seed, options);
      } else {
        instances = assemble_test_instances(corpus, test_kind_from_name(kind_str), cfg.seed);
      }
      save_instances_jsonl(instances, cfg.out_path);
      std::cout << instances.size() << " instances of width "
                << (instances.empty() ? 0 : instances.front().width()) << '\n';
      json config = {{"kind", kind_str}, {"neg_source", neg_source_str}, {"seed", cfg.seed}};
      std::vector<std::string> inputs = {cfg.in_path};
      if (!negatives_path.empty()) inputs.push_back(negatives_path);
      write_manifest("assemble", config, inputs, {cfg.out_path});
      return kExitOk;
    }

    if (*render) {
      Corpus corpus = load_native(cfg.in_path);
      const DialogueRecord* target = corpus.find(target_id);
      if (target == nullptr) throw Error("no record with id " + target_id);
      ExampleSet examples = subsample_example_set(corpus.records, 100.0, cfg.seed);
      PromptSpec spec;
      spec.instruction = instruction_kind_from_name(instruction_str);
      spec.examples = select_examples(examples, spec.instruction == InstructionKind::imp ? 0 : k,
                                      target_id, cfg.seed);
      spec.target = *target;
      auto prompt = render_prompt(spec);
      if (cfg.out_path.empty()) {
        std::cout << prompt.text;
        std::cerr << "spec_hash: " << prompt.spec_hash << '\n';
      } else {
        std::ofstream out(cfg.out_path);
        out << prompt.text;
        write_manifest("prompt-render",
                       {{"instruction", instruction_str}, {"k", k}, {"seed", cfg.seed},
                        {"target_id", target_id}},
                       {cfg.in_path}, {cfg.out_path});
      }
      return kExitOk;
    }

    if (*generate) {
      std::vector<std::string> errors = cfg.gen.validate();
      auto backend = make_backend(cfg, errors);
      if (!errors.empty()) return fail_with(errors);
      Corpus corpus = load_native(cfg.in_path);
      ExampleSet examples =
          subsample_example_set(corpus.records, e_fraction, cfg.seed, reuse);
      std::vector<DialogueRecord> targets;
      for (const auto& r : corpus.records) {
        if (r.has_adversarial()) targets.push_back(r);
        if (max_records > 0 && targets.size() >= max_records) break;
      }
      GeneratorOptions options;
      options.instruction = instruction_kind_from_name(instruction_str);
      options.k = options.instruction == InstructionKind::imp ? 0 : k;
      options.attempt_cap = attempt_cap;
      options.seed = cfg.seed;
      options.workers = cfg.workers;
      CompletionClient client(*backend, cfg.gen);
      auto batch = generate_for_records(targets, examples, options, client);
      save_generation_jsonl(batch.results, cfg.out_path);
      auto ledger = client.ledger_snapshot();
      std::cout << batch.results.size() << " records generated, "
                << batch.failures.size() << " skipped; mean tokens "
                << ledger.mean_tokens() << ", total cost " << ledger.total_cost() << '\n';
      for (const auto& f : batch.failures) {
        std::cerr << "skipped " << f.target_id << " after " << f.attempts
                  << " attempts\n";
      }
      json skipped = json::array();
      for (const auto& f : batch.failures) skipped.push_back(f.target_id);
      write_manifest("generate",
                     {{"instruction", instruction_str},
                      {"k", k},
                      {"e_fraction", e_fraction},
                      {"reuse", reuse},
                      {"attempt_cap", attempt_cap},
                      {"seed", cfg.seed}},
                     {cfg.in_path}, {cfg.out_path},
                     {{"requests", ledger.size()},
                      {"total_tokens", ledger.total_tokens()},
                      {"mean_tokens", ledger.mean_tokens()},
                      {"total_cost", ledger.total_cost()},
                      {"skipped_records", skipped}});
      return batch.failures.empty() ? kExitOk : kExitPartial;
    }

    if (*negatives) {
      Corpus corpus = load_native(cfg.in_path);
      std::ofstream out(cfg.out_path);
      if (!out) throw Error("cannot write " + cfg.out_path);
      std::optional<Bm25Index> index;
      std::optional<EmbeddingProvider> provider;
      if (method == "bm25") index = Bm25Index::build(corpus.response_pool);
      if (method == "semihard") {
        provider = cfg.embeddings.rfind("file:", 0) == 0
                       ? EmbeddingProvider::external(cfg.embeddings.substr(5))
                       : EmbeddingProvider::tfidf(corpus.response_pool);
      }
      std::size_t skipped = 0;
      for (const auto& record : corpus.records) {
        std::unordered_set<std::string> exclude(record.positives.begin(),
                                                record.positives.end());
        std::vector<std::string> negs;
        try {
          if (method == "random") {
            negs = sample_random(corpus.response_pool, exclude, n_negatives,
                                 derive_seed(cfg.seed, "neg:" + record.id));
          } else if (method == "bm25") {
            negs = retrieve_bm25(record, *index, corpus.response_pool, n_negatives, exclude);
          } else if (method == "semihard") {
            SemiHardConfig sh{cfg.alpha, n_negatives};
            negs = retrieve_semihard(record.positives.front(), corpus.response_pool,
                                     *provider, sh, exclude);
          } else if (method == "human") {
            if (!record.has_adversarial()) {
              ++skipped;
              continue;
            }
            negs.assign(record.adversarial_negatives.begin(),
                        record.adversarial_negatives.begin() +
                            static_cast<long>(std::min<std::size_t>(
                                n_negatives, record.adversarial_negatives.size())));
          } else {
            throw Error("unknown method: " + method);
          }
        } catch (const Error& e) {
          std::cerr << "skipped " << record.id << ": " << e.what() << '\n';
          ++skipped;
          continue;
        }
        json j = {{"context_id", record.id}, {"method", method}, {"negatives", negs}};
        out << j.dump() << '\n';
      }
      write_manifest("negatives",
                     {{"method", method}, {"n", n_negatives}, {"alpha", cfg.alpha},
                      {"seed", cfg.seed}},
                     {cfg.in_path}, {cfg.out_path});
      return skipped == 0 ? kExitOk : kExitPartial;
    }

    if (*train_cmd) {
      Corpus corpus = load_native(cfg.in_path);
      auto instances = load_instances_jsonl(train_instances_path);
      auto stats = build_text_stats(corpus.response_pool);
      auto model = train(instances, cfg.train, corpus, stats);
      save_model(model, cfg.out_path);
      std::cout << "trained on " << instances.size() << " instances; final loss "
                << (model.trace.empty() ? 0.0 : model.trace.back().loss) << " in "
                << model.trace.size() << " trace steps\n";
      write_manifest("train",
                     {{"learning_rate", cfg.train.learning_rate},
                      {"max_steps", cfg.train.max_steps},
                      {"tolerance", cfg.train.tolerance},
                      {"seed", cfg.seed}},
                     {cfg.in_path, train_instances_path}, {cfg.out_path});
      return kExitOk;
    }

    if (*eval_cmd) {
      Corpus corpus = load_native(cfg.in_path);
      auto instances = load_instances_jsonl(train_instances_path);
      auto stats = build_text_stats(corpus.response_pool);
      auto model = load_model(model_path);
      auto result = evaluate(model, instances, corpus, stats);
      std::cout << "R@1 " << result.r_at_1 << "  MRR " << result.mrr << "  over "
                << result.outcomes.size() << " instances\n";
      if (!cfg.out_path.empty()) {
        json ranks = json::array();
        for (const auto& o : result.outcomes) {
          ranks.push_back({{"context_id", o.context_id}, {"rank", o.rank}});
        }
        json report = {{"r_at_1", result.r_at_1},
                       {"mrr", result.mrr},
                       {"instances", result.outcomes.size()},
                       {"outcomes", ranks}};
        std::ofstream out(cfg.out_path);
        out << report.dump(2) << '\n';
        write_manifest("eval", {{"model", model_path}}, {cfg.in_path, train_instances_path, model_path},
                       {cfg.out_path});
      }
      return kExitOk;
    }

    if (*quality_cmd) {
      Corpus corpus = load_native(cfg.in_path);
      auto stats = build_text_stats(corpus.response_pool);
      auto model = load_model(model_path);
      auto provider = cfg.embeddings.rfind("file:", 0) == 0
                          ? EmbeddingProvider::external(cfg.embeddings.substr(5))
                          : EmbeddingProvider::tfidf(corpus.response_pool);
      std::vector<TypedResponses> typed;
      TypedResponses positives{"positive", {}};
      TypedResponses randoms{"random", {}};
      TypedResponses humans{"human", {}};
      for (const auto& r : corpus.records) {
        positives.items.emplace_back(r.id, r.positives.front());
        auto negs = sample_random(corpus.response_pool,
                                  {r.positives.begin(), r.positives.end()}, 1,
                                  derive_seed(cfg.seed, "quality:" + r.id));
        randoms.items.emplace_back(r.id, negs.front());
        if (r.has_adversarial()) {
          humans.items.emplace_back(r.id, r.adversarial_negatives.front());
        }
      }
      typed.push_back(std::move(positives));
      typed.push_back(std::move(randoms));
      typed.push_back(std::move(humans));
      if (!generated_path.empty()) {
        TypedResponses generated{"generated", {}};
        for (const auto& r : load_generation_jsonl(generated_path)) {
          for (const auto& n : r.negatives) generated.items.emplace_back(r.target_id, n);
        }
        typed.push_back(std::move(generated));
      }
      auto report = quality_report(model, provider, typed, corpus, stats);
      std::cout << quality_table(report);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      if (!cfg.out_path.empty()) {
        json j;
        for (const auto& [type, s] : report.pred_score) {
          j[type] = {{"pred_mean", s.mean},
                     {"pred_std", s.stddev},
                     {"pred_quartiles", {s.q1, s.median, s.q3}},
                     {"sim_mean", report.similarity.at(type).mean},
                     {"sim_std", report.similarity.at(type).stddev},
                     {"n", s.n}};
        }
        std::ofstream out(cfg.out_path);
        out << j.dump(2) << '\n';
        write_manifest("quality", {{"model", model_path}}, {cfg.in_path, model_path},
                       {cfg.out_path});
      }
      return kExitOk;
    }

    if (*contamination_cmd) {
      auto results = load_generation_jsonl(generated_path);
      auto rows = contamination_report(results);
      std::cout << contamination_table(rows);
      if (!cfg.out_path.empty()) {
        json arr = json::array();
        for (const auto& r : rows) {
          json j = {{"k", r.k},
                    {"position", r.position == 0 ? "all" : std::to_string(r.position)},
                    {"jaccard", r.mean_jaccard},
                    {"pairs", r.pairs}};
          if (r.pearson_len) j["pearson"] = *r.pearson_len;
          if (r.spearman_len) j["spearman"] = *r.spearman_len;
          arr.push_back(std::move(j));
        }
        std::ofstream out(cfg.out_path);
        out << arr.dump(2) << '\n';
        write_manifest("contamination", json::object(), {generated_path}, {cfg.out_path});
      }
      return kExitOk;
    }

    if (*ablate) {
      std::vector<std::string> errors = cfg.gen.validate();
      auto backend = make_backend(cfg, errors);
      if (!errors.empty()) return fail_with(errors);
      Corpus corpus = load_native(cfg.in_path);
      AblationAxes axes;
      std::stringstream axes_in(axes_str);
      std::string axis;
      while (std::getline(axes_in, axis, ',')) {
        if (axis == "e") {
          axes.e_fractions = {0.1, 1.0, 10.0, 100.0};
          axes.include_reuse = true;
        } else if (axis == "k") {
          axes.ks = {0, 1, 2};
        } else if (axis == "instruction" || axis == "i") {
          axes.instructions = {InstructionKind::dir, InstructionKind::pos,
                               InstructionKind::imp};
        } else if (axis == "aug") {
          axes.augmentation_sizes = {10, 20};
        } else if (!axis.empty()) {
          throw Error("unknown ablation axis: " + axis);
        }
      }
      if (!aug_sizes_str.empty()) {
        axes.augmentation_sizes.clear();
        std::stringstream sizes_in(aug_sizes_str);
        std::string size;
        while (std::getline(sizes_in, size, ',')) {
          if (!size.empty()) axes.augmentation_sizes.push_back(std::stoul(size));
        }
      }
      AblationEnv env;
      env.corpus = &corpus;
      env.backend = backend.get();
      env.gen_config = cfg.gen;
      env.train_config = cfg.train;
      env.targets_per_cell = targets_per_cell;
      auto result = run_ablation(axes, env, cfg.seed);
      std::cout << ablation_table(result);
      {
        std::ofstream out(cfg.out_path);
        if (!out) throw Error("cannot write " + cfg.out_path);
        out << result.to_json().dump(2) << '\n';
      }
      write_manifest("ablate", {{"axes", axes_str}, {"targets", targets_per_cell},
                                {"seed", cfg.seed}},
                     {cfg.in_path}, {cfg.out_path});
      bool any_failed = false;
      for (const auto& c : result.cells) any_failed = any_failed || c.failed;
      return any_failed ? kExitPartial : kExitOk;
    }

    if (*pipeline_cmd) {
      std::vector<std::string> errors = cfg.gen.validate();
      auto backend = make_backend(cfg, errors);
      if (!errors.empty()) return fail_with(errors);
      Corpus corpus = load_native(cfg.in_path);
      PipelineOptions options;
      options.outdir = outdir;
      options.seed = cfg.seed;
      options.max_records = max_records;
      options.e_fraction = e_fraction;
      options.reuse = reuse;
      options.instruction = instruction_kind_from_name(instruction_str);
      options.k = k;
      options.attempt_cap = attempt_cap;
      options.workers = cfg.workers;
      options.gen_config = cfg.gen;
      options.train_config = cfg.train;
      auto summary = run_pipeline(corpus, *backend, options);
      std::cout << "pipeline done: train R@1 " << summary.train_r1 << ", random R@1 "
                << summary.r1_random << ", adversarial R@1 " << summary.r1_adversarial
                << " (" << summary.generated << " generated, " << summary.skipped
                << " skipped)\n";
      return summary.skipped == 0 ? kExitOk : kExitPartial;
    }

    if (*synth) {
      SyntheticOptions options;
      options.records = synth_records;
      options.seed = cfg.seed;
      Corpus corpus = make_synthetic_corpus(options);
      save_corpus_jsonl(corpus, cfg.out_path);
      std::cout << corpus.records.size() << " synthetic records, pool "
                << corpus.response_pool.size() << '\n';
      write_manifest("synth", {{"records", synth_records}, {"seed", cfg.seed}}, {},
                     {cfg.out_path});
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
