#include "k2sql/cli/commands.hpp"

#include <algorithm>
#include <iostream>
#include <set>

#include "k2sql/cli/manifest.hpp"
#include "k2sql/contribution/contribution.hpp"
#include "k2sql/core/benchmark.hpp"
#include "k2sql/core/error.hpp"
#include "k2sql/core/hash.hpp"
#include "k2sql/core/knowledge.hpp"
#include "k2sql/eval/metrics.hpp"
#include "k2sql/exec/report.hpp"
#include "k2sql/llm/prompt.hpp"
#include "k2sql/objective/objective.hpp"
#include "k2sql/preference/preference.hpp"
#include "k2sql/schema_link/table_reading.hpp"

namespace k2sql::cli {
namespace {

using KnowledgeMap = std::map<std::string, Knowledge>;
using SubtableMap = std::map<std::string, schema_link::RelevantSubTables>;

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

void info(const GlobalOptions& global, const std::string& message) {
  if (global.verbose) std::cerr << message << '\n';
}

std::string path_string(const std::optional<fs::path>& p) { return p ? p->string() : ""; }

OrderedJson global_json(const GlobalOptions& g) {
  OrderedJson j;
  j["workers"] = g.workers;
  j["prompts_dir"] = g.prompts_dir.string();
  j["cache"] = g.no_cache ? "" : g.cache_dir.string();
  j["endpoint_url"] = g.endpoint_url;
  j["model_name"] = g.model_name;
  j["embedding_url"] = g.embedding_url;
  j["embedding_model"] = g.embedding_model;
  j["generation"] = llm::to_json(generation_config(g));
  return j;
}

// Reads {instance_id, knowledge, error?} records. Records carrying an error are
// left out of the map.
KnowledgeMap load_knowledge_file(const fs::path& path) {
  KnowledgeMap out;
  for (const auto& rec : read_json_records(path)) {
    const std::string where = path.string() + ":" + std::to_string(rec.line);
    try {
      const auto id = rec.value.at("instance_id").get<std::string>();
      if (rec.value.contains("error")) continue;
      const Json& k = rec.value.at("knowledge");
      if (!k.is_string()) throw ValidationError(where + ": knowledge must be a string");
      if (!out.emplace(id, decompose_knowledge(k.get<std::string>())).second) {
        throw ValidationError(where + ": duplicate instance_id '" + id + "'");
      }
    } catch (const Json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return out;
}

KnowledgeMap gold_from_evidence(const Benchmark& bench) {
  KnowledgeMap out;
  for (const auto& inst : bench.instances) {
    if (inst.gold_knowledge) out.emplace(inst.id, *inst.gold_knowledge);
  }
  return out;
}

SubtableMap load_subtables_file(const fs::path& path, const Benchmark& bench) {
  std::map<std::string, const Instance*> by_id;
  for (const auto& inst : bench.instances) by_id.emplace(inst.id, &inst);
  SubtableMap out;
  for (const auto& rec : read_json_records(path)) {
    const std::string where = path.string() + ":" + std::to_string(rec.line);
    try {
      const auto id = rec.value.at("instance_id").get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) continue;
      out[id] = schema_link::subtables_from_json(rec.value.at("subtables"),
                                                 bench.schema_for(*it->second));
    } catch (const Json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return out;
}

struct Prediction {
  std::optional<std::string> sql;
  std::string error;
};

std::map<std::string, Prediction> load_predictions(const fs::path& path) {
  std::map<std::string, Prediction> out;
  for (const auto& rec : read_json_records(path)) {
    const std::string where = path.string() + ":" + std::to_string(rec.line);
    try {
      Prediction p;
      const auto id = rec.value.at("instance_id").get<std::string>();
      if (auto it = rec.value.find("sql"); it != rec.value.end() && it->is_string()) {
        p.sql = it->get<std::string>();
      }
      p.error = rec.value.value("error", std::string(p.sql ? "" : "no SQL in prediction"));
      if (!out.emplace(id, std::move(p)).second) {
        throw ValidationError(where + ": duplicate instance_id '" + id + "'");
      }
    } catch (const Json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return out;
}

template <typename Map>
void require_coverage(const Benchmark& bench, const Map& map, const std::string& what) {
  std::size_t missing = 0;
  std::string first;
  for (const auto& inst : bench.instances) {
    if (!map.contains(inst.id)) {
      if (missing++ == 0) first = inst.id;
    }
  }
  if (missing > 0) {
    throw ValidationError(what + " is missing " + std::to_string(missing) +
                          " instance(s), first '" + first + "'");
  }
}

void check_out(const fs::path& out) {
  if (out.empty()) throw ValidationError("--out is required");
}

std::vector<fs::path> existing(std::initializer_list<std::optional<fs::path>> paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (p) out.push_back(*p);
  }
  return out;
}

exec::ExecutionOutcome unexecutable(const std::string& why) {
  exec::ExecutionOutcome o;
  o.status = exec::Status::sql_error;
  o.error_message = why;
  return o;
}

}  // namespace

llm::RemoteConfig remote_config(const GlobalOptions& global) {
  llm::RemoteConfig cfg;
  cfg.endpoint_url = global.endpoint_url;
  cfg.model_name = global.model_name;
  cfg.api_key = llm::api_key_from_env();
  cfg.embedding_url = global.embedding_url;
  cfg.embedding_model = global.embedding_model;
  cfg.max_in_flight = global.max_in_flight;
  cfg.retry.jitter_seed = static_cast<std::uint64_t>(global.seed.value_or(0));
  return cfg;
}

llm::GenerationConfig generation_config(const GlobalOptions& global) {
  llm::GenerationConfig cfg;
  cfg.temperature = global.temperature;
  cfg.top_p = global.top_p;
  cfg.max_tokens = global.max_tokens;
  cfg.seed = global.seed;
  llm::validate(cfg);
  return cfg;
}

std::shared_ptr<llm::Generator> make_generator(const std::string& spec, const GlobalOptions& global,
                                               const std::optional<fs::path>& record) {
  std::shared_ptr<llm::Generator> gen;
  bool cacheable = true;
  if (spec.starts_with("echo:")) {
    gen = std::make_shared<llm::EchoGenerator>(spec.substr(5));
  } else if (spec.starts_with("table:")) {
    gen = std::make_shared<llm::TableGenerator>(llm::TableGenerator::from_file(spec.substr(6)));
  } else if (spec.starts_with("replay:")) {
    gen = std::make_shared<llm::ReplayGenerator>(llm::ReplayGenerator::from_file(spec.substr(7)));
    cacheable = false;
  } else if (spec == "remote") {
    gen = std::make_shared<llm::RemoteGenerator>(remote_config(global));
  } else {
    throw ValidationError("unknown provider '" + spec +
                          "' (expected echo:<text>, table:<path>, replay:<path> or remote)");
  }
  if (cacheable && !global.no_cache) {
    gen = std::make_shared<llm::CachingGenerator>(gen, global.cache_dir);
  }
  if (record) gen = std::make_shared<llm::RecordingGenerator>(gen, *record);
  return gen;
}

int cmd_table_read(const GlobalOptions& global, const TableReadOptions& options) {
  check_out(options.out);
  if (options.max_columns && *options.max_columns == 0) {
    throw ValidationError("--max-columns must be positive");
  }
  const Benchmark bench = load_benchmark(options.data, options.db_root);

  std::unique_ptr<schema_link::Embedder> embedder;
  if (options.embedder == "token") {
    embedder = std::make_unique<schema_link::TokenOverlapEmbedder>();
  } else if (options.embedder == "remote") {
    embedder = std::make_unique<llm::RemoteEmbedder>(remote_config(global));
  } else {
    throw ValidationError("unknown embedder '" + options.embedder + "' (token or remote)");
  }
  schema_link::SimilarityConfig cfg{options.alpha, embedder.get(), global.workers};

  std::vector<OrderedJson> rows;
  std::size_t empty = 0;
  for (const auto& inst : bench.instances) {
    const auto& schema = bench.schema_for(inst);
    const auto matches = schema_link::match_columns(inst.question, schema, cfg);
    const auto subtables = schema_link::select_subtables(matches, schema, options.max_columns);
    if (subtables.empty()) ++empty;
    rows.push_back(schema_link::table_reading_record(inst.id, options.alpha, embedder->name(),
                                                     matches, subtables));
  }
  if (empty > 0) {
    warn(std::to_string(empty) + " of " + std::to_string(bench.instances.size()) +
         " instances have no column with similarity above alpha " + std::to_string(options.alpha));
  }
  write_file_atomic(options.out, to_jsonl(rows));

  RunManifest m{"table-read",
                global_json(global),
                {options.data, options.db_root},
                {options.out},
                global.seed};
  m.config["alpha"] = options.alpha;
  m.config["embedder"] = embedder->name();
  m.config["max_columns"] =
      options.max_columns ? OrderedJson(*options.max_columns) : OrderedJson(nullptr);
  for (const auto& [id, schema] : bench.schemas) m.inputs.push_back(schema.db_file_path);
  write_manifest(m, manifest_path(options.out));
  info(global,
       "table-read: " + std::to_string(rows.size()) + " records -> " + options.out.string());
  return kSuccess;
}

int cmd_generate(const GlobalOptions& global, const GenerateOptions& options) {
  check_out(options.out);
  if (options.stage != "knowledge" && options.stage != "sql") {
    throw ValidationError("--stage must be knowledge or sql");
  }
  const Benchmark bench = load_benchmark(options.data, options.db_root);
  const auto templates = llm::PromptTemplates::load(global.prompts_dir);
  const auto config = generation_config(global);

  SubtableMap subtables;
  if (options.stage == "knowledge" && options.subtables) {
    subtables = load_subtables_file(*options.subtables, bench);
  }
  std::optional<KnowledgeMap> knowledge;
  if (options.knowledge) {
    if (options.stage != "sql") throw ValidationError("--knowledge applies to --stage sql");
    knowledge = *options.knowledge == "gold" ? gold_from_evidence(bench)
                                             : load_knowledge_file(*options.knowledge);
  }

  auto generator = make_generator(options.provider, global, options.record);
  const std::string provider = generator->name();
  const std::size_t n = bench.instances.size();
  std::vector<OrderedJson> rows(n);
  std::vector<std::string> warnings(n);
  std::size_t failures = 0;

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, global.workers)) \
    reduction(+ : failures)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto& inst = bench.instances[static_cast<std::size_t>(i)];
    const auto& schema = bench.schema_for(inst);
    OrderedJson row;
    row["instance_id"] = inst.id;
    row["stage"] = options.stage;
    row["provider"] = provider;
    try {
      if (options.stage == "knowledge") {
        std::vector<std::string> render_warnings;
        auto it = subtables.find(inst.id);
        const auto input = preference::render_input(
            inst, it == subtables.end() ? schema_link::RelevantSubTables{} : it->second, schema,
            &render_warnings);
        const auto g = llm::generate_knowledge(input, *generator, config, templates);
        row["prompt_digest"] = sha256_hex(g.prompt);
        row["completion"] = g.completion;
        row["knowledge"] = g.knowledge.text;
        row["sub_knowledge"] = g.knowledge.sub_knowledge;
        if (g.knowledge.empty()) render_warnings.push_back("empty knowledge completion");
        for (const auto& w : render_warnings) {
          warnings[static_cast<std::size_t>(i)] += inst.id + ": " + w + "\n";
        }
      } else {
        std::optional<Knowledge> k;
        if (knowledge) {
          auto it = knowledge->find(inst.id);
          if (it == knowledge->end()) throw llm::GenerationError("no knowledge for this instance");
          k = it->second;
        }
        const auto g = llm::generate_sql(inst, schema, k, *generator, config, templates);
        row["prompt_digest"] = sha256_hex(g.prompt);
        row["completion"] = g.completion;
        row["with_knowledge"] = k.has_value();
        row["sql"] = g.sql ? OrderedJson(*g.sql) : OrderedJson(nullptr);
        if (!g.sql) row["extraction_error"] = g.extraction_error;
      }
    } catch (const std::exception& e) {
      row["error"] = e.what();
      ++failures;
    }
    rows[static_cast<std::size_t>(i)] = std::move(row);
  }
  for (const auto& w : warnings) {
    if (!w.empty()) std::cerr << "warning: " << w;
  }
  write_file_atomic(options.out, to_jsonl(rows));

  RunManifest m{"generate",
                global_json(global),
                existing({options.data, options.subtables}),
                {options.out},
                global.seed};
  if (options.knowledge && *options.knowledge != "gold") m.inputs.push_back(*options.knowledge);
  m.config["stage"] = options.stage;
  m.config["provider"] = provider;
  m.config["knowledge"] = options.knowledge.value_or("");
  m.config["record"] = path_string(options.record);
  m.inputs.push_back(global.prompts_dir / "knowledge.txt");
  m.inputs.push_back(global.prompts_dir / "text2sql.txt");
  write_manifest(m, manifest_path(options.out));
  if (auto* cache = dynamic_cast<llm::CachingGenerator*>(generator.get())) {
    info(global, "cache: " + std::to_string(cache->hits()) + " hits, " +
                     std::to_string(cache->misses()) + " misses");
  }
  if (failures > 0) {
    std::cerr << "error: " << failures << " instance(s) failed; see the error field in "
              << options.out.string() << '\n';
    return kHardFailure;
  }
  return kSuccess;
}

int cmd_collect_feedback(const GlobalOptions& global, const CollectFeedbackOptions& options) {
  check_out(options.out);
  const Benchmark bench = load_benchmark(options.data, options.db_root);
  const auto templates = llm::PromptTemplates::load(global.prompts_dir);
  const KnowledgeMap gen = load_knowledge_file(options.gen_knowledge);
  const KnowledgeMap gold = options.gold_knowledge ? load_knowledge_file(*options.gold_knowledge)
                                                   : gold_from_evidence(bench);
  require_coverage(bench, gen, "generated knowledge");
  require_coverage(bench, gold, "gold knowledge");
  SubtableMap subtables;
  if (options.subtables) subtables = load_subtables_file(*options.subtables, bench);

  std::vector<preference::FeedbackItem> items;
  for (const auto& inst : bench.instances) {
    const auto& schema = bench.schema_for(inst);
    auto it = subtables.find(inst.id);
    std::vector<std::string> render_warnings;
    auto input = preference::render_input(
        inst, it == subtables.end() ? schema_link::RelevantSubTables{} : it->second, schema,
        &render_warnings);
    for (const auto& w : render_warnings) warn(inst.id + ": " + w);
    items.push_back({&inst, &schema, std::move(input), gen.at(inst.id), gold.at(inst.id)});
  }

  auto generator = make_generator(options.provider, global, options.record);
  preference::DbFeedbackOptions db_options;
  db_options.generation = generation_config(global);
  db_options.exec.timeout = exec::Seconds(options.timeout_s);
  db_options.workers = global.workers;
  auto feedback = preference::collect_db_pairs(items, *generator, templates, db_options);

  std::set<std::string> excluded;
  for (const auto& q : feedback.quarantined) excluded.insert(q.instance_id);
  for (const auto& s : feedback.skipped) excluded.insert(s.instance_id);
  std::vector<preference::FeedbackItem> kept;
  for (const auto& item : items) {
    if (!excluded.contains(item.instance->id)) kept.push_back(item);
  }
  const auto sql_pairs = preference::collect_sql_pairs(kept);
  const auto dataset = preference::assemble_dataset(feedback.pairs, sql_pairs);

  std::map<std::string, const Instance*> by_id;
  for (const auto& inst : bench.instances) by_id.emplace(inst.id, &inst);
  std::vector<OrderedJson> rows;
  for (const auto& pair : dataset) {
    if (!preference::verify_pair(pair, feedback.entries, by_id.at(pair.instance_id)->gold_sql)) {
      throw Error("internal: pair for instance " + pair.instance_id + " fails its re-check");
    }
    rows.push_back(preference::pair_to_json(pair));
  }
  write_file_atomic(options.out, to_jsonl(rows));

  const fs::path quarantine_path =
      options.quarantine.value_or(fs::path(options.out.string() + ".quarantine.jsonl"));
  std::vector<OrderedJson> quarantine_rows;
  for (const auto& item : items) {
    const auto& id = item.instance->id;
    for (const auto* list : {&feedback.quarantined, &feedback.skipped}) {
      for (const auto& q : *list) {
        if (q.instance_id != id) continue;
        OrderedJson j;
        j["instance_id"] = id;
        j["kind"] = list == &feedback.quarantined ? "broken_reference" : "provider_failure";
        j["reason"] = q.reason;
        quarantine_rows.push_back(std::move(j));
      }
    }
  }
  write_file_atomic(quarantine_path, to_jsonl(quarantine_rows));

  std::vector<fs::path> outputs{options.out, quarantine_path};
  if (options.contribution_report) {
    std::vector<OrderedJson> report;
    for (const auto& item : kept) {
      const auto& sql = item.instance->gold_sql;
      report.push_back(contribution::contribution_report_record(
          item.instance->id, "gold", contribution::check_contribution(item.gold_knowledge, sql)));
      report.push_back(contribution::contribution_report_record(
          item.instance->id, "gen", contribution::check_contribution(item.gen_knowledge, sql)));
    }
    write_file_atomic(*options.contribution_report, to_jsonl(report));
    outputs.push_back(*options.contribution_report);
  }
  if (options.exec_report) {
    std::vector<OrderedJson> report;
    for (const auto& item : items) {
      auto it = feedback.entries.find(item.instance->id);
      if (it == feedback.entries.end()) continue;
      report.push_back(exec::execution_report_record(it->first, "gold", it->second.gold_outcome));
      report.push_back(exec::execution_report_record(it->first, "gen", it->second.gen_outcome));
    }
    write_file_atomic(*options.exec_report, to_jsonl(report));
    outputs.push_back(*options.exec_report);
  }

  RunManifest m{
      "collect-feedback", global_json(global),
      existing({options.data, options.gen_knowledge, options.gold_knowledge, options.subtables}),
      outputs, global.seed};
  m.config["provider"] = generator->name();
  m.config["timeout_s"] = options.timeout_s;
  m.config["gold_knowledge"] =
      options.gold_knowledge ? options.gold_knowledge->string() : std::string("evidence");
  m.inputs.push_back(global.prompts_dir / "text2sql.txt");
  for (const auto& [id, schema] : bench.schemas) m.inputs.push_back(schema.db_file_path);
  write_manifest(m, manifest_path(options.out));

  std::cerr << "collect-feedback: " << feedback.pairs.size() << " db pairs, " << sql_pairs.size()
            << " sql pairs, " << dataset.size() << " in dataset; " << feedback.quarantined.size()
            << " quarantined, " << feedback.skipped.size() << " skipped, " << kept.size()
            << " processed\n";
  return feedback.skipped.empty() ? kSuccess : kHardFailure;
}

int cmd_evaluate(const GlobalOptions& global, const EvaluateOptions& options) {
  check_out(options.out);
  if (options.timing_reps < 1) throw ValidationError("--timing-reps must be >= 1");
  const Benchmark bench = load_benchmark(options.data, options.db_root);
  const auto preds = load_predictions(options.pred);
  require_coverage(bench, preds, "prediction file");
  std::optional<std::map<std::string, Prediction>> baseline;
  if (options.baseline_pred) {
    baseline = load_predictions(*options.baseline_pred);
    require_coverage(bench, *baseline, "baseline prediction file");
  }
  exec::ExecOptions exec_options;
  exec_options.timeout = exec::Seconds(options.timeout_s);

  struct Row {
    exec::ExecutionOutcome gold;
    exec::ExecutionOutcome pred;
    std::optional<exec::ExecutionOutcome> base;
  };
  const std::size_t n = bench.instances.size();
  std::vector<Row> results(n);

  // Timing runs against the same database file stay serial; distinct files run in parallel.
  std::map<std::string, std::vector<std::size_t>> by_db;
  for (std::size_t i = 0; i < n; ++i) by_db[bench.instances[i].db_id].push_back(i);
  std::vector<const std::vector<std::size_t>*> groups;
  for (const auto& [_, idx] : by_db) groups.push_back(&idx);

  auto run = [&](const Prediction& p, const DatabaseSchema& schema) {
    if (!p.sql) return unexecutable(p.error);
    return exec::timed_execute(*p.sql, schema, options.timing_reps, exec_options);
  };
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, global.workers))
  for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(groups.size()); ++g) {
    for (std::size_t i : *groups[static_cast<std::size_t>(g)]) {
      const auto& inst = bench.instances[i];
      const auto& schema = bench.schema_for(inst);
      auto& r = results[i];
      r.gold = exec::timed_execute(inst.gold_sql, schema, options.timing_reps, exec_options);
      if (!r.gold.ok()) continue;
      r.pred = run(preds.at(inst.id), schema);
      if (baseline) r.base = run(baseline->at(inst.id), schema);
    }
  }

  std::vector<eval::InstanceScore> scores;
  std::vector<eval::InstanceScore> base_scores;
  std::vector<OrderedJson> excluded;
  std::vector<OrderedJson> exec_rows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& inst = bench.instances[i];
    const auto& r = results[i];
    exec_rows.push_back(exec::execution_report_record(inst.id, "gold", r.gold));
    if (!r.gold.ok()) {
      warn("gold SQL of instance " + inst.id + " does not execute (" + r.gold.error_message +
           "); instance excluded");
      excluded.push_back({{"instance_id", inst.id}, {"reason", r.gold.error_message}});
      continue;
    }
    exec_rows.push_back(exec::execution_report_record(inst.id, "gen", r.pred));
    scores.push_back({inst.id, exec::indicator_db(r.gold, r.pred) == 1, r.gold.wall_time_s,
                      r.pred.wall_time_s, inst.difficulty});
    if (r.base) {
      exec_rows.push_back(exec::execution_report_record(inst.id, "baseline", *r.base));
      base_scores.push_back({inst.id, exec::indicator_db(r.gold, *r.base) == 1, r.gold.wall_time_s,
                             r.base->wall_time_s, inst.difficulty});
    }
  }
  if (scores.empty()) throw ValidationError("no instance has an executable gold SQL");
  auto report = eval::build_report(scores, base_scores, options.timing_reps);
  if (!excluded.empty()) {
    report.warnings.push_back(std::to_string(excluded.size()) +
                              " instance(s) excluded for a broken gold SQL");
  }
  OrderedJson j = eval::report_to_json(report);
  j["excluded"] = excluded;
  OrderedJson per_instance = OrderedJson::array();
  for (std::size_t k = 0; k < scores.size(); ++k) {
    OrderedJson e;
    e["instance_id"] = scores[k].instance_id;
    e["difficulty"] = to_string(scores[k].difficulty);
    e["matched"] = scores[k].matched;
    if (!base_scores.empty()) {
      e["baseline_matched"] = base_scores[k].matched;
      e["influence"] = eval::to_string(eval::classify(base_scores[k].matched, scores[k].matched));
    }
    per_instance.push_back(std::move(e));
  }
  j["instances"] = std::move(per_instance);
  write_file_atomic(options.out, j.dump(2) + "\n");
  const std::string text = eval::report_to_text(report);
  const fs::path text_path = options.out.string() + ".txt";
  write_file_atomic(text_path, text);
  std::cout << text;

  std::vector<fs::path> outputs{options.out, text_path};
  if (options.exec_report) {
    write_file_atomic(*options.exec_report, to_jsonl(exec_rows));
    outputs.push_back(*options.exec_report);
  }
  RunManifest m{"evaluate", global_json(global),
                existing({options.data, options.pred, options.baseline_pred}), outputs,
                global.seed};
  m.config["timing_reps"] = options.timing_reps;
  m.config["timeout_s"] = options.timeout_s;
  for (const auto& [id, schema] : bench.schemas) m.inputs.push_back(schema.db_file_path);
  write_manifest(m, manifest_path(options.out));
  return kSuccess;
}

int cmd_verify_objectives(const GlobalOptions& global, const VerifyObjectivesOptions& options) {
  check_out(options.out);
  objective::VerifyOptions vo;
  vo.epsilon = options.epsilon;
  if (options.sft_reduction == "mean") {
    vo.sft_reduction = objective::Reduction::mean;
  } else if (options.sft_reduction != "sum") {
    throw ValidationError("--sft-reduction must be sum or mean");
  }
  if (options.reward == "length-normalized") {
    vo.reward = objective::RewardMode::length_normalized;
  } else if (options.reward != "sum") {
    throw ValidationError("--reward must be sum or length-normalized");
  }

  auto lenient = read_json_records_lenient(options.records);
  OrderedJson malformed = OrderedJson::array();
  for (const auto& [line, msg] : lenient.malformed) {
    malformed.push_back({{"line", line}, {"error", msg}});
  }
  std::vector<objective::LogprobRecord> records;
  for (const auto& rec : lenient.records) {
    try {
      records.push_back(objective::parse_logprob_record(rec.value));
    } catch (const ValidationError& e) {
      malformed.push_back({{"line", rec.line}, {"error", e.what()}});
    }
  }
  if (!malformed.empty()) warn(std::to_string(malformed.size()) + " malformed record(s) skipped");

  const auto results = objective::verify_records(records, vo, global.workers);
  OrderedJson list = OrderedJson::array();
  for (const auto& r : results) list.push_back(objective::record_result_to_json(r));
  const auto summary = objective::summarize(results);
  OrderedJson j;
  j["records"] = std::move(list);
  j["malformed"] = std::move(malformed);
  j["summary"] = {{"count", summary.count},
                  {"mean_dpo_loss", summary.mean_dpo_loss},
                  {"mean_sft_loss", summary.mean_sft_loss},
                  {"max_abs_deviation", summary.max_abs_deviation},
                  {"epsilon", vo.epsilon},
                  {"sft_reduction", options.sft_reduction},
                  {"reward", options.reward}};
  write_file_atomic(options.out, j.dump(2) + "\n");

  RunManifest m{
      "verify-objectives", global_json(global), {options.records}, {options.out}, global.seed};
  m.config["epsilon"] = vo.epsilon;
  write_manifest(m, manifest_path(options.out));
  info(global, "verify-objectives: " + std::to_string(results.size()) + " records, max deviation " +
                   std::to_string(summary.max_abs_deviation));
  return kSuccess;
}

}  // namespace k2sql::cli
