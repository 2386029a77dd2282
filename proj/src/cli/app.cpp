#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "k2sql/cli/commands.hpp"
#include "k2sql/core/error.hpp"

#ifndef K2SQL_VERSION
#define K2SQL_VERSION "dev"
#endif
#ifndef K2SQL_PROMPTS_DIR
#define K2SQL_PROMPTS_DIR "prompts"
#endif

namespace k2sql::cli {
namespace {

struct EnvOption {
  const char* env;
  std::vector<std::string> flags;
};

const std::vector<EnvOption> kEnvOptions{
    {"K2SQL_SEED", {"--seed"}},
    {"K2SQL_WORKERS", {"--workers"}},
    {"K2SQL_PROMPTS_DIR", {"--prompts-dir"}},
    {"K2SQL_CACHE_DIR", {"--cache-dir"}},
    {"K2SQL_ENDPOINT_URL", {"--endpoint-url", "--endpoint_url"}},
    {"K2SQL_MODEL_NAME", {"--model-name", "--model_name"}},
    {"K2SQL_EMBEDDING_URL", {"--embedding-url", "--embedding_url"}},
    {"K2SQL_EMBEDDING_MODEL", {"--embedding-model", "--embedding_model"}},
};

bool given(const std::vector<std::string>& args, const std::vector<std::string>& flags) {
  for (const auto& a : args) {
    for (const auto& f : flags) {
      if (a == f || a.rfind(f + "=", 0) == 0) return true;
    }
  }
  return false;
}

// Precedence, lowest first: --config file, environment, command-line flags. CLI11
// ranks the config file above the environment, so set variables are passed as
// leading flags unless the user gave the option explicitly.
std::vector<std::string> with_environment(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> out;
  for (const auto& opt : kEnvOptions) {
    const char* value = std::getenv(opt.env);
    if (value == nullptr || *value == '\0' || given(args, opt.flags)) continue;
    out.push_back(opt.flags.front() + "=" + value);
  }
  out.insert(out.end(), args.begin(), args.end());
  return out;
}

void add_global_options(CLI::App& app, GlobalOptions& g) {
  app.set_config("--config", "", "TOML configuration file");
  app.add_option("--seed", g.seed, "Seed forwarded to providers [env K2SQL_SEED]");
  app.add_option("--workers", g.workers, "Parallel workers [env K2SQL_WORKERS]")
      ->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");
  app.add_option("--prompts-dir", g.prompts_dir,
                 "Directory with prompt templates [env K2SQL_PROMPTS_DIR]");
  app.add_option("--cache-dir", g.cache_dir, "Completion cache directory [env K2SQL_CACHE_DIR]");
  app.add_flag("--no-cache", g.no_cache, "Bypass the completion cache");
  app.add_option("--endpoint-url,--endpoint_url", g.endpoint_url,
                 "Chat-completion endpoint [env K2SQL_ENDPOINT_URL]");
  app.add_option("--model-name,--model_name", g.model_name,
                 "Remote model name [env K2SQL_MODEL_NAME]");
  app.add_option("--embedding-url,--embedding_url", g.embedding_url,
                 "Embedding endpoint [env K2SQL_EMBEDDING_URL]");
  app.add_option("--embedding-model,--embedding_model", g.embedding_model,
                 "Embedding model [env K2SQL_EMBEDDING_MODEL]");
  app.add_option("--max-in-flight", g.max_in_flight, "Concurrent remote requests")
      ->check(CLI::PositiveNumber);
  app.add_option("--temperature", g.temperature, "Sampling temperature");
  app.add_option("--top-p,--top_p", g.top_p, "Nucleus sampling mass");
  app.add_option("--max-tokens,--max_tokens", g.max_tokens, "Completion token limit");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Knowledge-to-SQL pipeline: table reading, generation, feedback and evaluation"};
  app.set_version_flag("--version", K2SQL_VERSION);
  app.require_subcommand(1);
  GlobalOptions global;
  global.prompts_dir = K2SQL_PROMPTS_DIR;
  add_global_options(app, global);

  TableReadOptions tr;
  auto* table_read = app.add_subcommand("table-read", "Select question-relevant columns");
  table_read->add_option("--data", tr.data, "Instance file")->required()->check(CLI::ExistingFile);
  table_read->add_option("--db-root", tr.db_root, "Database root")->required();
  table_read->add_option("--alpha", tr.alpha, "Similarity threshold (strict)");
  table_read->add_option("--embedder", tr.embedder, "token or remote")
      ->check(CLI::IsMember({"token", "remote"}));
  table_read->add_option("--max-columns", tr.max_columns, "Keep the top N columns");
  table_read->add_option("--out", tr.out, "Output JSONL")->required();

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Generate knowledge or SQL");
  generate->add_option("--stage", gen.stage, "knowledge or sql")
      ->required()
      ->check(CLI::IsMember({"knowledge", "sql"}));
  generate->add_option("--data", gen.data, "Instance file")->required()->check(CLI::ExistingFile);
  generate->add_option("--db-root", gen.db_root, "Database root")->required();
  generate->add_option("--subtables", gen.subtables, "table-read output (knowledge stage)")
      ->check(CLI::ExistingFile);
  generate->add_option("--knowledge", gen.knowledge,
                       "Knowledge for the sql stage: a knowledge-stage output or 'gold'");
  generate
      ->add_option("--provider", gen.provider, "echo:<text>, table:<path>, replay:<path>, remote")
      ->required();
  generate->add_option("--record", gen.record, "Append a replayable session recording");
  generate->add_option("--out", gen.out, "Output JSONL")->required();

  CollectFeedbackOptions cf;
  auto* collect = app.add_subcommand("collect-feedback", "Build the preference dataset");
  collect->add_option("--data", cf.data, "Instance file")->required()->check(CLI::ExistingFile);
  collect->add_option("--db-root", cf.db_root, "Database root")->required();
  collect->add_option("--gen-knowledge", cf.gen_knowledge, "Generated knowledge")
      ->required()
      ->check(CLI::ExistingFile);
  collect->add_option("--gold-knowledge", cf.gold_knowledge, "Gold knowledge (default: evidence)")
      ->check(CLI::ExistingFile);
  collect->add_option("--subtables", cf.subtables, "table-read output")->check(CLI::ExistingFile);
  collect->add_option("--provider", cf.provider, "Text-to-SQL provider")->required();
  collect->add_option("--record", cf.record, "Append a replayable session recording");
  collect->add_option("--out", cf.out, "Preference dataset JSONL")->required();
  collect->add_option("--quarantine", cf.quarantine, "Quarantine JSONL");
  collect->add_option("--contribution-report", cf.contribution_report, "Contribution report");
  collect->add_option("--exec-report", cf.exec_report, "Execution report");
  collect->add_option("--timeout", cf.timeout_s, "Per-query timeout in seconds")
      ->check(CLI::PositiveNumber);

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions with EX and VES");
  evaluate->add_option("--data", ev.data, "Instance file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--db-root", ev.db_root, "Database root")->required();
  evaluate->add_option("--pred", ev.pred, "generate --stage sql output")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--baseline-pred", ev.baseline_pred, "Predictions without knowledge")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--timing-reps", ev.timing_reps, "Timed repetitions per query")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--timeout", ev.timeout_s, "Per-query timeout in seconds")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--out", ev.out, "Report JSON")->required();
  evaluate->add_option("--exec-report", ev.exec_report, "Execution report");

  VerifyObjectivesOptions vo;
  auto* verify = app.add_subcommand("verify-objectives", "Check SFT and DPO losses and gradients");
  verify->add_option("--records", vo.records, "Logprob records JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("--epsilon", vo.epsilon, "Finite-difference step");
  verify->add_option("--sft-reduction", vo.sft_reduction, "sum or mean")
      ->check(CLI::IsMember({"sum", "mean"}));
  verify->add_option("--reward", vo.reward, "sum or length-normalized")
      ->check(CLI::IsMember({"sum", "length-normalized"}));
  verify->add_option("--out", vo.out, "Report JSON")->required();

  try {
    auto args = with_environment(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationFailure;
  }

  try {
    if (*table_read) return cmd_table_read(global, tr);
    if (*generate) return cmd_generate(global, gen);
    if (*collect) return cmd_collect_feedback(global, cf);
    if (*evaluate) return cmd_evaluate(global, ev);
    if (*verify) return cmd_verify_objectives(global, vo);
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kHardFailure;
  }
  return kHardFailure;
}

}  // namespace k2sql::cli
