#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "k2sql/core/io.hpp"
#include "k2sql/llm/generator.hpp"
#include "k2sql/llm/remote.hpp"

namespace k2sql::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kSuccess = 0, kHardFailure = 1, kValidationFailure = 2 };

struct GlobalOptions {
  std::optional<std::int64_t> seed;
  int workers = 1;
  bool verbose = false;
  fs::path prompts_dir;
  fs::path cache_dir = ".k2sql-cache";
  bool no_cache = false;
  std::string endpoint_url;
  std::string model_name;
  std::string embedding_url;
  std::string embedding_model;
  int max_in_flight = 4;
  double temperature = 0.6;
  double top_p = 0.9;
  int max_tokens = 4096;
};

struct TableReadOptions {
  fs::path data;
  fs::path db_root;
  double alpha = 0.6;
  std::string embedder = "token";
  std::optional<std::size_t> max_columns;
  fs::path out;
};

struct GenerateOptions {
  std::string stage;  // knowledge | sql
  fs::path data;
  fs::path db_root;
  std::optional<fs::path> subtables;
  // A generate --stage knowledge output, or "gold" for the instances' own evidence.
  std::optional<std::string> knowledge;
  std::string provider;
  std::optional<fs::path> record;
  fs::path out;
};

struct CollectFeedbackOptions {
  fs::path data;
  fs::path db_root;
  fs::path gen_knowledge;
  std::optional<fs::path> gold_knowledge;  // defaults to the evidence field
  std::optional<fs::path> subtables;
  std::string provider;
  std::optional<fs::path> record;
  fs::path out;
  std::optional<fs::path> quarantine;  // defaults to <out>.quarantine.jsonl
  std::optional<fs::path> contribution_report;
  std::optional<fs::path> exec_report;
  double timeout_s = 30.0;
};

struct EvaluateOptions {
  fs::path data;
  fs::path db_root;
  fs::path pred;
  std::optional<fs::path> baseline_pred;
  int timing_reps = 5;
  double timeout_s = 30.0;
  fs::path out;
  std::optional<fs::path> exec_report;
};

struct VerifyObjectivesOptions {
  fs::path records;
  double epsilon = 1e-5;
  std::string sft_reduction = "sum";
  std::string reward = "sum";
  fs::path out;
};

// Provider specs: echo:<text>, table:<path>, replay:<path>, remote. The result is
// wrapped in the completion cache unless disabled, and in a recorder when
// record is set.
std::shared_ptr<llm::Generator> make_generator(const std::string& spec, const GlobalOptions& global,
                                               const std::optional<fs::path>& record);
llm::RemoteConfig remote_config(const GlobalOptions& global);
llm::GenerationConfig generation_config(const GlobalOptions& global);

int cmd_table_read(const GlobalOptions& global, const TableReadOptions& options);
int cmd_generate(const GlobalOptions& global, const GenerateOptions& options);
int cmd_collect_feedback(const GlobalOptions& global, const CollectFeedbackOptions& options);
int cmd_evaluate(const GlobalOptions& global, const EvaluateOptions& options);
int cmd_verify_objectives(const GlobalOptions& global, const VerifyObjectivesOptions& options);

// Parses argv and dispatches. Errors are mapped onto ExitCode.
int run(int argc, char** argv);

}  // namespace k2sql::cli
