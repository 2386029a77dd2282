#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "k2sql/core/types.hpp"
#include "k2sql/exec/result_set.hpp"

namespace k2sql::exec {

enum class Status { ok, sql_error, timeout };
std::string_view to_string(Status s);

struct ExecutionOutcome {
  Status status = Status::sql_error;
  std::optional<ResultSet> result;  // set iff status == ok
  std::string error_message;        // set iff status != ok
  double wall_time_s = 0.0;         // meaningful only when ok

  bool ok() const { return status == Status::ok; }
};

using Seconds = std::chrono::duration<double>;

struct ExecOptions {
  Seconds timeout{30.0};
  // Materialisation cap; a result larger than this is reported as sql_error.
  std::size_t max_rows = 10'000'000;
};

// Runs a single read statement against the schema's database file. Never throws:
// open failures, parse and runtime errors become sql_error, an exceeded limit timeout.
// Connections are read-only and multi-statement or writing SQL is rejected.
ExecutionOutcome execute(std::string_view sql, const DatabaseSchema& schema,
                         const ExecOptions& options = {});
ExecutionOutcome execute(std::string_view sql, const DatabaseSchema& schema, Seconds timeout);

// One untimed warm-up run, then `repetitions` timed runs. wall_time_s is the median
// of the timed runs and the result comes from the final run. The first failure is
// returned as is. Throws ValidationError when repetitions < 1.
ExecutionOutcome timed_execute(std::string_view sql, const DatabaseSchema& schema, int repetitions,
                               const ExecOptions& options = {});

double median(std::vector<double> values);

// Returns 1 iff gen executed and its result equals gold's. Throws BrokenGoldReference
// when the gold outcome is not ok.
int indicator_db(const ExecutionOutcome& gold, const ExecutionOutcome& gen);

class BrokenGoldReference : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QueryJob {
  std::string sql;
  const DatabaseSchema* schema = nullptr;
};

// Executes every job with up to `workers` concurrent connections (OpenMP).
std::vector<ExecutionOutcome> execute_batch(std::span<const QueryJob> jobs,
                                            const ExecOptions& options, int workers);
// Serial reference for execute_batch.
std::vector<ExecutionOutcome> execute_batch_serial(std::span<const QueryJob> jobs,
                                                   const ExecOptions& options);

}  // namespace k2sql::exec
