#include "k2sql/exec/executor.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <memory>

#include "k2sql/core/error.hpp"
#include "k2sql/core/sqlite.hpp"

namespace k2sql::exec {
namespace {

using Clock = std::chrono::steady_clock;

struct Deadline {
  Clock::time_point at;
  bool fired = false;
};

int progress_callback(void* arg) {
  auto* d = static_cast<Deadline*>(arg);
  if (Clock::now() >= d->at) {
    d->fired = true;
    return 1;
  }
  return 0;
}

// True when only whitespace, semicolons and comments remain.
bool tail_is_empty(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == ';') {
      ++i;
    } else if (s.compare(i, 2, "--") == 0) {
      const auto eol = s.find('\n', i);
      i = eol == std::string_view::npos ? s.size() : eol + 1;
    } else if (s.compare(i, 2, "/*") == 0) {
      const auto end = s.find("*/", i + 2);
      i = end == std::string_view::npos ? s.size() : end + 2;
    } else {
      return false;
    }
  }
  return true;
}

ExecutionOutcome failure(Status status, std::string message) {
  ExecutionOutcome out;
  out.status = status;
  out.error_message = std::move(message);
  if (out.error_message.empty()) out.error_message = "unknown error";
  return out;
}

CellValue read_cell(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_INTEGER:
      return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT:
      return sqlite3_column_double(stmt, col);
    case SQLITE_TEXT: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
      return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)));
    }
    case SQLITE_BLOB: {
      const auto* p = static_cast<const char*>(sqlite3_column_blob(stmt, col));
      const auto n = static_cast<std::size_t>(sqlite3_column_bytes(stmt, col));
      return Blob{p != nullptr ? std::string(p, n) : std::string()};
    }
    default:
      return Null{};
  }
}

}  // namespace

std::string_view to_string(Status s) {
  switch (s) {
    case Status::ok:
      return "ok";
    case Status::sql_error:
      return "sql_error";
    case Status::timeout:
      break;
  }
  return "timeout";
}

ExecutionOutcome execute(std::string_view sql, const DatabaseSchema& schema,
                         const ExecOptions& options) {
  if (options.timeout.count() <= 0) return failure(Status::sql_error, "timeout must be positive");
  std::optional<Connection> conn;
  try {
    conn.emplace(Connection::open_read_only(schema.db_file_path));
  } catch (const std::exception& e) {
    return failure(Status::sql_error, e.what());
  }
  sqlite3* db = conn->get();

  const auto start = Clock::now();
  Deadline deadline{start + std::chrono::duration_cast<Clock::duration>(options.timeout)};
  sqlite3_progress_handler(db, 1000, &progress_callback, &deadline);

  sqlite3_stmt* raw = nullptr;
  const char* tail = nullptr;
  const int prc = sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &raw, &tail);
  std::unique_ptr<sqlite3_stmt, decltype(&sqlite3_finalize)> stmt(raw, &sqlite3_finalize);
  if (prc != SQLITE_OK) {
    if (deadline.fired) return failure(Status::timeout, "query exceeded time limit");
    return failure(Status::sql_error, sqlite3_errmsg(db));
  }
  if (!stmt) return failure(Status::sql_error, "empty statement");
  const std::size_t consumed =
      tail == nullptr ? sql.size() : static_cast<std::size_t>(tail - sql.data());
  if (!tail_is_empty(sql.substr(consumed))) {
    return failure(Status::sql_error, "multiple statements are not allowed");
  }
  if (sqlite3_stmt_readonly(stmt.get()) == 0) {
    return failure(Status::sql_error, "only read statements are allowed");
  }

  ResultSet rs;
  rs.column_count = static_cast<std::size_t>(sqlite3_column_count(stmt.get()));
  const int ncols = static_cast<int>(rs.column_count);
  for (;;) {
    const int rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_ROW) {
      if (rs.rows.size() >= options.max_rows) {
        return failure(Status::sql_error,
                       "result exceeds the row limit of " + std::to_string(options.max_rows));
      }
      Row row;
      row.reserve(rs.column_count);
      for (int c = 0; c < ncols; ++c) row.push_back(read_cell(stmt.get(), c));
      rs.rows.push_back(std::move(row));
      if ((rs.rows.size() & 0x3FF) == 0 && Clock::now() >= deadline.at) {
        return failure(Status::timeout, "query exceeded time limit");
      }
      continue;
    }
    if (rc == SQLITE_DONE) break;
    if (deadline.fired || rc == SQLITE_INTERRUPT) {
      return failure(Status::timeout, "query exceeded time limit");
    }
    return failure(Status::sql_error, sqlite3_errmsg(db));
  }
  const Seconds elapsed = Clock::now() - start;
  if (elapsed > options.timeout) return failure(Status::timeout, "query exceeded time limit");

  ExecutionOutcome out;
  out.status = Status::ok;
  out.result = std::move(rs);
  out.wall_time_s = elapsed.count();
  return out;
}

ExecutionOutcome execute(std::string_view sql, const DatabaseSchema& schema, Seconds timeout) {
  ExecOptions options;
  options.timeout = timeout;
  return execute(sql, schema, options);
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ExecutionOutcome timed_execute(std::string_view sql, const DatabaseSchema& schema, int repetitions,
                               const ExecOptions& options) {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  ExecutionOutcome warmup = execute(sql, schema, options);
  if (!warmup.ok()) return warmup;
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(repetitions));
  ExecutionOutcome last;
  for (int i = 0; i < repetitions; ++i) {
    last = execute(sql, schema, options);
    if (!last.ok()) return last;
    times.push_back(last.wall_time_s);
  }
  last.wall_time_s = median(std::move(times));
  return last;
}

int indicator_db(const ExecutionOutcome& gold, const ExecutionOutcome& gen) {
  if (!gold.ok()) {
    throw BrokenGoldReference("gold reference did not execute: " + gold.error_message);
  }
  if (!gen.ok()) return 0;
  return result_sets_equal(*gold.result, *gen.result) ? 1 : 0;
}

std::vector<ExecutionOutcome> execute_batch(std::span<const QueryJob> jobs,
                                            const ExecOptions& options, int workers) {
  std::vector<ExecutionOutcome> out(jobs.size());
  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, workers))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& job = jobs[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = job.schema != nullptr
                                           ? execute(job.sql, *job.schema, options)
                                           : failure(Status::sql_error, "no schema for query");
  }
  return out;
}

std::vector<ExecutionOutcome> execute_batch_serial(std::span<const QueryJob> jobs,
                                                   const ExecOptions& options) {
  std::vector<ExecutionOutcome> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) {
    out.push_back(job.schema != nullptr ? execute(job.sql, *job.schema, options)
                                        : failure(Status::sql_error, "no schema for query"));
  }
  return out;
}

}  // namespace k2sql::exec
