#pragma once

#include <filesystem>
#include <string>
#include <string_view>

struct sqlite3;
struct sqlite3_stmt;

namespace k2sql {

// Owning handle to a read-only SQLite connection. ATTACH is disabled.
class Connection {
 public:
  // Throws LoadError when the file is missing or cannot be opened.
  static Connection open_read_only(const std::filesystem::path& path);

  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection();

  sqlite3* get() const { return db_; }
  std::string last_error() const;

 private:
  explicit Connection(sqlite3* db) : db_(db) {}
  sqlite3* db_ = nullptr;
};

class Statement {
 public:
  // Throws Error carrying SQLite's message when preparation fails.
  Statement(const Connection& conn, std::string_view sql);
  Statement(Statement&& other) noexcept;
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;
  ~Statement();

  sqlite3_stmt* get() const { return stmt_; }
  void bind_text(int index, std::string_view value);
  // Returns true while a row is available; throws Error on failure.
  bool step();
  int column_count() const;
  std::string column_text(int col) const;

 private:
  sqlite3_stmt* stmt_ = nullptr;
  sqlite3* db_ = nullptr;
};

// Backtick-quotes an identifier, doubling embedded backticks. Unlike double quotes,
// SQLite never reads an unknown backtick name as a string literal.
std::string quote_identifier(std::string_view name);

}  // namespace k2sql
