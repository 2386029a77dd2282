#include "k2sql/exec/report.hpp"

namespace k2sql::exec {

OrderedJson execution_report_record(const std::string& instance_id, const std::string& variant,
                                    const ExecutionOutcome& outcome) {
  OrderedJson j;
  j["instance_id"] = instance_id;
  j["variant"] = variant;
  j["status"] = std::string(to_string(outcome.status));
  j["wall_time_s"] = outcome.ok() ? outcome.wall_time_s : 0.0;
  j["row_count"] = outcome.result ? outcome.result->rows.size() : 0;
  if (!outcome.ok()) j["error_message"] = outcome.error_message;
  return j;
}

}  // namespace k2sql::exec
