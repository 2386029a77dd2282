#pragma once

#include <string>

#include "k2sql/core/io.hpp"
#include "k2sql/exec/executor.hpp"

namespace k2sql::exec {

// One execution report line:
// {instance_id, variant, status, wall_time_s, row_count, error_message?}
OrderedJson execution_report_record(const std::string& instance_id, const std::string& variant,
                                    const ExecutionOutcome& outcome);

}  // namespace k2sql::exec
