#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace topicllm::cli {

/// Runs one CLI invocation. `args` excludes the program name. Failures
/// print `error: <ErrorClass>: <message>` on `err` and return nonzero:
/// 1 for pipeline/data errors, 2 for usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace topicllm::cli
