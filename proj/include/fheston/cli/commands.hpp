#pragma once

#include <functional>
#include <ostream>

#include "fheston/cli/config.hpp"

namespace fheston::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kValidationFailure = 3, kNumericalFailure = 4 };

// Each command reports on `out`, sends "WARN:" lines and diagnostics to `err`
// and returns an exit code. Exceptions from the library are mapped by
// run_guarded.
int cmd_price(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_tables(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_converge(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Runs `command` and turns exceptions into exit codes: UsageError,
/// DomainError, InvalidSigmaError -> 2; NumericalError -> 4.
int run_guarded(const std::function<int()>& command, std::ostream& err);

}  // namespace fheston::cli
