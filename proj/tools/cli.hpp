#pragma once

#include <json.hpp>

namespace mollikit::cli {

/// Parses arguments and runs one subcommand. Returns the process exit code:
/// 0 success, 1 a checked invariant failed, 2 bad input or configuration.
int run(int argc, char** argv);

/// Built-in invariant suite on small fixtures; deterministic for any thread count.
nlohmann::json selftest();

}  // namespace mollikit::cli
