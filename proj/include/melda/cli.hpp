#pragma once

#include <iosfwd>

namespace melda::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kReplicaExists = 2,
    kBadDocument = 3,
    kEmptyReplica = 4,
    kRootMismatch = 5,
    kUnknownObject = 6,
};

/// Runs one command line. Documents and results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace melda::cli
