#pragma once

#include <iosfwd>

namespace dmhmc {

/// Runs the built-in oracle and invariant checks (mixing-matrix invariants on
/// random graphs, tracking mean conservation, finite-difference gradient/hvp
/// equivalence for every shard type). Prints one line per check to out and
/// returns the number of failures.
int run_validation(std::ostream& out);

}  // namespace dmhmc
