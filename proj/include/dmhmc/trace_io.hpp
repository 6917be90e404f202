#pragma once

#include <map>
#include <string>

#include "dmhmc/sampler.hpp"

namespace dmhmc {

inline constexpr int kTraceSchemaVersion = 1;

/// Writes samples.csv, metrics.csv, accepts.csv and run.json into dir.
/// Floats are serialized with 17 significant digits so the round trip is
/// bit-exact. config holds the resolved key-value pairs recorded in run.json.
void write_trace(const Trace& trace, const std::string& dir,
                 const std::map<std::string, std::string>& config = {});

Trace read_trace(const std::string& dir);

}  // namespace dmhmc
