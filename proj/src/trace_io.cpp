#include "dmhmc/trace_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dmhmc/diagnostics.hpp"

namespace dmhmc {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string());
  return in;
}

}  // namespace

void write_trace(const Trace& trace, const std::string& dir,
                 const std::map<std::string, std::string>& config) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    auto out = open_out(fs::path(dir) / "samples.csv");
    out << "iteration,agent";
    for (int j = 0; j < trace.d; ++j) out << ",w" << j;
    out << "\n";
    for (size_t s = 0; s < trace.samples.size(); ++s) {
      const long iter = static_cast<long>(s) * trace.thin;
      for (int i = 0; i < trace.m; ++i) {
        out << iter << "," << i;
        for (int j = 0; j < trace.d; ++j) out << "," << fmt(trace.samples[s](i, j));
        out << "\n";
      }
    }
  }

  {
    auto out = open_out(fs::path(dir) / "accepts.csv");
    out << "iteration,agent,accepted\n";
    for (size_t t = 0; t < trace.accepts.size(); ++t)
      for (int i = 0; i < trace.m; ++i)
        out << t << "," << i << "," << int(trace.accepts[t][i]) << "\n";
  }

  {
    auto out = open_out(fs::path(dir) / "metrics.csv");
    out << "iteration";
    for (const auto& [name, values] : trace.metrics) out << "," << name;
    out << "\n";
    size_t rows = 0;
    for (const auto& [name, values] : trace.metrics)
      rows = std::max(rows, values.size());
    for (size_t t = 0; t < rows; ++t) {
      out << t;
      for (const auto& [name, values] : trace.metrics)
        out << "," << (t < values.size() ? fmt(values[t]) : "");
      out << "\n";
    }
  }

  {
    nlohmann::json j;
    j["schema_version"] = kTraceSchemaVersion;
    j["m"] = trace.m;
    j["d"] = trace.d;
    j["thin"] = trace.thin;
    j["recorded_samples"] = trace.samples.size();
    j["iterations"] = trace.accepts.size();
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::json summary = nlohmann::json::object();
    if (!trace.samples.empty()) {
      auto [mean, cov] = posterior_moments(trace, 0.0);
      summary["pooled_mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
    }
    double acc = 0.0;
    size_t n = 0;
    for (const auto& row : trace.accepts)
      for (auto f : row) acc += f, ++n;
    summary["accept_rate"] = n ? acc / n : 0.0;
    j["summary"] = summary;
    auto out = open_out(fs::path(dir) / "run.json");
    out << j.dump(2) << "\n";
  }
}

Trace read_trace(const std::string& dir) {
  namespace fs = std::filesystem;
  Trace trace;

  {
    auto in = open_in(fs::path(dir) / "run.json");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw SchemaVersionMismatch(std::string("run.json unreadable: ") + e.what());
    }
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != kTraceSchemaVersion)
      throw SchemaVersionMismatch("unsupported trace schema version");
    trace.m = j["m"].get<int>();
    trace.d = j["d"].get<int>();
    trace.thin = j["thin"].get<int>();
  }

  {
    auto in = open_in(fs::path(dir) / "samples.csv");
    std::string line;
    std::getline(in, line);  // header
    Eigen::MatrixXd current(trace.m, trace.d);
    int row = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');  // iteration
      std::getline(ss, cell, ',');
      const int agent = std::stoi(cell);
      for (int j = 0; j < trace.d; ++j) {
        std::getline(ss, cell, ',');
        current(agent, j) = std::stod(cell);
      }
      if (++row == trace.m) {
        trace.samples.push_back(current);
        row = 0;
      }
    }
    if (row != 0) throw IoError("samples.csv truncated mid-record");
  }

  {
    auto in = open_in(fs::path(dir) / "accepts.csv");
    std::string line;
    std::getline(in, line);
    std::vector<std::uint8_t> current(trace.m);
    int row = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      std::getline(ss, cell, ',');
      const int agent = std::stoi(cell);
      std::getline(ss, cell, ',');
      current[agent] = static_cast<std::uint8_t>(std::stoi(cell));
      if (++row == trace.m) {
        trace.accepts.push_back(current);
        row = 0;
      }
    }
    if (row != 0) throw IoError("accepts.csv truncated mid-record");
  }

  {
    auto in = open_in(fs::path(dir) / "metrics.csv");
    std::string line;
    if (!std::getline(in, line)) throw IoError("metrics.csv missing header");
    std::vector<std::string> names;
    {
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');  // iteration column
      while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      for (const auto& name : names) {
        if (!std::getline(ss, cell, ',')) cell.clear();
        if (!cell.empty()) trace.metrics[name].push_back(std::stod(cell));
      }
    }
  }

  return trace;
}

}  // namespace dmhmc
