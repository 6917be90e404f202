#include "dmhmc/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dmhmc/rng.hpp"

namespace dmhmc {

namespace {

const std::set<std::string> kAllowedKeys = {
    "experiment.preset", "experiment.algo",
    "network.topology", "network.m", "network.scheme", "network.edges",
    "model.kind", "model.source", "model.csv_path", "model.test_csv_path",
    "model.partition", "model.prior_precision", "model.noise_precision",
    "model.n_classes", "model.hidden", "model.sigma1_sq", "model.sigma2_sq",
    "model.sigmax_sq", "model.theta1", "model.theta2", "model.n_samples",
    "model.n_test", "model.n_features", "model.blob_spread", "model.noise_sd",
    "model.data_seed", "model.init_scale",
    "sampler.epsilon", "sampler.iterations", "sampler.mh_warmup",
    "sampler.gradient_tracking", "sampler.acceptance_mode",
    "sampler.consensus_step", "sampler.mixing_schedule", "sampler.seed",
    "sampler.thin", "sampler.record_dual", "sampler.record_log_posterior",
    "sampler.leapfrog_steps", "sampler.ula_a", "sampler.ula_b",
    "sampler.ula_gamma",
    "output.dir",
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::map<std::string, std::string> keys;
  std::string line, section = "experiment";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(path + ":" + std::to_string(lineno) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    if (!kAllowedKeys.count(key))
      throw ParseError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    keys[key] = trim(line.substr(eq + 1));
  }
  return keys;
}

std::map<std::string, std::string> parse_run_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object())
    throw ParseError(path + ": missing config object");
  std::map<std::string, std::string> keys;
  for (auto& [k, v] : j["config"].items()) {
    if (!kAllowedKeys.count(k))
      throw ParseError(path + ": unknown key '" + k + "'");
    keys[k] = v.get<std::string>();
  }
  return keys;
}

// typed accessors over the key map
struct KeyView {
  const std::map<std::string, std::string>& keys;

  bool has(const std::string& k) const { return keys.count(k) > 0; }
  std::string str(const std::string& k, const std::string& dflt = "") const {
    auto it = keys.find(k);
    return it == keys.end() ? dflt : it->second;
  }
  double num(const std::string& k, double dflt) const {
    auto it = keys.find(k);
    if (it == keys.end()) return dflt;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw ValidationError(k + ": not a number: '" + it->second + "'");
    }
  }
  long integer(const std::string& k, long dflt) const {
    auto it = keys.find(k);
    if (it == keys.end()) return dflt;
    try {
      return std::stol(it->second);
    } catch (const std::exception&) {
      throw ValidationError(k + ": not an integer: '" + it->second + "'");
    }
  }
  bool flag(const std::string& k, bool dflt) const {
    auto it = keys.find(k);
    if (it == keys.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ValidationError(k + ": expected true/false");
  }
};

Graph build_graph(const KeyView& kv) {
  const int m = static_cast<int>(kv.integer("network.m", 1));
  const std::string topo = kv.str("network.topology", "complete");
  if (topo == "complete") return Graph::complete_graph(m);
  if (topo == "ring") return Graph::ring(m);
  if (topo == "path") return Graph::path(m);
  if (topo == "edges") {
    Graph g;
    g.m = m;
    std::stringstream ss(kv.str("network.edges"));
    std::string tok;
    while (std::getline(ss, tok, ';')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      const auto dash = tok.find('-');
      if (dash == std::string::npos)
        throw ValidationError("network.edges: expected 'i-j' pairs separated by ';'");
      g.add_edge(std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1)));
    }
    return g;
  }
  throw ValidationError("network.topology: unknown topology '" + topo + "'");
}

MixingScheme parse_scheme(const std::string& s) {
  if (s == "uniform_complete") return MixingScheme::uniform_complete;
  if (s == "lazy_uniform") return MixingScheme::lazy_uniform;
  if (s == "metropolis_hastings_weights") return MixingScheme::metropolis_hastings_weights;
  throw ValidationError("network.scheme: unknown scheme '" + s + "'");
}

PartitionMode parse_partition(const std::string& s) {
  if (s == "by_sample") return PartitionMode::by_sample;
  if (s == "by_class") return PartitionMode::by_class;
  if (s == "by_feature") return PartitionMode::by_feature;
  throw ValidationError("model.partition: unknown mode '" + s + "'");
}

MixingSchedule parse_schedule(const std::string& s) {
  MixingSchedule out;
  if (s == "geometric") {
    out.kind = MixingScheduleKind::geometric;
    return out;
  }
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  if (kind == "constant")
    out.kind = MixingScheduleKind::constant;
  else if (kind == "staircase")
    out.kind = MixingScheduleKind::staircase;
  else
    throw ValidationError("sampler.mixing_schedule: unknown schedule '" + s + "'");
  out.param = colon == std::string::npos ? 1 : std::stoi(s.substr(colon + 1));
  return out;
}

AcceptanceMode parse_acceptance(const std::string& s) {
  if (s == "taylor") return AcceptanceMode::taylor;
  if (s == "taylor_text") return AcceptanceMode::taylor_text;
  if (s == "second_order") return AcceptanceMode::second_order;
  if (s == "exact" || s == "exact_oracle") return AcceptanceMode::exact_oracle;
  throw ValidationError("sampler.acceptance_mode: unknown mode '" + s + "'");
}

}  // namespace

std::map<std::string, std::string> preset_keys(const std::string& name) {
  std::map<std::string, std::string> k;
  k["experiment.preset"] = name;
  if (name == "gmm_5agents") {
    k["experiment.algo"] = "dmala";
    k["network.topology"] = "complete";
    k["network.m"] = "5";
    k["network.scheme"] = "uniform_complete";
    k["model.kind"] = "gmm";
    k["model.sigma1_sq"] = "10";
    k["model.sigma2_sq"] = "1";
    k["model.sigmax_sq"] = "2";
    k["model.theta1"] = "0";
    k["model.theta2"] = "1";
    k["model.n_samples"] = "100";
    k["model.partition"] = "by_sample";
    k["sampler.epsilon"] = "0.05";
    k["sampler.iterations"] = "20000";
    k["sampler.mh_warmup"] = "1000";
  } else if (name == "linreg_feature_split") {
    k["experiment.algo"] = "dmala";
    k["network.topology"] = "complete";
    k["network.m"] = "4";
    k["network.scheme"] = "uniform_complete";
    k["model.kind"] = "linreg";
    k["model.n_samples"] = "200";
    k["model.n_features"] = "13";
    k["model.noise_sd"] = "1.0";
    k["model.noise_precision"] = "1.0";
    k["model.prior_precision"] = "1.0";
    k["model.partition"] = "by_feature";
    k["sampler.epsilon"] = "4e-4";
    k["sampler.iterations"] = "10000";
    k["sampler.mh_warmup"] = "1000";
    k["sampler.ula_a"] = "3e-7";
  } else if (name == "logreg_partial") {
    k["experiment.algo"] = "dmala";
    k["network.topology"] = "complete";
    k["network.m"] = "3";  // one feature column per agent
    k["network.scheme"] = "uniform_complete";
    k["model.kind"] = "logreg";
    k["model.n_classes"] = "3";
    k["model.n_samples"] = "400";
    k["model.partition"] = "by_feature";
    k["model.prior_precision"] = "100.0";
    k["sampler.epsilon"] = "5e-4";
    k["sampler.iterations"] = "8000";
    k["sampler.mh_warmup"] = "2000";
    k["sampler.ula_a"] = "1e-5";
  } else if (name == "logreg_ring") {
    k["experiment.algo"] = "dmala";
    k["network.topology"] = "ring";
    k["network.m"] = "5";
    k["network.scheme"] = "lazy_uniform";
    k["model.kind"] = "logreg";
    k["model.n_classes"] = "3";
    k["model.n_samples"] = "500";
    k["model.partition"] = "by_class";
    k["model.prior_precision"] = "100.0";
    k["sampler.epsilon"] = "0.003";
    k["sampler.iterations"] = "10000";
    k["sampler.mh_warmup"] = "1000";
    k["sampler.ula_a"] = "1e-4";
  } else if (name == "bnn_class_split") {
    k["experiment.algo"] = "dmala";
    k["network.topology"] = "complete";
    k["network.m"] = "2";
    k["network.scheme"] = "uniform_complete";
    k["model.kind"] = "mlp";
    k["model.hidden"] = "8";
    k["model.n_classes"] = "2";
    k["model.n_samples"] = "200";
    k["model.partition"] = "by_class";
    k["model.prior_precision"] = "10.0";
    k["model.init_scale"] = "0.1";
    k["sampler.epsilon"] = "0.02";
    k["sampler.iterations"] = "20000";
    k["sampler.mh_warmup"] = "2000";
  } else {
    throw ValidationError("unknown preset '" + name + "'");
  }
  return k;
}

Experiment resolve_experiment(std::map<std::string, std::string> keys) {
  for (const auto& [k, v] : keys)
    if (!kAllowedKeys.count(k)) throw ParseError("unknown key '" + k + "'");

  if (keys.count("experiment.preset")) {
    auto defaults = preset_keys(keys.at("experiment.preset"));
    for (auto& [k, v] : defaults)
      if (!keys.count(k)) keys[k] = v;
  }

  KeyView kv{keys};
  Experiment ex;

  ex.algo = kv.str("experiment.algo", "dmala");
  if (ex.algo != "dmala" && ex.algo != "hmc" && ex.algo != "ula")
    throw ValidationError("experiment.algo must be dmala, hmc or ula");

  // network
  ex.graph = build_graph(kv);
  ex.w = build_mixing_matrix(ex.graph,
                             parse_scheme(kv.str("network.scheme", "lazy_uniform")));
  const int m = ex.graph.m;

  // model
  const std::string kind = kv.str("model.kind", "");
  if (kind.empty()) throw ValidationError("model.kind is required");
  const std::uint64_t data_seed = kv.integer("model.data_seed", 12345);
  const double prior_prec = kv.num("model.prior_precision", 1.0);
  const double prior_share = 1.0 / m;
  int dim = 0;

  if (kind == "gmm") {
    ex.model_kind = ModelKind::gmm;
    const int n = static_cast<int>(kv.integer("model.n_samples", 100));
    auto data = generate_gmm_data(n, kv.num("model.theta1", 0.0),
                                  kv.num("model.theta2", 1.0),
                                  kv.num("model.sigmax_sq", 2.0), data_seed);
    const int base = n / m, rem = n % m;
    int pos = 0;
    for (int i = 0; i < m; ++i) {
      const int len = base + (i >= m - rem ? 1 : 0);
      std::vector<double> part(data.begin() + pos, data.begin() + pos + len);
      pos += len;
      ex.shards.push_back(gmm_shard(part, kv.num("model.sigma1_sq", 10.0),
                                    kv.num("model.sigma2_sq", 1.0),
                                    kv.num("model.sigmax_sq", 2.0), prior_share));
    }
    dim = 2;
  } else {
    // tabular models share the dataset/partition pipeline
    Dataset data;
    if (kv.str("model.source", "synthetic") == "csv") {
      data = load_csv(kv.str("model.csv_path"));
    } else if (kind == "linreg" || kind == "gaussian") {
      data = generate_linreg_data(static_cast<int>(kv.integer("model.n_samples", 200)),
                                  static_cast<int>(kv.integer("model.n_features", 5)),
                                  kv.num("model.noise_sd", 1.0), data_seed);
    } else {
      data = generate_blobs(static_cast<int>(kv.integer("model.n_samples", 300)),
                            static_cast<int>(kv.integer("model.n_classes", 3)),
                            kv.num("model.blob_spread", 1.0), data_seed);
    }
    if (kv.has("model.test_csv_path")) {
      ex.test = load_csv(kv.str("model.test_csv_path"));
    } else if (kind == "logreg" || kind == "mlp") {
      ex.test = generate_blobs(static_cast<int>(kv.integer("model.n_test", 300)),
                               static_cast<int>(kv.integer("model.n_classes", 3)),
                               kv.num("model.blob_spread", 1.0), data_seed + 1);
    }
    ex.train = data;
    auto part = partition(data, m, parse_partition(kv.str("model.partition", "by_sample")));

    ex.n_classes = static_cast<int>(kv.integer("model.n_classes", 3));
    ex.hidden = static_cast<int>(kv.integer("model.hidden", 8));
    for (const auto& shard_data : part.shards) {
      if (kind == "linreg") {
        ex.model_kind = ModelKind::linreg;
        ex.shards.push_back(linreg_shard(shard_data.X, shard_data.y,
                                         kv.num("model.noise_precision", 1.0),
                                         prior_prec, prior_share));
      } else if (kind == "logreg") {
        ex.model_kind = ModelKind::logreg;
        ex.shards.push_back(logreg_shard(shard_data.X, shard_data.labels,
                                         ex.n_classes, prior_prec, prior_share));
      } else if (kind == "mlp") {
        ex.model_kind = ModelKind::mlp;
        ex.shards.push_back(mlp_shard(shard_data.X, shard_data.labels, ex.hidden,
                                      ex.n_classes, prior_prec, prior_share));
      } else if (kind == "gaussian") {
        ex.model_kind = ModelKind::gaussian;
        const Eigen::Index f = shard_data.X.cols();
        ex.shards.push_back(gaussian_shard(Eigen::VectorXd::Zero(f),
                                           Eigen::MatrixXd::Identity(f, f),
                                           prior_share));
      } else {
        throw ValidationError("model.kind: unknown kind '" + kind + "'");
      }
    }
    dim = ex.shards.front()->dim();
  }

  // sampler
  if (!kv.has("sampler.epsilon") && ex.algo != "ula")
    throw ValidationError("sampler.epsilon is required");
  ex.sampler.epsilon = kv.num("sampler.epsilon", 1e-3);
  ex.sampler.iterations = kv.integer("sampler.iterations", 1000);
  ex.sampler.mh_warmup_iters = kv.integer("sampler.mh_warmup", 0);
  ex.sampler.gradient_tracking = kv.flag("sampler.gradient_tracking", true);
  ex.sampler.acceptance_mode = parse_acceptance(kv.str("sampler.acceptance_mode", "taylor"));
  ex.sampler.consensus_step = kv.flag("sampler.consensus_step", true);
  ex.sampler.mixing_schedule = parse_schedule(kv.str("sampler.mixing_schedule", "constant:1"));
  ex.sampler.seed = kv.integer("sampler.seed", 0);
  ex.sampler.thin = static_cast<int>(kv.integer("sampler.thin", 1));
  ex.sampler.record_dual = kv.flag("sampler.record_dual", false);
  ex.sampler.record_log_posterior = kv.flag("sampler.record_log_posterior", true);
  ex.sampler.validate();
  ex.leapfrog_steps = static_cast<int>(kv.integer("sampler.leapfrog_steps", 1));
  ex.ula.a = kv.num("sampler.ula_a", 1e-5);
  ex.ula.b = kv.num("sampler.ula_b", 0.0);
  ex.ula.gamma = kv.num("sampler.ula_gamma", 0.0);

  // initial iterate: shared across agents, drawn once from the init stream
  const double init_scale = kv.num("model.init_scale", 0.0);
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(dim);
  if (init_scale > 0.0) {
    auto eng = substream(ex.sampler.seed, RngStream::init, 0, 0);
    w0 = init_scale * standard_normal(eng, dim);
  }
  ex.omega0 = w0.transpose().replicate(m, 1);

  ex.out_dir = kv.str("output.dir", "out");
  ex.keys = std::move(keys);
  return ex;
}

Experiment load_config(const std::string& path) {
  const bool is_json =
      path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return resolve_experiment(is_json ? parse_run_json(path) : parse_ini(path));
}

}  // namespace dmhmc
