#pragma once

#include <map>
#include <string>

#include "dmhmc/datasets.hpp"
#include "dmhmc/network.hpp"
#include "dmhmc/sampler.hpp"

namespace dmhmc {

enum class ModelKind { gaussian, gmm, linreg, logreg, mlp };

/// Fully resolved experiment: the flat key-value view (exactly what run.json
/// records) plus the constructed objects the samplers consume.
struct Experiment {
  // resolved key-value pairs, "section.key" -> value
  std::map<std::string, std::string> keys;

  std::string algo = "dmala";  // dmala | hmc | ula
  ModelKind model_kind = ModelKind::gaussian;
  Graph graph;
  MixingMatrix w;
  ShardList shards;
  Dataset train;
  Dataset test;
  int n_classes = 0;
  int hidden = 0;
  SamplerConfig sampler;
  UlaSchedule ula;
  int leapfrog_steps = 1;
  Eigen::MatrixXd omega0;  // m x d
  std::string out_dir = "out";

  int m() const { return static_cast<int>(shards.size()); }
  int dim() const { return shards.empty() ? 0 : shards.front()->dim(); }
};

/// Loads an INI-style config ([network]/[model]/[sampler]/[output] sections,
/// key = value lines) or a previously written run.json, applies the preset's
/// defaults if one is named, validates, and constructs the experiment.
/// Unknown keys are rejected.
Experiment load_config(const std::string& path);

/// Resolves a preset name (gmm_5agents, linreg_feature_split, logreg_partial,
/// logreg_ring, bnn_class_split) with optional overriding key-values.
Experiment resolve_experiment(std::map<std::string, std::string> keys);

std::map<std::string, std::string> preset_keys(const std::string& name);

}  // namespace dmhmc
