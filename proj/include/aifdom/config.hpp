#pragma once

// Experiment configuration: a JSON document with model, simulate, region,
// analysis and output blocks. Unknown keys are rejected by name.

#include "aifdom/circuit_models.hpp"
#include "aifdom/dominance.hpp"
#include "aifdom/ode_sim.hpp"
#include "aifdom/regions.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aifdom {

enum class ModelKind { fop, all_seq, bistable };

struct ModelConfig {
  ModelKind kind = ModelKind::fop;
  ControllerParams controller;
  FopPlantParams fop;
  AllSeqPlantParams all_seq;
  double theta2 = 1.0;  ///< sensing gain of the all-sequestration loop
  BistableParams bistable;
  std::optional<HillParams> hill;
  ParamBox uncertainty;
};

struct SimulateConfig {
  Vector x0;
  double t_end = 100.0;
  IntegratorSettings settings;
  ClassifyOptions classify;
};

struct RegionConfig {
  /// Explicit vertex list, or a hull of the simulated trajectory.
  bool hull_of_simulation = false;
  Region region;
  ProxyRegionSpec spec;
  /// Halvings applied by commands that do not search over margins.
  int halvings = 0;
};

struct AnalysisConfig {
  double lambda = 0.0;
  std::optional<int> p;
  double loop_gain = 1.0;
  double omega_max = 100.0;
  int n_samples = 2000;
  std::vector<double> gains;
  int grid_density = 10;
  /// Explicit controller states for frequency-domain commands; region
  /// vertices are used when empty.
  std::vector<Eigen::Vector2d> z_points;
  std::optional<double> epsilon;
};

struct ExperimentConfig {
  std::string name;
  ModelConfig model;
  std::optional<SimulateConfig> simulate;
  std::optional<RegionConfig> region;
  AnalysisConfig analysis;
  std::string output_dir = "out";
  std::string hash;  ///< SHA-256 of the raw configuration text
};

/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

SystemModel build_model(const ModelConfig& m);

/// Equilibria found by Newton polishing from the closed-form fixed point (linear
/// plant) and from the post-transient mean of `traj`, with lambda = 0 spectra.
/// Guesses that fail to converge are dropped.
std::vector<EquilibriumInfo> candidate_equilibria(const ModelConfig& m, const SystemModel& model,
                                                  const Trajectory* traj = nullptr);

std::string sha256_hex(const std::string& data);

}  // namespace aifdom
