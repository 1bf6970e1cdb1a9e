#pragma once

// Experiment configuration: one JSON document, every field optional, each
// validated and echoed back with its default filled in.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kamlab/scenario.hpp"

namespace kamlab::lab {

using nlohmann::json;

struct ExperimentConfig {
  // modes
  int h_max = 4;
  int cutoff = 16;
  // torus; r and p default to r0/(2√2) and p_inf
  std::optional<double> torus_r;
  std::optional<double> torus_p;
  std::string profile = "power-law";  // flat | power-law
  std::optional<double> exponent;
  double fill = 0.5;
  // nonlinearity
  std::vector<double> coeffs{1.0};
  double radius = 1.0;
  double eps0 = 1e-4;  // ≤ 0 keeps the coefficients as given
  // W_j for j = −M..M; drawn from the seed when absent
  std::optional<std::vector<double>> W;
  // dioph
  double gamma = 0.01;
  double tau = 2.0;
  int l_max = 8;
  std::string bracket = "max";  // max | sqrt
  KamSchedule schedule;
  // kam
  int degree_cap = 6;
  int order_cap = 8;
  double floor = 1e-13;
  double prune = 1e-14;
  double smallness_limit = 1e-2;
  // run
  int n_steps = 4;
  std::uint64_t seed = 1;
  std::size_t n_samples = 10000;
  bool frequency_map = true;
  int conjugacy_points = 10;
  int residual_phases = 20;
  // command options
  std::vector<double> measure_gammas{0.1, 0.05, 0.025};
  std::vector<double> k0_deltas{0.1, 0.2, 0.4, 0.8};
  int k0_max_common = 1;
  std::string dioph_omega = "scenario";     // scenario | squares
  std::string verify_target = "normal-form";  // normal-form | frequency
  double trajectory_t_max = 6.283185307179586;
  int trajectory_n_t = 64;
  int trajectory_n_x = 32;
  std::string out_dir = "kamlab-out";

  std::vector<std::string> warnings;
};

/// Raised for schema and range violations; the message names the field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::string& path);

/// Draws W from the seed when it was not given and reruns the checks that
/// depend on it. Call after flag overrides.
void resolve(ExperimentConfig& cfg);

/// Every field, defaults included; parse_config(to_json(c)) reproduces c.
json to_json(const ExperimentConfig& cfg);

ScenarioSpec scenario_spec(const ExperimentConfig& cfg);
KamParams kam_params(const ExperimentConfig& cfg);
DiophParams dioph_params(const ExperimentConfig& cfg, double gamma);

}  // namespace kamlab::lab
