#pragma once

// The standard experiment: a truncated NLS on a sparse torus with random
// Diophantine tangential frequencies and a normal potential W.

#include <cstdint>
#include <string>
#include <vector>

#include "kamlab/kam.hpp"

namespace kamlab {

enum class ActionProfile { Flat, PowerLaw };

struct ScenarioSpec {
  int h_max = 4;
  int cutoff = 16;
  KamSchedule schedule;
  /// Torus ball; r ≤ 0 means r₀/(2√2), p ≤ 0 means p_∞.
  double torus_r = 0.0;
  double torus_p = 0.0;
  double fill = 0.5;
  ActionProfile profile = ActionProfile::PowerLaw;
  double exponent = 0.0;  // ≤ 0 means the torus p
  NonlinearityModel f{{1.0}, 1.0};
  /// Rescale f so that ε₀ equals this; ≤ 0 keeps f as given.
  double eps0 = 1e-4;
  DiophParams dioph;
  int l_max = 8;
  /// W_j by mode over the window (tangential entries ignored); empty means
  /// U(−1/4, 1/4) drawn from the seed.
  std::vector<double> W;
  std::uint64_t seed = 1;
  int max_reseeds = 200;
};

struct Scenario {
  ModeSet modes;
  TorusData torus;
  FrequencyVector omega;
  std::vector<double> nu;  // by slot, tangential entries
  std::vector<double> W;   // by slot, normal entries
  NonlinearityModel f;     // after rescaling
  HamiltonianPoly g0;      // nonlinear part of H_V
  double eps0 = 0.0;
  int reseeds = 0;
  std::vector<std::string> warnings;
};

/// H_V − Σ j²|u_j|² at V = 0: the nonlinear part of the truncated NLS.
HamiltonianPoly nls_perturbation(const NonlinearityModel& f, const ModeSet& modes, int degree_cap);

/// Builds the scenario; ν is redrawn until (ν, j² + W) passes verify_dc on
/// the budget. Throws DomainError for |W_j| > 1/4 and DegenerateInputError
/// when no Diophantine ν is found.
Scenario make_scenario(const ScenarioSpec& spec, const KamParams& params);

/// λ(ω) = total counterterm of run_kam at ω with the scenario's torus and G₀.
CountertermMap kam_counterterm_map(const Scenario& sc, const KamSchedule& schedule, const KamParams& params,
                                   int n_steps);

}  // namespace kamlab
