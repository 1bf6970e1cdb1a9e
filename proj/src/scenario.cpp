#include "kamlab/scenario.hpp"

#include <cmath>
#include <random>

namespace kamlab {

HamiltonianPoly nls_perturbation(const NonlinearityModel& f, const ModeSet& modes, int degree_cap) {
  const std::vector<double> zero(modes.size(), 0.0);
  const HamiltonianPoly h = build_nls(f, zero, modes, degree_cap);
  return h.filtered([](const Term& t) { return t.key.degree() > 2; }, false);
}

Scenario make_scenario(const ScenarioSpec& spec, const KamParams& params) {
  spec.schedule.validate();
  spec.dioph.validate();
  Scenario sc;
  sc.modes = ModeSet(spec.h_max, spec.cutoff);
  const ModeSet& modes = sc.modes;

  const double r = spec.torus_r > 0.0 ? spec.torus_r : spec.schedule.r0 / (2.0 * std::sqrt(2.0));
  const double p = spec.torus_p > 0.0 ? spec.torus_p : spec.schedule.p_inf();
  if (r > spec.schedule.r0 / (2.0 * std::sqrt(2.0)) * (1.0 + 1e-12)) {
    throw DomainError("torus.r must satisfy r <= r0/(2 sqrt 2)");
  }
  const double exponent =
      spec.profile == ActionProfile::Flat ? p : (spec.exponent > 0.0 ? spec.exponent : p);
  sc.torus = TorusData::power_law(modes, {r, p}, spec.fill, exponent);

  std::mt19937_64 rng(spec.seed);
  sc.W.assign(modes.size(), 0.0);
  if (spec.W.empty()) {
    std::uniform_real_distribution<double> uw(-0.25, 0.25);
    for (Mode j : modes.normal()) sc.W[modes.slot(j)] = uw(rng);
  } else {
    if (static_cast<int>(spec.W.size()) != modes.size()) throw DomainError("W must have one entry per mode");
    for (Mode j : modes.normal()) {
      const double w = spec.W[modes.slot(j)];
      if (!(std::abs(w) <= 0.25)) throw DomainError("W[" + std::to_string(j) + "] outside [-1/4, 1/4]");
      sc.W[modes.slot(j)] = w;
    }
  }
  if (sc.W[modes.slot(0)] == 0.0) sc.warnings.push_back("W_0 = 0: torus existence needs W_0 != 0");

  std::uniform_real_distribution<double> un(-0.5, 0.5);
  const auto resonances = enumerate_resonant_indices(modes, ResonanceBudget{spec.l_max, 2, QuadFilter::None});
  for (sc.reseeds = 0;; ++sc.reseeds) {
    if (sc.reseeds > spec.max_reseeds) {
      throw DegenerateInputError("no Diophantine frequency vector found after " + std::to_string(spec.max_reseeds) +
                                 " draws");
    }
    std::vector<double> w(modes.size());
    sc.nu.assign(modes.size(), 0.0);
    for (Mode j : modes.all()) {
      const int s = modes.slot(j);
      if (modes.is_tangential(j)) {
        sc.nu[s] = double(j) * j + un(rng);
        w[s] = sc.nu[s];
      } else {
        w[s] = double(j) * j + sc.W[s];
      }
    }
    sc.omega = FrequencyVector(modes, w);
    if (verify_dc(sc.omega, spec.dioph, resonances).ok) break;
  }

  sc.f = spec.f;
  sc.g0 = nls_perturbation(sc.f, modes, params.degree_cap);
  double eps = kam_norms(sc.g0, sc.torus, spec.schedule.norm(0), spec.dioph.gamma).eps;
  if (spec.eps0 > 0.0) {
    if (!(eps > 0.0)) throw DegenerateInputError("nonlinearity has no degree <= 0 content to rescale");
    const double k = spec.eps0 / eps;
    for (double& c : sc.f.coeffs) c *= k;
    sc.g0 = nls_perturbation(sc.f, modes, params.degree_cap);
    eps = kam_norms(sc.g0, sc.torus, spec.schedule.norm(0), spec.dioph.gamma).eps;
  }
  sc.eps0 = eps;
  return sc;
}

CountertermMap kam_counterterm_map(const Scenario& sc, const KamSchedule& schedule, const KamParams& params,
                                   int n_steps) {
  return [&sc, schedule, params, n_steps](const FrequencyVector& omega) {
    return run_kam(sc.g0, omega, sc.torus, schedule, params, n_steps).lambda;
  };
}

}  // namespace kamlab
