#include "kamlab/homological.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace kamlab {

NonDiophantineError::NonDiophantineError(SignedIndexVector l, double divisor, double weight)
    : Error("not Diophantine for this term: l = " + l.to_string() + ", |w.l| = " + std::to_string(divisor) +
            " < " + std::to_string(weight)),
      l_(std::move(l)),
      divisor_(divisor),
      weight_(weight) {}

HamiltonianPoly apply_Lw(const HamiltonianPoly& f, const FrequencyVector& omega) {
  return f.with_constant(0.0).mapped([&](const Term& t) {
    return Complex{0.0, omega.dot(t.key.alpha, t.key.beta)} * t.coeff;
  });
}

namespace {

int normal_exponents(const MonomialKey& k, const ModeSet& modes) {
  int n = 0;
  (k.alpha + k.beta).for_each([&](Mode j, int e) {
    if (!modes.is_tangential(j)) n += e;
  });
  return n;
}

HomologicalSolution invert(const HamiltonianPoly& g, const FrequencyVector& omega, const HomologicalParams& params,
                           bool with_stats) {
  const ModeSet& modes = g.modes();
  HomologicalSolution sol;
  sol.min_divisor = std::numeric_limits<double>::infinity();
  PolyBuilder b(modes, g.degree_cap());
  b.reserve(g.size());
  for (const Term& t : g.terms()) {
    if (t.key.is_kernel()) {
      throw PreconditionError("solve_homological: kernel term (alpha, beta) = (" + t.key.alpha.to_string() + ", " +
                              t.key.beta.to_string() + ")");
    }
    if (normal_exponents(t.key, modes) > 2) {
      throw PreconditionError("solve_homological: more than two normal exponents in (" + t.key.alpha.to_string() +
                              ", " + t.key.beta.to_string() + ")");
    }
    const double d = omega.dot(t.key.alpha, t.key.beta);
    const double ad = std::abs(d);
    if (params.enforce_dioph || with_stats) {
      const SignedIndexVector l = SignedIndexVector::difference(t.key.alpha, t.key.beta);
      if (params.enforce_dioph) {
        const double w = dioph_weight(l, modes, params.dioph);
        if (ad < w) throw NonDiophantineError(l, ad, w);
      }
      if (with_stats) {
        if (ad < sol.min_divisor) {
          sol.min_divisor = ad;
          sol.min_divisor_index = l;
        }
        ++sol.histogram[static_cast<int>(std::floor(std::log10(ad)))];
      }
    }
    b.add_trusted(t.key, t.coeff / Complex{0.0, d});
  }
  sol.F = b.build(PruneRule{0.0, 0.0});
  return sol;
}

}  // namespace

HamiltonianPoly invert_Lw(const HamiltonianPoly& g, const FrequencyVector& omega, const HomologicalParams& params) {
  return invert(g, omega, params, false).F;
}

HomologicalSolution solve_homological(const HamiltonianPoly& g, const FrequencyVector& omega,
                                      const HomologicalParams& params, double delta) {
  HomologicalSolution sol = invert(g, omega, params, true);
  const double ng = weighted_norm(g, params.norm);
  if (ng > 0.0) sol.norm_ratio = weighted_norm(sol.F, {params.norm.r, params.norm.p + delta}) / ng;
  return sol;
}

std::vector<NormAuditRow> solver_norm_audit(const FrequencyVector& omega, const HomologicalParams& params,
                                            const ResonanceBudget& budget, std::span<const double> delta_grid,
                                            const NormAuditOptions& options) {
  const ModeSet& modes = omega.modes();
  const auto keys = k0_candidate_keys(modes, budget, options.max_common);
  int cap = 2;
  for (const auto& k : keys) cap = std::max(cap, k.degree());

  std::vector<NormAuditRow> rows;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, keys.empty() ? 0 : keys.size() - 1);
  std::uniform_int_distribution<int> n_terms(1, std::max(1, options.max_terms));
  std::normal_distribution<double> g01(0.0, 1.0);

  // nearby ω for the two-point Lipschitz quotient
  std::vector<double> shifted(omega.values().begin(), omega.values().end());
  for (double& v : shifted) v += options.lipschitz_step * g01(rng);
  const FrequencyVector omega2(modes, shifted);
  const double step = omega.sup_distance(omega2);

  HomologicalParams lax = params;
  lax.enforce_dioph = false;

  for (double delta : delta_grid) {
    NormAuditRow row;
    row.delta = delta;
    row.k0 = k0_supremum(delta, params.dioph, budget, omega, options.max_common);
    row.bound = row.k0.measured_sup / params.dioph.gamma;
    if (keys.empty()) {
      rows.push_back(row);
      continue;
    }
    for (std::size_t s = 0; s < options.samples_per_delta; ++s) {
      PolyBuilder b(modes, cap);
      const int n = n_terms(rng);
      for (int t = 0; t < n; ++t) {
        const MonomialKey& k = keys[pick(rng)];
        const Complex c{g01(rng), g01(rng)};
        b.add_trusted(k, c);
        b.add_trusted(k.conjugate(), std::conj(c));
      }
      const HamiltonianPoly g = b.build(PruneRule{0.0, 0.0});
      const HomologicalSolution sol = solve_homological(g, omega, params, delta);
      ++row.samples;
      row.worst_ratio = std::max(row.worst_ratio, sol.norm_ratio);
      if (sol.norm_ratio > row.bound * (1.0 + 1e-12)) ++row.violations;

      const NormParams shifted_norm{params.norm.r, params.norm.p + delta};
      const HamiltonianPoly f2 = invert_Lw(g, omega2, lax);
      const double ng = weighted_norm(g, params.norm);
      if (ng > 0.0 && step > 0.0) {
        const double q = weighted_norm(sol.F - f2, shifted_norm) / (step * ng);
        row.worst_lipschitz_quotient = std::max(row.worst_lipschitz_quotient, q);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace kamlab
