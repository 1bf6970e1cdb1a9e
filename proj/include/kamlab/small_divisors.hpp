#pragma once

// Diophantine weights on the sparse tangential lattice, exhaustive resonance
// enumeration, the K₀ supremum behind the homological estimate, Monte Carlo
// and analytic measure estimates for the excluded frequency set, and the
// two auxiliary inequalities used by those estimates.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kamlab/hamiltonian.hpp"

namespace kamlab {

enum class BracketConvention {
  Max,   // ⟨x⟩ = max(1, |x|)
  Sqrt,  // ⟨x⟩ = √(1 + x²)
};

struct DiophParams {
  double gamma = 0.01;
  double tau = 2.0;
  BracketConvention bracket = BracketConvention::Max;

  /// Throws DomainError unless 0 < γ ≤ 1/2 and τ ≥ 3/2.
  void validate() const;
};

double angle_bracket(double x, BracketConvention c);

/// Which quadratic-moment filter the enumeration applies.
enum class QuadFilter {
  None,
  Strict,   // |𝚍(ℓ)| < |ℓ|: the resonant set of the measure estimate
  Relaxed,  // |𝚍(ℓ)| ≤ 2|ℓ|: the constraint set of K₀
};

struct ResonanceBudget {
  int l_max = 8;
  int max_normal = 2;  // Σ_{j∈S^c} |ℓ_j| ≤ max_normal (at most 2)
  QuadFilter filter = QuadFilter::Strict;
};

/// ℓ = ℓ^k + σ₁e_{j₁} + σ₂e_{j₂} with j₁ ≤ j₂ normal; σ = 0 marks an unused slot.
struct Resonance {
  SignedIndexVector l;
  SignedIndexVector k;
  int sigma1 = 0;
  Mode j1 = 0;
  int sigma2 = 0;
  Mode j2 = 0;

  SignedIndexVector recombined() const;
};

struct EnumerationStats {
  std::size_t k_visited = 0;
  std::size_t count = 0;
  /// Every ℓ had even |ℓ| ≥ 4.
  bool parity_ok = true;
  /// Largest completions(k) / (36(|k|+2)) over k.
  double worst_completion_ratio = 0.0;
  std::size_t completion_violations = 0;
  int max_completions = 0;
};

/// γ Π_{j∈S} (1 + ℓ_j²⟨log₂ j⟩²)^{−τ}. Throws DomainError on ℓ = 0.
double dioph_weight(const SignedIndexVector& l, const ModeSet& modes, const DiophParams& params);

/// All ℓ ≠ 0 with 0 < |ℓ| ≤ L_max, mass = momentum = 0, at most max_normal
/// normal units, and the budget's quadratic-moment filter. Output is sorted.
std::vector<Resonance> enumerate_resonant_indices(const ModeSet& modes, const ResonanceBudget& budget,
                                                  EnumerationStats* stats = nullptr);

struct DcWitness {
  SignedIndexVector l;
  double divisor = 0.0;  // |ω·ℓ|
  double weight = 0.0;
  double margin() const { return divisor / weight; }
};

struct DcReport {
  bool ok = true;
  std::size_t checked = 0;
  std::size_t prefiltered = 0;  // skipped because |𝚍(ℓ)| ≥ |ℓ|
  std::size_t violations = 0;
  std::optional<DcWitness> worst;
};

/// Checks |ω·ℓ| ≥ dioph_weight(ℓ) on the budget. ℓ with |𝚍(ℓ)| ≥ |ℓ| are
/// satisfied automatically inside the box and only counted.
DcReport verify_dc(const FrequencyVector& omega, const DiophParams& params, const ResonanceBudget& budget);
DcReport verify_dc(const FrequencyVector& omega, const DiophParams& params, std::span<const Resonance> resonances);

struct K0Witness {
  MultiIndex alpha;
  MultiIndex beta;
  Mode q = 0;
  double divisor = 0.0;
};

struct K0Audit {
  double delta = 0.0;
  double measured_sup = 0.0;
  bool empty = true;
  std::size_t candidates = 0;
  K0Witness witness;
};

/// (⟨⟨q⟩⟩² / Π_j ⟨⟨j⟩⟩^{α_j+β_j})^δ · γ / |ω·(α−β)|.
double k0_value(const MultiIndex& alpha, const MultiIndex& beta, Mode q, double delta, const FrequencyVector& omega,
                double gamma);

/// The (α, β) pairs the K₀ supremum ranges over: α − β from the budget's
/// enumeration, plus (when max_common ≥ 1) one common unit e_j added to both
/// sides as long as α + β keeps at most max_normal normal exponents.
std::vector<MonomialKey> k0_candidate_keys(const ModeSet& modes, const ResonanceBudget& budget, int max_common = 1);

/// Brute-force supremum over (α, β, q) with α − β in the budget (the budget's
/// filter should be Relaxed), common parts of total ≤ max_common, and at most
/// max_normal normal exponents in α + β.
K0Audit k0_supremum(double delta, const DiophParams& params, const ResonanceBudget& budget,
                    const FrequencyVector& omega, int max_common = 1);

/// Fit of K₀(δ) ≤ c·exp((c/δ) ln²(1/δ)).
struct K0Curve {
  double c = 0.0;
  /// log of the fitted bound at each audited δ.
  std::vector<double> log_bound;
};
double k0_bound_exponent(double delta);
/// Smallest c ≥ 1 for which the curve dominates every audit.
K0Curve fit_k0_curve(std::span<const K0Audit> audits);

/// Normal frequencies Ω (indexed by slot; tangential entries ignored) as a
/// function of the tangential ν (indexed by slot as well).
struct NormalFrequencyMap {
  std::function<std::vector<double>(std::span<const double> nu)> fn;
  bool depends_on_nu = false;

  /// Ω_j = j² + W_j.
  static NormalFrequencyMap shifted_squares(const ModeSet& modes, std::vector<double> w);
};

/// Union-of-slabs estimator: a resonance ℓ is drawn with probability
/// proportional to the exact volume of its slab {|ω·ℓ| < w_ℓ} ∩ Q_S, a point
/// uniformly inside it, and the point is weighted by 1/#(slabs containing it).
struct ImportanceEstimate {
  std::size_t n_samples = 0;
  double slab_volume_sum = 0.0;  // Σ_ℓ vol(slab_ℓ), exact
  double fraction = 0.0;         // estimate of vol(∪ slab_ℓ)
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t rejection_draws = 0;
};

struct MeasureReport {
  double gamma = 0.0;
  double tau = 0.0;
  int l_max = 0;
  std::size_t n_resonances = 0;
  std::size_t n_samples = 0;
  std::size_t excluded = 0;
  double excluded_fraction = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Σ_{ℓ∈A} γ Π (1+|ℓ_{2^i}|²⟨i⟩²)^{−τ} over the enumerated set.
  double analytic_sum = 0.0;
  /// 72γ Σ_{0<|k|≤L_max} Π (1+|k_i|²⟨i⟩²)^{−(τ−1/2)} over the tangential sites.
  double analytic_bound = 0.0;
  std::optional<DcWitness> worst_witness;  // smallest margin seen across samples
  /// Present when Ω does not depend on ν.
  std::optional<ImportanceEstimate> importance;
};

/// ν uniform in Π_{j∈S}(j²−½, j²+½); counts samples where (ν, Ω(ν)) fails the
/// Diophantine check. Shards of fixed size carry independent RNG streams
/// derived from the seed, so counts do not depend on the worker count.
MeasureReport measure_estimate(const ModeSet& modes, const DiophParams& params, const ResonanceBudget& budget,
                               std::size_t n_samples, std::uint64_t seed, const NormalFrequencyMap& omega_map,
                               int workers = 1);

/// P(a·y ∈ [lo, hi]) for y uniform in [0,1]^n and a_i > 0.
double box_sum_probability(std::span<const double> a, double lo, double hi);

/// 95% Wilson score interval.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n);

struct AuxReport {
  std::size_t trials = 0;
  std::size_t sum_product_violations = 0;  // Σx / Πx^a ≤ x₁^{1−a} + 2/(a x₁^a), a uniform in (0,1)
  std::size_t sum_product_half_violations = 0;  // same with a = 1/2
  double max_violating_a = 0.0;
  double min_violating_a = 1.0;
  std::vector<double> first_counterexample;  // a followed by x
  std::size_t log_growth_violations = 0;   // −δy + log(1+y²) ≤ 0 for y ≥ 4δ^{-1}log(1/δ)
  double worst_sum_product_slack = 0.0;    // min of rhs − lhs (relative)
  double worst_log_growth_value = 0.0;     // max of −δy + log(1+y²)
  bool ok() const { return sum_product_violations == 0 && log_growth_violations == 0; }
  bool ok_at_half() const { return sum_product_half_violations == 0 && log_growth_violations == 0; }
};

AuxReport aux_lemma_validators(std::size_t trials, std::uint64_t seed);

/// Σ x_l / Π x_l^a for the sum-product inequality (x sorted or not).
double sum_over_product(std::span<const double> x, double a);

}  // namespace kamlab
