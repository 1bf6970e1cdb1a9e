#pragma once

// The Lie derivative L_ω = {D(ω), ·}, its inverse on the range, and the
// audit comparing realized (r, p) → (r, p+δ) norm ratios against γ⁻¹K₀(δ).

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "kamlab/error.hpp"
#include "kamlab/small_divisors.hpp"

namespace kamlab {

/// Raised when |ω·ℓ| falls below the Diophantine weight of ℓ.
class NonDiophantineError : public Error {
 public:
  NonDiophantineError(SignedIndexVector l, double divisor, double weight);
  const SignedIndexVector& index() const { return l_; }
  double divisor() const { return divisor_; }
  double weight() const { return weight_; }

 private:
  SignedIndexVector l_;
  double divisor_;
  double weight_;
};

/// Counts of |ω·(α−β)| per decade: key k holds divisors in [10^k, 10^{k+1}).
using DivisorHistogram = std::map<int, std::size_t>;

struct HomologicalSolution {
  HamiltonianPoly F;
  double min_divisor = 0.0;  // +inf when G has no monomials
  std::optional<SignedIndexVector> min_divisor_index;
  DivisorHistogram histogram;
  /// ‖F‖_{r,p+δ} / ‖G‖_{r,p}; 0 for G = 0.
  double norm_ratio = 0.0;
};

struct HomologicalParams {
  DiophParams dioph;
  NormParams norm;
  /// Refuse divisors below the Diophantine weight.
  bool enforce_dioph = true;
};

/// Multiplies each coefficient by i ω·(α−β); kernel terms and the constant vanish.
HamiltonianPoly apply_Lw(const HamiltonianPoly& f, const FrequencyVector& omega);

/// F_{αβ} = G_{αβ} / (i ω·(α−β)). G must have no kernel monomials (the
/// constant slot is ignored) and at most two normal exponents per monomial.
HamiltonianPoly invert_Lw(const HamiltonianPoly& g, const FrequencyVector& omega, const HomologicalParams& params);
HomologicalSolution solve_homological(const HamiltonianPoly& g, const FrequencyVector& omega,
                                      const HomologicalParams& params, double delta);

struct NormAuditRow {
  double delta = 0.0;
  K0Audit k0;
  double bound = 0.0;  // γ⁻¹ K₀(δ)
  double worst_ratio = 0.0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// Largest two-point difference quotient ‖L_ω⁻¹G − L_ω'⁻¹G‖_{r,p+δ} / (|ω−ω'| ‖G‖_{r,p}).
  double worst_lipschitz_quotient = 0.0;
};

struct NormAuditOptions {
  std::size_t samples_per_delta = 200;
  int max_terms = 6;
  std::uint64_t seed = 1;
  int max_common = 1;
  double lipschitz_step = 1e-7;
};

/// For each δ, random real G built from the K₀ candidate set of the budget;
/// records the worst realized norm ratio and compares it with γ⁻¹K₀(δ).
std::vector<NormAuditRow> solver_norm_audit(const FrequencyVector& omega, const HomologicalParams& params,
                                            const ResonanceBudget& budget, std::span<const double> delta_grid,
                                            const NormAuditOptions& options = {});

}  // namespace kamlab
