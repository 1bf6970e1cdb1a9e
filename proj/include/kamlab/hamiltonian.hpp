#pragma once

// Sparse Hamiltonian polynomials H = Σ H_{αβ} u^α ū^β over admissible
// (mass- and momentum-conserving) index pairs, with the Poisson bracket,
// the weighted majorant norm, evaluation and the NLS constructor.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "kamlab/index_algebra.hpp"

namespace kamlab {

using Complex = std::complex<double>;

struct MonomialKey {
  MultiIndex alpha;
  MultiIndex beta;

  int degree() const { return alpha.total() + beta.total(); }
  MonomialKey conjugate() const { return {beta, alpha}; }
  bool is_constant() const { return alpha.empty() && beta.empty(); }
  bool is_kernel() const { return alpha == beta; }

  friend auto operator<=>(const MonomialKey&, const MonomialKey&) = default;

  template <typename H>
  friend H AbslHashValue(H h, const MonomialKey& k) {
    return H::combine(std::move(h), k.alpha.packed(), k.beta.packed());
  }
};

struct Term {
  MonomialKey key;
  Complex coeff;
};

/// Coefficients below max(absolute, relative · max|coefficient|) are dropped.
struct PruneRule {
  double relative = 1e-14;
  double absolute = 0.0;
};

class PolyBuilder;

/// Finite sum of admissible monomials plus a scalar constant slot. Terms are
/// kept sorted by key; values are immutable once built.
class HamiltonianPoly {
 public:
  HamiltonianPoly() : HamiltonianPoly(ModeSet{}, 4) {}
  HamiltonianPoly(ModeSet modes, int degree_cap);

  const ModeSet& modes() const { return modes_; }
  int degree_cap() const { return degree_cap_; }
  double prune_eps() const { return prune_eps_; }

  std::span<const Term> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  /// No monomials and a zero constant.
  bool empty() const { return terms_.empty() && constant_ == Complex{}; }
  Complex constant() const { return constant_; }

  Complex coefficient(const MultiIndex& alpha, const MultiIndex& beta) const;
  double max_abs_coefficient() const;
  /// max |H_{αβ} − conj(H_{βα})|.
  double reality_defect() const;
  /// Largest |α|+|β| among stored monomials (0 when none).
  int max_degree() const;

  HamiltonianPoly operator+(const HamiltonianPoly& other) const;
  HamiltonianPoly operator-(const HamiltonianPoly& other) const;
  HamiltonianPoly operator*(Complex s) const;
  HamiltonianPoly operator-() const { return *this * Complex{-1.0}; }

  HamiltonianPoly with_constant(Complex c) const;
  HamiltonianPoly with_degree_cap(int cap) const;

  /// Keeps the terms for which pred(term) holds; the constant is kept iff keep_constant.
  HamiltonianPoly filtered(const std::function<bool(const Term&)>& pred, bool keep_constant) const;
  /// Replaces each coefficient by f(term); zero results are dropped.
  HamiltonianPoly mapped(const std::function<Complex(const Term&)>& f) const;

 private:
  friend class PolyBuilder;

  ModeSet modes_;
  int degree_cap_;
  double prune_eps_ = 0.0;
  std::vector<Term> terms_;
  Complex constant_{};
};

/// Accumulates monomials (merging duplicates) and produces a sorted, pruned
/// HamiltonianPoly. Monomials above the degree cap are silently discarded.
class PolyBuilder {
 public:
  PolyBuilder(ModeSet modes, int degree_cap);

  /// Validates admissibility and mode support.
  void add(const MonomialKey& key, Complex c);
  /// Trusted fast path for keys produced by admissibility-preserving operations.
  void add_trusted(const MonomialKey& key, Complex c);
  void add_constant(Complex c) { constant_ += c; }
  void add(const HamiltonianPoly& h, Complex scale = Complex{1.0});
  void reserve(std::size_t n) { acc_.reserve(n); }

  /// With enforce_reality the output satisfies H_{αβ} = conj(H_{βα}) exactly
  /// by averaging each conjugate pair.
  HamiltonianPoly build(PruneRule rule = {}, bool enforce_reality = false);
  /// Sum of |coefficient| dropped by the last build().
  double dropped_mass() const { return dropped_mass_; }

 private:
  ModeSet modes_;
  int degree_cap_;
  absl::flat_hash_map<MonomialKey, Complex> acc_;
  Complex constant_{};
  double dropped_mass_ = 0.0;
};

/// Weighted norm parameters: u_{p,j}(r) = r ⟨⟨j⟩⟩^{-p}.
struct NormParams {
  double r = 1.0;
  double p = 1.5;

  double weight(Mode j) const;
};

/// f(y) = Σ_{d≥1} f^(d) y^d on |y| ≤ R; coeffs[d-1] = f^(d).
struct NonlinearityModel {
  std::vector<double> coeffs;
  double radius = 1.0;
};

/// Per-mode real frequencies ω_j on a ModeSet.
class FrequencyVector {
 public:
  FrequencyVector() = default;
  FrequencyVector(ModeSet modes, std::vector<double> values);
  /// ω_j = j².
  static FrequencyVector integer_squares(const ModeSet& modes);

  const ModeSet& modes() const { return modes_; }
  double operator[](Mode j) const { return values_[modes_.slot(j)]; }
  std::span<const double> values() const { return values_; }
  FrequencyVector with(Mode j, double value) const;

  double dot(const SignedIndexVector& l) const;
  /// ω · (α − β).
  double dot(const MultiIndex& alpha, const MultiIndex& beta) const;
  /// |ω_j − j²| < 1/2 for every mode.
  bool in_box() const;
  /// sup_j |ω_j − ω'_j|.
  double sup_distance(const FrequencyVector& other) const;

 private:
  ModeSet modes_;
  std::vector<double> values_;
};

/// Complex field vector indexed by ModeSet slot.
using FieldVector = std::vector<Complex>;

struct Evaluation {
  Complex value;
  FieldVector field;
};

/// D(ω) = Σ_j ω_j |u_j|².
HamiltonianPoly frequency_hamiltonian(const FrequencyVector& omega, int degree_cap);

/// H_V = Σ (j² + V_j)|u_j|² + ∫ F(|u|²) dx/2π truncated to the mode window.
HamiltonianPoly build_nls(const NonlinearityModel& model, std::span<const double> potential,
                          const ModeSet& modes, int degree_cap);

/// {F, G} = i Σ_j (∂_{ū_j}F ∂_{u_j}G − ∂_{u_j}F ∂_{ū_j}G), so that
/// {D(ω), u^α ū^β} = i ω·(α−β) u^α ū^β. Truncated to the smaller degree cap.
HamiltonianPoly poisson_bracket(const HamiltonianPoly& f, const HamiltonianPoly& g);

/// ½ sup_j Σ |H_{αβ}| (α_j+β_j) u_p^{α+β−2e_j}; the constant slot is ignored.
double weighted_norm(const HamiltonianPoly& h, const NormParams& params);

/// sup over samples of the weighted norm plus γ times the largest pairwise
/// difference quotient in the sup metric on ω.
double lipschitz_norm(const std::function<HamiltonianPoly(const FrequencyVector&)>& family,
                      std::span<const FrequencyVector> samples, double gamma, const NormParams& params);

/// Value H(u) and Hamiltonian field u̇_j = −i ∂H/∂ū_j.
Evaluation evaluate_and_field(const HamiltonianPoly& h, std::span<const Complex> u);
Complex evaluate(const HamiltonianPoly& h, std::span<const Complex> u);

/// |f|_R = Σ_d |f^(d)| R^d.
double f_majorant(const NonlinearityModel& model);
/// ε = |f|_R r² / (γ R).
double smallness_parameter(const NonlinearityModel& model, double gamma, double r);

}  // namespace kamlab
