#pragma once

// Torus-centered representation of Hamiltonians: each tangential pair
// |v_j|^{2m} is re-expanded around the action I_j, so that the degree
// 2|δ| + |a| + |b| − 2 of a centered monomial is read off its key and the
// degree projections become filters.

#include <vector>

#include "kamlab/hamiltonian.hpp"

namespace kamlab {

/// Actions I_j ≥ 0 supported on the tangential sites, plus the norm
/// parameters (r, p) of the ball that must contain √I.
class TorusData {
 public:
  /// Empty torus on the default window.
  TorusData() : TorusData(ModeSet{}, std::vector<double>(ModeSet{}.size(), 0.0), NormParams{}) {}
  TorusData(ModeSet modes, std::vector<double> actions, NormParams params);
  /// I_j = (fill · r · ⟨⟨j⟩⟩^{-exponent})² on tangential j, 0 elsewhere.
  /// Requires 0 ≤ fill ≤ 1 and exponent ≥ p.
  static TorusData power_law(const ModeSet& modes, NormParams params, double fill, double exponent);

  const ModeSet& modes() const { return modes_; }
  const NormParams& params() const { return params_; }
  double action(Mode j) const { return actions_[modes_.slot(j)]; }
  std::span<const double> actions() const { return actions_; }
  /// u_j = √I_j e^{iφ_j}; phases indexed by slot.
  FieldVector point(std::span<const double> phases) const;

 private:
  ModeSet modes_;
  std::vector<double> actions_;
  NormParams params_;
};

/// Π_{j∈S}(|v_j|²−I_j)^{δ_j} u^α ū^β where the tangential parts of α and β
/// are disjoint (angular factors) and the normal parts are a, b.
struct CenteredKey {
  MultiIndex delta;
  MultiIndex alpha;
  MultiIndex beta;

  bool is_constant() const { return delta.empty() && alpha.empty() && beta.empty(); }
  bool is_kernel() const { return alpha == beta; }

  friend auto operator<=>(const CenteredKey&, const CenteredKey&) = default;

  template <typename H>
  friend H AbslHashValue(H h, const CenteredKey& k) {
    return H::combine(std::move(h), k.delta.packed(), k.alpha.packed(), k.beta.packed());
  }
};

struct CenteredTerm {
  CenteredKey key;
  Complex coeff;
};

/// 2|δ| + |a| + |b| − 2 with a, b the normal parts of alpha, beta.
int centered_degree(const CenteredKey& key, const ModeSet& modes);

class CenteredPoly {
 public:
  CenteredPoly(TorusData torus, int degree_cap);

  const TorusData& torus() const { return torus_; }
  const ModeSet& modes() const { return torus_.modes(); }
  int degree_cap() const { return degree_cap_; }
  std::span<const CenteredTerm> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  Complex constant() const { return constant_; }
  Complex coefficient(const CenteredKey& key) const;
  double max_abs_coefficient() const;
  /// Sum of |coefficient| pruned while building this value.
  double dropped_mass() const { return dropped_mass_; }

  CenteredPoly filtered(const std::function<bool(const CenteredTerm&)>& pred, bool keep_constant) const;

 private:
  friend class CenteredBuilder;

  TorusData torus_;
  int degree_cap_;
  std::vector<CenteredTerm> terms_;
  Complex constant_{};
  double dropped_mass_ = 0.0;
};

class CenteredBuilder {
 public:
  CenteredBuilder(TorusData torus, int degree_cap);
  void add(const CenteredKey& key, Complex c);
  CenteredPoly build(PruneRule rule = {});

 private:
  TorusData torus_;
  int degree_cap_;
  absl::flat_hash_map<CenteredKey, Complex> acc_;
  Complex constant_{};
};

/// Mode-diagonal correction Σ_{j∈S} λ_j(|v_j|²−I_j) + Σ_{j∈S^c} λ_j|z_j|².
class CounterTerm {
 public:
  CounterTerm() = default;
  explicit CounterTerm(ModeSet modes);
  CounterTerm(ModeSet modes, std::vector<double> lambda);

  const ModeSet& modes() const { return modes_; }
  double operator[](Mode j) const { return lambda_[modes_.slot(j)]; }
  std::span<const double> values() const { return lambda_; }
  /// sup_j |λ_j|.
  double sup_norm() const;

  CounterTerm operator+(const CounterTerm& o) const;
  CounterTerm operator-(const CounterTerm& o) const;

  /// Plain form; the constant −Σ_S λ_j I_j goes to the scalar slot.
  HamiltonianPoly hamiltonian(const TorusData& torus, int degree_cap) const;
  CenteredPoly centered(const TorusData& torus, int degree_cap) const;

 private:
  ModeSet modes_;
  std::vector<double> lambda_;
};

CenteredPoly to_centered(const HamiltonianPoly& h, const TorusData& torus, PruneRule rule = {});
HamiltonianPoly to_plain(const CenteredPoly& c, PruneRule rule = {});

struct DegreeSelector {
  enum class Kind { Exact, AtMostZero, AtLeastOne };
  Kind kind = Kind::Exact;
  int d = 0;

  static DegreeSelector exact(int d) { return {Kind::Exact, d}; }
  static DegreeSelector at_most_zero() { return {Kind::AtMostZero, 0}; }
  static DegreeSelector at_least_one() { return {Kind::AtLeastOne, 1}; }
  bool accepts(int degree) const;
};

/// Degree filter. Constants belong to no degree and are dropped.
CenteredPoly project_degree(const CenteredPoly& c, DegreeSelector sel);

enum class KernelPart { Kernel, Range };

/// Plain Π^K keeps α = β; Π^R the complement. Constants are dropped.
HamiltonianPoly project_kernel(const HamiltonianPoly& h, KernelPart part);
CenteredPoly project_kernel(const CenteredPoly& c, KernelPart part);
/// Π^{0,K}: the degree-0 kernel content, which is exactly a counterterm.
CounterTerm extract_counterterm(const CenteredPoly& c);

/// The pieces of the degree decomposition in plain form, with
/// G = constant + m2 + m1 + zero_range + Λ(zero_kernel) + ge1.
struct DegreeParts {
  Complex constant;
  HamiltonianPoly m2;
  HamiltonianPoly m1;
  HamiltonianPoly zero_range;
  CounterTerm zero_kernel;
  HamiltonianPoly ge1;
};

DegreeParts split_degrees(const HamiltonianPoly& h, const TorusData& torus, PruneRule rule = {});

/// weighted_norm(Π^{≤0}(N − D(ω))) ≤ tol at the torus norm parameters.
bool is_normal_form(const HamiltonianPoly& n, const FrequencyVector& omega, const TorusData& torus, double tol);
/// The quantity compared against tol by is_normal_form.
double normal_form_defect(const HamiltonianPoly& n, const FrequencyVector& omega, const TorusData& torus);

}  // namespace kamlab
